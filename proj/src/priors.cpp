// Apache License, Version 2.0, refer to LICENSE.txt
#include "dlcm/priors.hpp"

#include <cmath>
#include <map>

#include "dlcm/error.hpp"

namespace dlcm {

void PriorSpec::validate() const {
  if (D < 1) throw Error(ErrorCode::config_invalid, "prior D must be positive");
  if (kind == PriorKind::pattern_adjusted && alpha_theta != 1.0)
    throw Error(ErrorCode::config_invalid, "the pattern adjusted prior requires alpha_theta = 1");
}

PriorSpec prior_spec(const Hyperparams& hyper) {
  return PriorSpec{hyper.prior_kind, hyper.D, hyper.alpha_theta};
}

namespace {

double log_bucket(int J, int nonempty, int D) {
  if (nonempty > D) throw Error(ErrorCode::too_many_domains, "more nonempty domains than slots");
  double s = -J * std::log(static_cast<double>(D));
  for (int k = 0; k < nonempty; ++k) s += std::log(static_cast<double>(D - k));
  return s;
}

// lgamma(R) and domain count of a column
std::pair<int, double> column_summary(std::span<const int> column, std::span<const int> cardinalities) {
  std::map<int, double> patterns;
  for (size_t j = 0; j < column.size(); ++j) {
    auto [it, fresh] = patterns.try_emplace(column[j], 1.0);
    it->second *= cardinalities[j];
  }
  double lg = 0;
  for (auto& [d, r] : patterns) lg += std::lgamma(r);
  return {static_cast<int>(patterns.size()), lg};
}

}  // namespace

double log_prior_class(int J, int nonempty, double sum_lgamma_patterns, const PriorSpec& spec) {
  switch (spec.kind) {
    case PriorKind::uniform:
      if (nonempty > spec.D) throw Error(ErrorCode::too_many_domains, "more nonempty domains than slots");
      return 0.0;
    case PriorKind::bucket: return log_bucket(J, nonempty, spec.D);
    case PriorKind::pattern_adjusted: return log_bucket(J, nonempty, spec.D) - sum_lgamma_patterns;
  }
  return 0.0;
}

double log_prior_class(std::span<const int> column, std::span<const int> cardinalities,
                       const PriorSpec& spec) {
  auto [k, lg] = column_summary(column, cardinalities);
  return log_prior_class(static_cast<int>(column.size()), k, lg, spec);
}

double log_prior_structure(const DomainStructure& s, std::span<const int> cardinalities,
                           const PriorSpec& spec) {
  double total = 0;
  for (const auto& group : s.groups()) {
    auto [k, lg] = column_summary(s.column(group.front()), cardinalities);
    total += log_prior_class(s.items(), k, lg, spec);
    if (spec.kind == PriorKind::pattern_adjusted) total -= (group.size() - 1) * lg;
  }
  return total;
}

double log_size_class_prior(std::span<const int> sizes, int J, int D) {
  int sum = 0, k = 0;
  std::map<int, int> mult;
  double lg = std::lgamma(J + 1.0);
  for (int s : sizes) {
    if (s <= 0) continue;
    sum += s;
    ++k;
    ++mult[s];
    lg -= std::lgamma(s + 1.0);
  }
  if (sum != J) throw Error(ErrorCode::sizes_dont_sum_to_j, "block sizes sum to " + std::to_string(sum));
  for (auto& [s, m] : mult) lg -= std::lgamma(m + 1.0);
  return lg + log_bucket(J, k, D);
}

double size_class_prior(std::span<const int> sizes, int J, int D) {
  return std::exp(log_size_class_prior(sizes, J, D));
}

int min_slots_for_ratio(int J, double q) {
  return static_cast<int>(std::ceil(J + 0.5 * q * J * (J - 1.0) - 1.0 - 1e-9));
}

}  // namespace dlcm
