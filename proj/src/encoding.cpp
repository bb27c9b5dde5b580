// Apache License, Version 2.0, refer to LICENSE.txt
#include "dlcm/encoding.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "dlcm/error.hpp"

namespace dlcm {

MappingVector::MappingVector(std::span<const int> items, std::span<const int> cardinalities)
    : items_(items.begin(), items.end()) {
  if (items_.empty()) throw Error(ErrorCode::empty_set, "mapping vector over no items");
  std::sort(items_.begin(), items_.end());
  if (std::adjacent_find(items_.begin(), items_.end()) != items_.end())
    throw Error(ErrorCode::config_invalid, "duplicate item in domain");
  for (int j : items_) {
    if (j < 0 || j >= static_cast<int>(cardinalities.size()))
      throw Error(ErrorCode::dimension_mismatch, "item index outside cardinalities");
    const int q = cardinalities[j];
    places_.push_back(count_);
    radices_.push_back(q);
    if (count_ > std::numeric_limits<PatternId>::max() / q)
      throw Error(ErrorCode::config_invalid, "pattern count overflows 64 bits");
    count_ *= q;
  }
}

std::vector<PatternId> MappingVector::entries(int J) const {
  std::vector<PatternId> e(J, 0);
  for (size_t k = 0; k < items_.size(); ++k) e[items_[k]] = places_[k];
  return e;
}

std::vector<int> MappingVector::decode(PatternId r) const {
  if (r < 0 || r >= count_) throw Error(ErrorCode::pattern_out_of_range, std::to_string(r));
  std::vector<int> x(items_.size());
  for (size_t k = 0; k < items_.size(); ++k) {
    x[k] = static_cast<int>(r % radices_[k]);
    r /= radices_[k];
  }
  return x;
}

MappingVector mapping_vector(std::span<const int> items, std::span<const int> cardinalities) {
  return MappingVector(items, cardinalities);
}

PatternId encode_pattern(std::span<const int> row, const MappingVector& mv) { return mv.encode(row); }

std::vector<int> decode_pattern(PatternId r, const MappingVector& mv) { return mv.decode(r); }

double log_sum_exp(std::span<const double> v) {
  double mx = -std::numeric_limits<double>::infinity();
  for (double x : v) mx = std::max(mx, x);
  if (!std::isfinite(mx)) return mx;
  double s = 0;
  for (double x : v) s += std::exp(x - mx);
  return mx + std::log(s);
}

namespace {

const std::vector<double>& theta_at(const ModelParams& params, int c, int d) {
  auto it = params.theta.find({c, d});
  if (it == params.theta.end())
    throw Error(ErrorCode::dimension_mismatch,
                "no theta for class " + std::to_string(c) + " domain " + std::to_string(d));
  return it->second;
}

}  // namespace

LikelihoodEvaluator::LikelihoodEvaluator(const ModelParams& params, const DomainStructure& structure,
                                         std::span<const int> cardinalities) {
  const int C = structure.classes();
  if (static_cast<int>(params.pi.size()) != C) throw Error(ErrorCode::dimension_mismatch, "pi length");
  for (double p : params.pi) log_pi_.push_back(std::log(p));
  terms_.resize(C);
  for (int c = 0; c < C; ++c) {
    auto col = structure.column(c);
    for (int d : structure.nonempty_domains(c)) {
      std::vector<int> items;
      for (int j = 0; j < structure.items(); ++j)
        if (col[j] == d) items.push_back(j);
      MappingVector mv(items, cardinalities);
      const auto& th = theta_at(params, c, d);
      if (static_cast<PatternId>(th.size()) != mv.pattern_count())
        throw Error(ErrorCode::dimension_mismatch, "theta length differs from pattern count");
      std::vector<double> lt(th.size());
      std::transform(th.begin(), th.end(), lt.begin(), [](double t) { return std::log(t); });
      terms_[c].push_back({std::move(mv), std::move(lt)});
    }
  }
}

double LikelihoodEvaluator::class_loglik(std::span<const int> row, int cls) const {
  double s = 0;
  for (const auto& t : terms_[cls]) s += t.log_theta[t.mv.encode(row)];
  return s;
}

double LikelihoodEvaluator::mixture_loglik(std::span<const int> row) const {
  std::vector<double> v(terms_.size());
  for (size_t c = 0; c < terms_.size(); ++c) v[c] = log_pi_[c] + class_loglik(row, static_cast<int>(c));
  double out = log_sum_exp(v);
  if (!std::isfinite(out)) throw Error(ErrorCode::all_classes_zero_mass, "response has zero probability");
  return out;
}

double class_loglik(std::span<const int> row, int cls, const ModelParams& params,
                    const DomainStructure& structure, std::span<const int> cardinalities) {
  auto col = structure.column(cls);
  double s = 0;
  for (int d : structure.nonempty_domains(cls)) {
    std::vector<int> items;
    for (int j = 0; j < structure.items(); ++j)
      if (col[j] == d) items.push_back(j);
    MappingVector mv(items, cardinalities);
    s += std::log(theta_at(params, cls, d).at(mv.encode(row)));
  }
  return s;
}

double mixture_loglik(std::span<const int> row, const ModelParams& params,
                      const DomainStructure& structure, std::span<const int> cardinalities) {
  return LikelihoodEvaluator(params, structure, cardinalities).mixture_loglik(row);
}

ItemMarginals marginal_item_probs(const ModelParams& params, const DomainStructure& structure,
                                  std::span<const int> cardinalities) {
  const int C = structure.classes(), J = structure.items();
  ItemMarginals out(C, std::vector<std::vector<double>>(J));
  for (int c = 0; c < C; ++c) {
    auto col = structure.column(c);
    for (int d : structure.nonempty_domains(c)) {
      std::vector<int> items;
      for (int j = 0; j < J; ++j)
        if (col[j] == d) items.push_back(j);
      MappingVector mv(items, cardinalities);
      const auto& th = theta_at(params, c, d);
      for (size_t k = 0; k < items.size(); ++k) out[c][items[k]].assign(cardinalities[items[k]], 0.0);
      // walk patterns with an odometer instead of decoding each id
      std::vector<int> digits(items.size(), 0);
      for (PatternId r = 0; r < mv.pattern_count(); ++r) {
        for (size_t k = 0; k < items.size(); ++k) out[c][items[k]][digits[k]] += th[r];
        for (size_t k = 0; k < items.size(); ++k) {
          if (++digits[k] < mv.radices()[k]) break;
          digits[k] = 0;
        }
      }
    }
  }
  return out;
}

}  // namespace dlcm
