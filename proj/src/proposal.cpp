// Apache License, Version 2.0, refer to LICENSE.txt
#include <algorithm>
#include <cmath>

#include "dlcm/error.hpp"
#include "dlcm/sampler.hpp"

namespace dlcm {

double domain_log_marginal(std::span<const int> counts, double alpha_theta) {
  const double R = static_cast<double>(counts.size());
  double s = 0, total = 0;
  for (int n : counts) {
    s += std::lgamma(alpha_theta + n);
    total += alpha_theta + n;
  }
  s -= std::lgamma(total);
  s -= R * std::lgamma(alpha_theta) - std::lgamma(R * alpha_theta);
  return s;
}

double proposal_log_ratio(int nonempty_before, int s1, int s2, int s1_new, int s2_new, double p_empty) {
  auto pair_weight = [p_empty](int a, int b) {
    return 2.0 - p_empty * (a > 1) - p_empty * (b > 1);
  };
  const double k = nonempty_before;
  if (s2 == 0) return std::log(p_empty * (k + 1)) - std::log(pair_weight(s1_new, s2_new));
  if (s1_new == 0 || s2_new == 0) return std::log(pair_weight(s1, s2)) - std::log(p_empty * k);
  return std::log(pair_weight(s1, s2)) - std::log(pair_weight(s1_new, s2_new));
}

std::optional<ProposalOutcome> try_propose_swap(std::span<const int> column, int D,
                                                const Hyperparams& hyper, Rng& rng) {
  std::vector<int> sizes(D, 0);
  for (int d : column) ++sizes[d];
  std::vector<int> nonempty;
  for (int d = 0; d < D; ++d)
    if (sizes[d]) nonempty.push_back(d);
  const int k = static_cast<int>(nonempty.size());
  if (k == 0) return std::nullopt;

  const int pos1 = uniform_index(rng, k);
  const int d1 = nonempty[pos1];
  int d2 = -1;
  if (sizes[d1] > 1 && uniform01(rng) < hyper.p_empty) {
    for (int d = 0; d < D; ++d)
      if (!sizes[d]) {
        d2 = d;
        break;
      }
    if (d2 < 0) return std::nullopt;
  } else {
    if (k < 2) return std::nullopt;
    int pos2 = uniform_index(rng, k - 1);
    if (pos2 >= pos1) ++pos2;
    d2 = nonempty[pos2];
  }

  std::vector<int> pool;
  std::vector<char> old_side;
  for (int j = 0; j < static_cast<int>(column.size()); ++j)
    if (column[j] == d1 || column[j] == d2) {
      pool.push_back(j);
      old_side.push_back(column[j] == d2);
    }
  const int m = static_cast<int>(pool.size());
  std::vector<char> side(m);
  bool found = false;
  for (int attempt = 0; attempt < 1000 && !found; ++attempt) {
    std::uint64_t bits = 0;
    int a = 0;
    for (int t = 0; t < m; ++t) {
      if (t % 64 == 0) bits = rng();
      side[t] = static_cast<char>(bits & 1u);
      bits >>= 1;
      a += side[t] == 0;
    }
    const int b = m - a;
    if (a > hyper.max_items || b > hyper.max_items) continue;
    bool same = true, flipped = true;
    for (int t = 0; t < m; ++t) {
      same = same && side[t] == old_side[t];
      flipped = flipped && side[t] != old_side[t];
    }
    found = !same && !flipped;
  }
  if (!found) return std::nullopt;

  ProposalOutcome out;
  out.d1 = d1;
  out.d2 = d2;
  out.proposed_column.assign(column.begin(), column.end());
  int s1_new = 0;
  for (int t = 0; t < m; ++t) {
    out.proposed_column[pool[t]] = side[t] ? d2 : d1;
    s1_new += side[t] == 0;
  }
  out.log_forward_over_backward =
      proposal_log_ratio(k, sizes[d1], sizes[d2], s1_new, m - s1_new, hyper.p_empty);
  return out;
}

ProposalOutcome propose_swap(std::span<const int> column, int D, const Hyperparams& hyper, Rng& rng) {
  auto out = try_propose_swap(column, D, hyper, rng);
  if (!out) throw Error(ErrorCode::no_valid_proposal, "no valid domain mix from this structure");
  return *out;
}

}  // namespace dlcm
