// Apache License, Version 2.0, refer to LICENSE.txt
#include "dlcm/identifiability.hpp"

#include <algorithm>
#include <numeric>

#include <Eigen/SVD>

#include "dlcm/error.hpp"

namespace dlcm {

namespace {

constexpr std::int64_t kSaturate = std::int64_t{1} << 62;

std::int64_t sat_mul(std::int64_t a, std::int64_t b) {
  if (a >= kSaturate / b) return kSaturate;
  return a * b;
}

struct UnionFind {
  std::vector<int> parent;
  explicit UnionFind(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  int find(int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  void unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
};

}  // namespace

PooledPartition pooled_domains(const DomainStructure& s, std::span<const int> cardinalities) {
  const int J = s.items();
  UnionFind uf(J);
  std::vector<int> first(s.slots());
  for (int c = 0; c < s.classes(); ++c) {
    std::fill(first.begin(), first.end(), -1);
    auto col = s.column(c);
    for (int j = 0; j < J; ++j) {
      if (first[col[j]] < 0)
        first[col[j]] = j;
      else
        uf.unite(first[col[j]], j);
    }
  }
  PooledPartition out;
  std::vector<int> block_of(J, -1);
  for (int j = 0; j < J; ++j) {
    int root = uf.find(j);
    if (block_of[root] < 0) {
      block_of[root] = static_cast<int>(out.blocks.size());
      out.blocks.emplace_back();
      out.pattern_counts.push_back(1);
    }
    const int b = block_of[root];
    out.blocks[b].push_back(j);
    out.pattern_counts[b] = sat_mul(out.pattern_counts[b], cardinalities[j]);
  }
  return out;
}

int greedy_kruskal_score(const PooledPartition& pooled, int C) {
  std::vector<size_t> order(pooled.blocks.size());
  std::iota(order.begin(), order.end(), 0);
  // blocks are already sorted by smallest item, so a stable sort keeps that tie-break
  std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    return pooled.pattern_counts[a] > pooled.pattern_counts[b];
  });
  std::int64_t kappa[3] = {1, 1, 1};
  const std::int64_t cap = C;
  for (size_t b : order) {
    int best = 0;
    std::int64_t best_gain = -1;
    for (int k = 0; k < 3; ++k) {
      std::int64_t gain = std::min(sat_mul(kappa[k], pooled.pattern_counts[b]), cap) - std::min(kappa[k], cap);
      if (gain > best_gain) {
        best_gain = gain;
        best = k;
      }
    }
    kappa[best] = sat_mul(kappa[best], pooled.pattern_counts[b]);
  }
  int m = 0;
  for (auto k : kappa) m += static_cast<int>(std::min(k, cap));
  return m;
}

bool kruskal_identifiable(const PooledPartition& pooled, int C) {
  return greedy_kruskal_score(pooled, C) >= 2 * C + 2;
}

bool admissible(const DomainStructure& s, std::span<const int> cardinalities, const Hyperparams& hyper) {
  if (s.max_domain_size() > hyper.max_items) return false;
  if (s.classes() == 1) return true;
  return kruskal_identifiable(pooled_domains(s, cardinalities), s.classes());
}

bool kronecker_separable(std::span<const double> theta, std::span<const int> q_sub, double tol) {
  const int m = static_cast<int>(q_sub.size());
  std::int64_t total = 1;
  for (int q : q_sub) total *= q;
  if (static_cast<std::int64_t>(theta.size()) != total)
    throw Error(ErrorCode::dimension_mismatch, "theta length differs from product of cardinalities");
  if (m < 2) return false;
  // item 0 always sits in the row group so each split is visited once
  for (unsigned mask = 1; mask < (1u << (m - 1)); ++mask) {
    std::vector<int> rows_items{0}, col_items;
    for (int k = 1; k < m; ++k) ((mask >> (k - 1)) & 1u ? col_items : rows_items).push_back(k);
    std::int64_t nr = 1, nc = 1;
    for (int k : rows_items) nr *= q_sub[k];
    for (int k : col_items) nc *= q_sub[k];
    Eigen::MatrixXd mat(nr, nc);
    std::vector<int> digits(m, 0);
    for (std::int64_t r = 0; r < total; ++r) {
      std::int64_t ri = 0, ci = 0, rs = 1, cs = 1;
      for (int k : rows_items) {
        ri += digits[k] * rs;
        rs *= q_sub[k];
      }
      for (int k : col_items) {
        ci += digits[k] * cs;
        cs *= q_sub[k];
      }
      mat(ri, ci) = theta[r];
      for (int k = 0; k < m; ++k) {
        if (++digits[k] < q_sub[k]) break;
        digits[k] = 0;
      }
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(mat);
    const auto& sv = svd.singularValues();
    if (sv.size() < 2 || sv(1) <= tol) return true;
  }
  return false;
}

}  // namespace dlcm
