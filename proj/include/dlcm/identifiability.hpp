// Apache License, Version 2.0, refer to LICENSE.txt
#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "dlcm/structure.hpp"
#include "dlcm/types.hpp"

namespace dlcm {

struct PooledPartition {
  std::vector<std::vector<int>> blocks;  // sorted by smallest item
  std::vector<std::int64_t> pattern_counts;  // product of Q over the block, saturating
};

// Items sharing a domain in any class end up in one block.
PooledPartition pooled_domains(const DomainStructure& s, std::span<const int> cardinalities);

// Greedy three-way split score, sum over parts of min(kappa, C).
int greedy_kruskal_score(const PooledPartition& pooled, int C);
bool kruskal_identifiable(const PooledPartition& pooled, int C);

// MaxItems plus the Kruskal check. A one-class model is always identifiable.
bool admissible(const DomainStructure& s, std::span<const int> cardinalities, const Hyperparams& hyper);

// True when theta factors as an outer product across some split of the items.
// Items ascending, the first item varies fastest. Single-item domains give false.
bool kronecker_separable(std::span<const double> theta, std::span<const int> q_sub, double tol);

}  // namespace dlcm
