// Apache License, Version 2.0, refer to LICENSE.txt
#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "dlcm/structure.hpp"
#include "dlcm/types.hpp"

namespace dlcm {

// Running per-subject log-mean-exp and mean of log-likelihood draws.
class PointwiseAccumulator {
 public:
  void add(std::span<const double> loglik_row);
  long draws() const { return draws_; }
  int subjects() const { return static_cast<int>(max_.size()); }
  double lppd() const;
  double waic_penalty() const;
  double waic() const { return -2.0 * lppd() + 2.0 * waic_penalty(); }
  // Concatenates draws from another chain over the same subjects.
  void merge(const PointwiseAccumulator& other);

 private:
  long draws_ = 0;
  std::vector<double> max_, scaled_sum_, sum_;
};

struct AcceptanceStats {
  long proposed = 0;
  long accepted = 0;
  long rejected_identifiability = 0;
  long rejected_mh = 0;
  long no_valid = 0;
};

struct ChainRecord {
  std::uint64_t seed = 0;
  int J = 0, C = 0, D = 0;
  StructureMode mode = StructureMode::homogeneous;
  std::vector<int> equivalence;
  std::vector<int> cardinalities;
  long warmup = 0, main = 0;
  int thin = 1;
  bool fixed_structure = false;

  // One entry per iteration 1..warmup+main; canonical columns, class-major.
  std::vector<std::vector<int>> structures;
  std::vector<double> total_loglik;
  // Main-phase draws kept after thinning, theta keyed by canonical domain id.
  std::vector<long> draw_iterations;
  std::vector<ModelParams> draws;
  // Main-phase per-subject log-likelihood (empty unless stored).
  std::vector<std::vector<double>> loglik;
  PointwiseAccumulator pointwise;
  AcceptanceStats stats;

  long iterations() const { return static_cast<long>(structures.size()); }
  // t is 1-based.
  DomainStructure structure_at(long t) const;
};

}  // namespace dlcm
