// Apache License, Version 2.0, refer to LICENSE.txt
#pragma once

#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "dlcm/record.hpp"
#include "dlcm/structure.hpp"

namespace dlcm {

// rows are iterations, columns are subjects
using LoglikMatrix = std::vector<std::vector<double>>;

double lppd(const LoglikMatrix& loglik);
double waic_penalty(const LoglikMatrix& loglik);
double waic(const LoglikMatrix& loglik);

// Brooks-Gelman multivariate PSRF. Each matrix is iterations x monitored scalars.
// Constant coordinates are dropped; collinear ones are handled by a pseudo-inverse.
double gelman_rubin(const std::vector<Eigen::MatrixXd>& series);

// pi, marginal item probabilities and total log-likelihood per stored main draw.
// perm maps a class of this record to the reference labelling.
Eigen::MatrixXd monitored_series(const ChainRecord& rec, const std::vector<int>& perm = {});
// Greedy class matching of each record to the first by mean marginal profiles.
std::vector<std::vector<int>> align_class_labels(const std::vector<ChainRecord>& records);
double gelman_rubin_records(const std::vector<ChainRecord>& records);

struct StructureShare {
  DomainStructure structure;
  long count = 0;
  double share = 0;
};

// warmup_cut < 0 drops each record's own warmup.
std::vector<StructureShare> structure_mode(const std::vector<ChainRecord>& records, long warmup_cut = -1);
std::vector<StructureShare> structure_mode(const ChainRecord& record, long warmup_cut = -1);

// 1-based iteration, warmup included. Class labels may be permuted relative to truth.
std::optional<long> first_hit(const ChainRecord& record, const DomainStructure& truth);

struct FitSummary {
  double lppd = 0;
  double waic_penalty = 0;
  double waic = 0;
  long n_eff_iters = 0;
  DomainStructure mode_structure;
  double mode_share = 0;
  std::optional<double> psrf;
};

FitSummary summarize(const std::vector<ChainRecord>& records);

}  // namespace dlcm
