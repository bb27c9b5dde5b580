// Apache License, Version 2.0, refer to LICENSE.txt
#pragma once

#include <span>
#include <vector>

#include "dlcm/structure.hpp"
#include "dlcm/types.hpp"

namespace dlcm {

struct PriorSpec {
  PriorKind kind = PriorKind::bucket;
  int D = 0;
  double alpha_theta = 1.0;

  void validate() const;
};

PriorSpec prior_spec(const Hyperparams& hyper);

// Unnormalized log prior of one class's partition, given as a column of slot ids.
double log_prior_class(std::span<const int> column, std::span<const int> cardinalities,
                       const PriorSpec& spec);
// Same value from summary numbers: domain count and sum of lgamma(R) over domains.
double log_prior_class(int J, int nonempty, double sum_lgamma_patterns, const PriorSpec& spec);

// Bucket term for each group's representative. The pattern term counts every class.
double log_prior_structure(const DomainStructure& s, std::span<const int> cardinalities,
                           const PriorSpec& spec);

// Unnormalized mass of all partitions with the given block sizes.
double size_class_prior(std::span<const int> sizes, int J, int D);
double log_size_class_prior(std::span<const int> sizes, int J, int D);

int min_slots_for_ratio(int J, double q);

}  // namespace dlcm
