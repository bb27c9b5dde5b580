// Apache License, Version 2.0, refer to LICENSE.txt
#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "dlcm/structure.hpp"
#include "dlcm/types.hpp"

namespace dlcm {

using PatternId = std::int64_t;

// Mixed-radix place values over an ascending item set.
class MappingVector {
 public:
  MappingVector(std::span<const int> items, std::span<const int> cardinalities);

  const std::vector<int>& items() const { return items_; }
  const std::vector<int>& radices() const { return radices_; }
  const std::vector<PatternId>& places() const { return places_; }
  PatternId pattern_count() const { return count_; }
  std::vector<PatternId> entries(int J) const;

  PatternId encode(std::span<const int> row) const {
    PatternId r = 0;
    for (size_t k = 0; k < items_.size(); ++k) r += places_[k] * row[items_[k]];
    return r;
  }
  // Digits in ascending item order.
  std::vector<int> decode(PatternId r) const;

 private:
  std::vector<int> items_;
  std::vector<int> radices_;
  std::vector<PatternId> places_;
  PatternId count_ = 1;
};

MappingVector mapping_vector(std::span<const int> items, std::span<const int> cardinalities);
PatternId encode_pattern(std::span<const int> row, const MappingVector& mv);
std::vector<int> decode_pattern(PatternId r, const MappingVector& mv);

// theta keys follow the slot ids of `structure`.
double class_loglik(std::span<const int> row, int cls, const ModelParams& params,
                    const DomainStructure& structure, std::span<const int> cardinalities);
double mixture_loglik(std::span<const int> row, const ModelParams& params,
                      const DomainStructure& structure, std::span<const int> cardinalities);

// [c][j][q] = P(X_j = q | class c)
using ItemMarginals = std::vector<std::vector<std::vector<double>>>;
ItemMarginals marginal_item_probs(const ModelParams& params, const DomainStructure& structure,
                                  std::span<const int> cardinalities);

// Precompiled mapping vectors for repeated log-likelihood evaluation.
class LikelihoodEvaluator {
 public:
  LikelihoodEvaluator(const ModelParams& params, const DomainStructure& structure,
                      std::span<const int> cardinalities);
  double class_loglik(std::span<const int> row, int cls) const;
  double mixture_loglik(std::span<const int> row) const;

 private:
  struct Term {
    MappingVector mv;
    std::vector<double> log_theta;
  };
  std::vector<double> log_pi_;
  std::vector<std::vector<Term>> terms_;
};

double log_sum_exp(std::span<const double> v);

}  // namespace dlcm
