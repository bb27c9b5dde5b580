// Apache License, Version 2.0, refer to LICENSE.txt
#pragma once

#include <compare>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace dlcm {

enum class StructureMode { homogeneous, heterogeneous, partial };
enum class PriorKind { uniform, bucket, pattern_adjusted };

const char* to_string(StructureMode mode);
const char* to_string(PriorKind kind);
StructureMode parse_mode(const std::string& s);
PriorKind parse_prior_kind(const std::string& s);

// Responses are stored row-major: subject i, item j at [i * J + j].
struct Dataset {
  int rows = 0;
  std::vector<int> responses;
  std::vector<int> cardinalities;
  std::vector<std::string> item_names;

  int n() const { return rows; }
  int items() const { return static_cast<int>(cardinalities.size()); }
  int at(int i, int j) const { return responses[static_cast<size_t>(i) * items() + j]; }
  std::span<const int> row(int i) const {
    return {responses.data() + static_cast<size_t>(i) * items(), static_cast<size_t>(items())};
  }
};

struct DomainKey {
  int cls = 0;
  int domain = 0;
  auto operator<=>(const DomainKey&) const = default;
};

struct ModelParams {
  std::vector<double> pi;
  std::map<DomainKey, std::vector<double>> theta;
};

struct Hyperparams {
  std::vector<double> alpha_c;  // empty means 1 for every class
  double alpha_theta = 1.0;
  int D = 0;                    // 0 means J*J - 1
  double p_empty = 0.3;
  int n_domain_iters = 0;       // 0 means J
  int max_items = 10;
  int n_homo_iters = -1;        // -1 means min(5% of all iterations, 1000)
  PriorKind prior_kind = PriorKind::bucket;

  // Fills the "use default" sentinels. total_iters feeds the warmup rule.
  void resolve(int J, int C, long total_iters = 0);
  // Throws ConfigInvalid. Call after resolve.
  void validate(int J, int C) const;
};

}  // namespace dlcm
