// Apache License, Version 2.0, refer to LICENSE.txt
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dlcm/structure.hpp"
#include "dlcm/types.hpp"

namespace dlcm {

enum class Scenario { traditional, homogeneous, homogeneous_bad, heterogeneous, custom };
const char* to_string(Scenario s);
Scenario parse_scenario(const std::string& s);

struct Truth {
  ModelParams params;  // theta keyed by canonical domain ids of `structure`
  DomainStructure structure;
  std::vector<int> cardinalities;
};

struct GeneratorSpec {
  Scenario scenario = Scenario::custom;
  int n = 0;
  Truth truth;
  std::uint64_t seed = 0;
};

struct SimulatedData {
  Dataset data;
  std::vector<int> classes;
};

// Slots default to J*J - 1.
Truth build_truth(Scenario scenario);
// Starting structure for the bad-seed study: the true 4-item domain is split
// and each half is merged with an unrelated item.
DomainStructure bad_seed_structure();

SimulatedData generate(const GeneratorSpec& spec);
SimulatedData generate(const Truth& truth, int n, std::uint64_t seed);

}  // namespace dlcm
