// Apache License, Version 2.0, refer to LICENSE.txt
#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "dlcm/types.hpp"

namespace dlcm {

struct IngestResult {
  Dataset data;
  std::vector<std::string> warnings;
};

// Q_j is max code + 1 (at least 2) unless `cardinalities` overrides it.
IngestResult validate_dataset(const std::vector<std::vector<long long>>& raw,
                              const std::optional<std::vector<int>>& cardinalities = std::nullopt,
                              std::vector<std::string> item_names = {});

// Header row of item names, then one integer row per subject.
IngestResult read_dataset_csv(std::istream& in,
                              const std::optional<std::vector<int>>& cardinalities = std::nullopt);
IngestResult read_dataset_csv(const std::string& path,
                              const std::optional<std::vector<int>>& cardinalities = std::nullopt);
void write_dataset_csv(std::ostream& out, const Dataset& data);

Dataset empty_dataset(std::vector<int> cardinalities);

}  // namespace dlcm
