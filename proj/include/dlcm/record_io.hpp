// Apache License, Version 2.0, refer to LICENSE.txt
#pragma once

#include <string>

#include "json.hpp"

#include "dlcm/diagnostics.hpp"
#include "dlcm/record.hpp"
#include "dlcm/simgen.hpp"
#include "dlcm/structure.hpp"

namespace dlcm {

using nlohmann::json;

// {mode, E, classes: [{class, domains: [[items]]}]}, canonical.
json structure_to_json(const DomainStructure& s);
DomainStructure structure_from_json(const json& j, int items, int slots);

json params_to_json(const ModelParams& p);
ModelParams params_from_json(const json& j);

json truth_to_json(const Truth& t, const std::vector<int>& classes = {});
Truth truth_from_json(const json& j);

json acceptance_to_json(const AcceptanceStats& s);
json summary_to_json(const FitSummary& s);

// Writes meta.json, structures.jsonl, params.csv and (when stored) loglik.csv.
void write_record(const std::string& dir, const ChainRecord& rec, const json& config_echo = {},
                  bool with_params = true);
ChainRecord read_record(const std::string& dir);

void write_text(const std::string& path, const std::string& text);
json read_json(const std::string& path);

}  // namespace dlcm
