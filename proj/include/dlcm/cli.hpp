// Apache License, Version 2.0, refer to LICENSE.txt
#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "dlcm/diagnostics.hpp"
#include "dlcm/sampler.hpp"
#include "dlcm/simgen.hpp"

namespace dlcm {

// Exit codes: 0 ok, 2 usage or config, 3 data, 4 runtime.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// Interprets a fit config object (keys mirror the fit flags). "model": "traditional"
// becomes a fixed all-singleton structure.
SamplerConfig config_from_json(const nlohmann::json& cfg, const Dataset& data);

// Writes summary.json and structures_top.csv for a set of chains.
nlohmann::json write_diagnostics(const std::string& out_dir, const std::vector<ChainRecord>& records,
                                 const std::optional<DomainStructure>& truth, long warmup_cut = -1, int top = 20);

struct ReplicateResult {
  int replicate = 0;
  bool ok = false;
  std::string error;
  bool mode_correct = false;
  std::optional<long> first_hit;
  double mode_share = 0;
  double waic = 0;
  double lppd = 0;
  double seconds = 0;
};

struct CellReport {
  std::string data, model, prior, seed_style;
  int n = 0;
  int classes = 2;
  std::string dir;
  std::vector<ReplicateResult> reps;

  double mode_acc() const;  // percent over successful replicates
  std::optional<double> first_hit_median() const;
  double waic_mean() const;
  int errors() const;
};

// Runs (or resumes) every cell of a study plan.
std::vector<CellReport> run_study(const nlohmann::json& plan, int jobs, std::ostream& log);
void write_report_csv(std::ostream& out, const std::vector<CellReport>& cells);

}  // namespace dlcm
