// Apache License, Version 2.0, refer to LICENSE.txt
#include "dlcm/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include "CLI11.hpp"

#include "dlcm/dataset.hpp"
#include "dlcm/error.hpp"
#include "dlcm/priors.hpp"
#include "dlcm/record_io.hpp"

namespace dlcm {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

int exit_code(ErrorCode c) {
  switch (c) {
    case ErrorCode::non_rectangular:
    case ErrorCode::negative_code:
    case ErrorCode::bad_cell:
    case ErrorCode::too_few_distinct_rows:
      return 3;
    case ErrorCode::config_invalid:
    case ErrorCode::too_many_domains:
    case ErrorCode::sizes_dont_sum_to_j:
    case ErrorCode::dimension_mismatch:
      return 2;
    default:
      return 4;
  }
}

std::vector<int> parse_int_list(const json& v) {
  if (v.is_array()) return v.get<std::vector<int>>();
  std::vector<int> out;
  std::stringstream ss(v.get<std::string>());
  std::string tok;
  while (std::getline(ss, tok, ','))
    if (!tok.empty()) out.push_back(std::stoi(tok));
  return out;
}

std::vector<double> parse_double_list(const json& v) {
  if (v.is_array()) return v.get<std::vector<double>>();
  if (v.is_number()) return {v.get<double>()};
  std::vector<double> out;
  std::stringstream ss(v.get<std::string>());
  std::string tok;
  while (std::getline(ss, tok, ','))
    if (!tok.empty()) out.push_back(std::stod(tok));
  return out;
}

std::optional<std::uint64_t> env_seed() {
  if (const char* s = std::getenv("DLCM_SEED"); s && *s) return std::stoull(s);
  return std::nullopt;
}

// Stable string hash for seed derivation.
std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace

SamplerConfig config_from_json(const json& cfg, const Dataset& data) {
  SamplerConfig c;
  const int J = data.items();
  try {
    c.classes = cfg.value("classes", 2);
    const std::string model = cfg.value("model", std::string("homogeneous"));
    if (model == "traditional") {
      c.mode = StructureMode::homogeneous;
      c.fixed_structure = DomainStructure(J, c.classes, std::max(J, J * J - 1), StructureMode::homogeneous);
    } else {
      c.mode = parse_mode(model);
    }
    if (cfg.contains("E")) c.equivalence = parse_int_list(cfg["E"]);
    if (c.mode == StructureMode::partial && c.equivalence.empty())
      throw Error(ErrorCode::config_invalid, "partial mode needs E");

    Hyperparams& h = c.hyper;
    if (cfg.contains("prior")) {
      const json& p = cfg["prior"];
      if (p.is_string()) {
        h.prior_kind = parse_prior_kind(p.get<std::string>());
      } else {
        if (p.contains("kind")) h.prior_kind = parse_prior_kind(p["kind"].get<std::string>());
        if (p.contains("D")) h.D = p["D"].get<int>();
        if (p.contains("q") && !p.contains("D")) h.D = min_slots_for_ratio(J, p["q"].get<double>());
      }
    }
    if (cfg.contains("alpha_theta")) h.alpha_theta = cfg["alpha_theta"].get<double>();
    if (cfg.contains("alpha_c")) h.alpha_c = parse_double_list(cfg["alpha_c"]);
    if (h.alpha_c.size() == 1 && c.classes > 1) h.alpha_c.assign(c.classes, h.alpha_c.front());
    h.p_empty = cfg.value("p_empty", h.p_empty);
    h.n_domain_iters = cfg.value("domain_iters", h.n_domain_iters);
    h.max_items = cfg.value("max_items", h.max_items);
    h.n_homo_iters = cfg.value("homo_iters", h.n_homo_iters);

    c.chains = cfg.value("chains", 1);
    c.warmup = cfg.value("warmup", 1000L);
    c.main = cfg.value("main", 5000L);
    if (cfg.contains("seed")) c.seed = cfg["seed"].get<std::uint64_t>();
    else if (auto s = env_seed()) c.seed = *s;
    c.seed_style = parse_seed_style(cfg.value("seed_style", std::string("default")));
    c.collapsed_class_update = cfg.value("collapsed", false);
    c.thin = cfg.value("thin", 1);
    c.store_loglik = cfg.value("store_loglik", true);
    c.audit = cfg.value("audit", false);
    if (cfg.contains("initial_structure"))
      c.initial_structure = structure_from_json(cfg["initial_structure"], J, 0);
    if (cfg.contains("fixed_structure")) c.fixed_structure = structure_from_json(cfg["fixed_structure"], J, 0);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::config_invalid, e.what());
  } catch (const std::invalid_argument& e) {
    throw Error(ErrorCode::config_invalid, e.what());
  }
  if (c.fixed_structure) {
    const int D = c.hyper.D > 0 ? c.hyper.D : std::max(J, J * J - 1);
    std::vector<Partition> parts;
    for (int k = 0; k < c.fixed_structure->classes(); ++k) parts.push_back(c.fixed_structure->partition(k));
    c.fixed_structure = DomainStructure::from_partitions(parts, J, c.classes, D, c.mode, c.equivalence);
  }
  validate_config(c, data);
  return c;
}

json write_diagnostics(const std::string& out_dir, const std::vector<ChainRecord>& records,
                       const std::optional<DomainStructure>& truth, long warmup_cut, int top) {
  fs::create_directories(out_dir);
  FitSummary s = summarize(records);
  auto modes = structure_mode(records, warmup_cut);
  if (!modes.empty()) {
    s.mode_structure = modes.front().structure;
    s.mode_share = modes.front().share;
  }
  json j = summary_to_json(s);
  j["chains"] = records.size();
  json acc = json::array();
  for (const auto& r : records) acc.push_back(acceptance_to_json(r.stats));
  j["acceptance"] = acc;
  if (truth && !modes.empty()) {
    j["mode_matches_truth"] = structures_match(modes.front().structure, *truth);
    json hits = json::array();
    for (const auto& r : records) {
      auto h = first_hit(r, *truth);
      hits.push_back(h ? json(*h) : json(nullptr));
    }
    j["first_hit"] = hits;
  }
  write_text(out_dir + "/summary.json", j.dump(2) + "\n");
  std::ostringstream csv;
  csv << "rank,share,count,structure\n";
  for (int k = 0; k < static_cast<int>(modes.size()) && k < top; ++k) {
    std::string sj = structure_to_json(modes[k].structure).dump();
    std::string quoted;
    for (char ch : sj) quoted += ch == '"' ? std::string("\"\"") : std::string(1, ch);
    csv << k + 1 << ',' << modes[k].share << ',' << modes[k].count << ",\"" << quoted << "\"\n";
  }
  write_text(out_dir + "/structures_top.csv", csv.str());
  return j;
}

double CellReport::mode_acc() const {
  int ok = 0, hit = 0;
  for (const auto& r : reps)
    if (r.ok) {
      ++ok;
      hit += r.mode_correct;
    }
  return ok ? 100.0 * hit / ok : 0.0;
}

std::optional<double> CellReport::first_hit_median() const {
  std::vector<double> v;
  for (const auto& r : reps)
    if (r.ok && r.first_hit) v.push_back(static_cast<double>(*r.first_hit));
  if (v.empty()) return std::nullopt;
  std::sort(v.begin(), v.end());
  const size_t m = v.size();
  return m % 2 ? v[m / 2] : 0.5 * (v[m / 2 - 1] + v[m / 2]);
}

double CellReport::waic_mean() const {
  double s = 0;
  int k = 0;
  for (const auto& r : reps)
    if (r.ok) {
      s += r.waic;
      ++k;
    }
  return k ? s / k : 0.0;
}

int CellReport::errors() const {
  int e = 0;
  for (const auto& r : reps) e += !r.ok;
  return e;
}

namespace {

json result_to_json(const ReplicateResult& r) {
  return {{"replicate", r.replicate}, {"ok", r.ok}, {"error", r.error},
          {"mode_correct", r.mode_correct}, {"first_hit", r.first_hit ? json(*r.first_hit) : json(nullptr)},
          {"mode_share", r.mode_share}, {"waic", r.waic}, {"lppd", r.lppd}, {"seconds", r.seconds}};
}

ReplicateResult result_from_json(const json& j) {
  ReplicateResult r;
  r.replicate = j.at("replicate").get<int>();
  r.ok = j.at("ok").get<bool>();
  r.error = j.value("error", std::string());
  r.mode_correct = j.at("mode_correct").get<bool>();
  if (!j.at("first_hit").is_null()) r.first_hit = j.at("first_hit").get<long>();
  r.mode_share = j.at("mode_share").get<double>();
  r.waic = j.at("waic").get<double>();
  r.lppd = j.at("lppd").get<double>();
  r.seconds = j.at("seconds").get<double>();
  return r;
}

struct CellSpec {
  json cfg;  // fit config for the cell
  std::string data, model, prior, seed_style;
  int n = 0;
  int classes = 2;
  int replicates = 1;
  std::string dir;
};

std::vector<CellSpec> expand_plan(const json& plan, const std::string& root) {
  std::vector<json> cells;
  if (plan.contains("cells"))
    for (const auto& c : plan["cells"]) cells.push_back(c);
  if (plan.contains("grid")) {
    const json& g = plan["grid"];
    std::vector<json> acc{g.contains("base") ? g["base"] : json::object()};
    for (const char* key : {"data", "n", "model", "prior", "seed_style", "classes"}) {
      if (!g.contains(key)) continue;
      std::vector<json> next;
      for (const auto& a : acc)
        for (const auto& v : g[key]) {
          json b = a;
          b[key] = v;
          next.push_back(b);
        }
      acc = next;
    }
    cells.insert(cells.end(), acc.begin(), acc.end());
  }
  if (cells.empty()) throw Error(ErrorCode::config_invalid, "study plan has no cells");
  std::vector<CellSpec> out;
  for (const auto& c : cells) {
    CellSpec s;
    s.data = c.value("data", std::string("homogeneous"));
    s.n = c.value("n", 500);
    s.model = c.value("model", std::string("homogeneous"));
    s.prior = c.contains("prior") && c["prior"].is_string() ? c["prior"].get<std::string>()
              : c.contains("prior") ? c["prior"].value("kind", std::string("bucket"))
                                    : std::string("bucket");
    s.seed_style = c.value("seed_style", std::string("default"));
    s.classes = c.value("classes", 2);
    s.replicates = c.value("replicates", plan.value("replicates", 1));
    s.cfg = plan.value("defaults", json::object());
    for (auto it = c.begin(); it != c.end(); ++it)
      if (it.key() != "data" && it.key() != "n" && it.key() != "replicates" && it.key() != "config")
        s.cfg[it.key()] = it.value();
    if (c.contains("config"))
      for (auto it = c["config"].begin(); it != c["config"].end(); ++it) s.cfg[it.key()] = it.value();
    if (s.seed_style == "bad") s.cfg["seed_style"] = "default";
    s.cfg["store_loglik"] = false;
    s.cfg["thin"] = 0;
    s.cfg["chains"] = 1;
    std::ostringstream name;
    name << s.data << "_n" << s.n << '_' << s.model << '_' << s.prior << '_' << s.seed_style << "_C" << s.classes;
    s.dir = root + "/" + name.str();
    parse_scenario(s.data);
    out.push_back(std::move(s));
  }
  return out;
}

ReplicateResult run_replicate(const CellSpec& cell, int r, std::uint64_t root_seed) {
  ReplicateResult res;
  res.replicate = r;
  const std::string dir = cell.dir + "/rep_" + std::to_string(r);
  const std::string result_path = dir + "/result.json";
  if (fs::exists(result_path)) return result_from_json(read_json(result_path));
  const auto t0 = std::chrono::steady_clock::now();
  try {
    const Scenario sc = parse_scenario(cell.data);
    const Truth truth = build_truth(sc);
    const std::uint64_t data_seed =
        derive_seed(derive_seed(root_seed, fnv1a("data|" + cell.data + "|" + std::to_string(cell.n))), r);
    const SimulatedData sim = generate(truth, cell.n, data_seed);
    json cfg = cell.cfg;
    cfg["classes"] = cell.classes;
    cfg["seed"] = derive_seed(derive_seed(root_seed, fnv1a(cell.dir.substr(cell.dir.find_last_of('/') + 1))), r);
    SamplerConfig sc_cfg = config_from_json(cfg, sim.data);
    if (cell.seed_style == "bad") {
      sc_cfg.initial_structure = bad_seed_structure();
      validate_config(sc_cfg, sim.data);
    }
    ChainRecord rec = run_chain(sim.data, sc_cfg, sc_cfg.seed);
    write_record(dir, rec, cfg, false);
    auto modes = structure_mode(rec);
    res.ok = true;
    if (!modes.empty()) {
      res.mode_correct = structures_match(modes.front().structure, truth.structure);
      res.mode_share = modes.front().share;
    }
    res.first_hit = first_hit(rec, truth.structure);
    if (rec.pointwise.draws() > 0) {
      res.lppd = rec.pointwise.lppd();
      res.waic = rec.pointwise.waic();
    }
  } catch (const std::exception& e) {
    res.ok = false;
    res.error = e.what();
  }
  res.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (res.ok) {
    fs::create_directories(dir);
    write_text(result_path, result_to_json(res).dump(2) + "\n");
  }
  return res;
}

}  // namespace

std::vector<CellReport> run_study(const json& plan, int jobs, std::ostream& log) {
  const std::string root = plan.value("output", std::string("study_out"));
  std::uint64_t seed = 0;
  if (plan.contains("seed")) seed = plan["seed"].get<std::uint64_t>();
  else if (auto s = env_seed()) seed = *s;
  const auto cells = expand_plan(plan, root);
  fs::create_directories(root);

  std::vector<CellReport> reports(cells.size());
  std::vector<std::pair<size_t, int>> tasks;
  for (size_t k = 0; k < cells.size(); ++k) {
    reports[k].data = cells[k].data;
    reports[k].model = cells[k].model;
    reports[k].prior = cells[k].prior;
    reports[k].seed_style = cells[k].seed_style;
    reports[k].n = cells[k].n;
    reports[k].classes = cells[k].classes;
    reports[k].dir = cells[k].dir;
    reports[k].reps.resize(cells[k].replicates);
    for (int r = 0; r < cells[k].replicates; ++r) tasks.emplace_back(k, r);
  }
  if (jobs <= 0) jobs = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  std::mutex mu;
  size_t next = 0;
  auto worker = [&] {
    for (;;) {
      size_t t;
      {
        std::lock_guard<std::mutex> lock(mu);
        if (next >= tasks.size()) return;
        t = next++;
      }
      auto [k, r] = tasks[t];
      ReplicateResult res = run_replicate(cells[k], r, seed);
      std::lock_guard<std::mutex> lock(mu);
      reports[k].reps[r] = res;
      log << fs::path(cells[k].dir).filename().string() << " rep " << r << ": "
          << (res.ok ? (res.mode_correct ? "mode=truth" : "mode!=truth") : "error: " + res.error) << '\n';
    }
  };
  jobs = std::min<int>(jobs, static_cast<int>(std::max<size_t>(tasks.size(), 1)));
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < jobs; ++w) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  std::ofstream report(root + "/report.csv", std::ios::binary);
  write_report_csv(report, reports);
  return reports;
}

void write_report_csv(std::ostream& out, const std::vector<CellReport>& cells) {
  out << "data,model,prior,seed_style,n,mode_acc,first_hit_med,waic_mean\n";
  for (const auto& c : cells) {
    out << c.data << ',' << c.model << ',' << c.prior << ',' << c.seed_style << ',' << c.n << ',' << c.mode_acc()
        << ',';
    if (auto m = c.first_hit_median()) out << *m;
    else out << "NA";
    out << ',' << std::setprecision(10) << c.waic_mean() << std::setprecision(6) << '\n';
  }
}

namespace {

std::vector<ChainRecord> load_records(const std::string& root) {
  std::vector<ChainRecord> out;
  if (fs::exists(root + "/meta.json")) {
    out.push_back(read_record(root));
    return out;
  }
  std::vector<std::string> dirs;
  if (fs::is_directory(root))
    for (const auto& e : fs::directory_iterator(root))
      if (e.is_directory() && fs::exists(e.path() / "meta.json")) dirs.push_back(e.path().string());
  std::sort(dirs.begin(), dirs.end());
  for (const auto& d : dirs) out.push_back(read_record(d));
  if (out.empty()) throw Error(ErrorCode::io, "no chain records under " + root);
  return out;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Domain latent class models: simulate, fit, diagnose, replicate"};
  app.require_subcommand(1);

  auto* sim = app.add_subcommand("simulate", "Draw a synthetic dataset from a built-in scenario");
  std::string scenario;
  int sim_n = 0;
  std::uint64_t sim_seed = 0;
  std::string sim_out = ".";
  sim->add_option("--scenario", scenario, "traditional, homogeneous, homogeneous_bad or heterogeneous")->required();
  sim->add_option("--n", sim_n, "Sample size")->required()->check(CLI::NonNegativeNumber);
  auto* sim_seed_opt = sim->add_option("--seed", sim_seed, "Random seed (falls back to DLCM_SEED)");
  sim->add_option("--out", sim_out, "Output directory");

  auto* fit = app.add_subcommand("fit", "Fit a model to a CSV dataset");
  std::string data_path, config_path, fit_out = "fit_out";
  int jobs = 0;
  fit->add_option("--data", data_path, "CSV with a header row of item names")->required();
  fit->add_option("--config", config_path, "JSON config; flags override it");
  fit->add_option("--out", fit_out, "Output directory");
  fit->add_option("--jobs", jobs, "Concurrent chains (0 = all cores)");
  std::map<std::string, std::string> flag_values;
  struct Flag {
    const char* name;
    const char* key;
    const char* help;
  };
  const std::vector<Flag> flags = {
      {"--classes", "classes", "Number of latent classes"},
      {"--model", "model", "traditional, homogeneous, heterogeneous or partial"},
      {"--E", "E", "Class groups for partial mode, e.g. 0,0,1"},
      {"--prior", "prior.kind", "uniform, bucket or pattern_adjusted"},
      {"--D", "prior.D", "Domain slots"},
      {"--q", "prior.q", "Pick D from the simplicity ratio q"},
      {"--alpha-theta", "alpha_theta", "Dirichlet concentration for theta"},
      {"--alpha-c", "alpha_c", "Dirichlet concentration for pi, one value or a list"},
      {"--p-empty", "p_empty", "Chance of proposing an empty second domain"},
      {"--domain-iters", "domain_iters", "Structure proposals per sweep"},
      {"--max-items", "max_items", "Most items in one domain"},
      {"--homo-iters", "homo_iters", "Homogeneous warmup iterations"},
      {"--chains", "chains", "Number of chains"},
      {"--warmup", "warmup", "Warmup iterations"},
      {"--main", "main", "Main iterations"},
      {"--seed", "seed", "Root seed (falls back to DLCM_SEED)"},
      {"--seed-style", "seed_style", "default or random"},
      {"--thin", "thin", "Keep pi and theta every k-th main iteration"},
      {"--cardinalities", "cardinalities", "Categories per item, e.g. 2,2,3"},
  };
  for (const auto& f : flags) fit->add_option(f.name, flag_values[f.key], f.help);
  bool collapsed = false, no_loglik = false;
  fit->add_flag("--collapsed", collapsed, "Collapsed class update");
  fit->add_flag("--no-loglik", no_loglik, "Do not store per-subject log-likelihoods");

  auto* diag = app.add_subcommand("diagnose", "Summarize stored chains");
  std::string record_path, truth_path, diag_out;
  long warmup_cut = -1;
  diag->add_option("--record", record_path, "Fit output directory or a single chain directory")->required();
  diag->add_option("--truth", truth_path, "truth.json from simulate");
  diag->add_option("--warmup-cut", warmup_cut, "Iterations to drop (default: each chain's warmup)");
  diag->add_option("--out", diag_out, "Output directory (default: the record directory)");

  auto* rep = app.add_subcommand("replicate", "Run a simulation study plan");
  std::string plan_path;
  int rep_jobs = 0;
  rep->add_option("--plan", plan_path, "Study plan JSON")->required();
  rep->add_option("--jobs", rep_jobs, "Concurrent replicates (0 = all cores)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e, out, err);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (*sim) {
      if (!*sim_seed_opt) {
        if (auto s = env_seed()) sim_seed = *s;
      }
      const Scenario sc = parse_scenario(scenario);
      const Truth truth = build_truth(sc);
      const SimulatedData d = generate(truth, sim_n, sim_seed);
      fs::create_directories(sim_out);
      std::ostringstream csv;
      write_dataset_csv(csv, d.data);
      write_text(sim_out + "/data.csv", csv.str());
      json t = truth_to_json(truth, d.classes);
      t["scenario"] = scenario;
      t["n"] = sim_n;
      t["seed"] = sim_seed;
      write_text(sim_out + "/truth.json", t.dump(2) + "\n");
      out << "wrote " << sim_out << "/data.csv (" << sim_n << " x " << d.data.items() << ")\n";
      return 0;
    }
    if (*fit) {
      json cfg = config_path.empty() ? json::object() : read_json(config_path);
      for (const auto& f : flags) {
        if (fit->get_option(f.name)->count() == 0) continue;
        const std::string& v = flag_values[f.key];
        const std::string key = f.key;
        json value;
        if (key == "model" || key == "seed_style" || key == "prior.kind" || key == "E" || key == "alpha_c" ||
            key == "cardinalities") {
          value = v;
        } else {
          try {
            value = json::parse(v);
          } catch (const json::exception&) {
            err << "bad value for " << f.name << ": " << v << '\n';
            return 2;
          }
        }
        if (key.rfind("prior.", 0) == 0) {
          if (!cfg.contains("prior") || !cfg["prior"].is_object()) {
            json p = json::object();
            if (cfg.contains("prior") && cfg["prior"].is_string()) p["kind"] = cfg["prior"];
            cfg["prior"] = p;
          }
          cfg["prior"][key.substr(6)] = value;
          if (key == "prior.q") cfg["prior"].erase("D");
        } else {
          cfg[key] = value;
        }
      }
      if (collapsed) cfg["collapsed"] = true;
      if (no_loglik) cfg["store_loglik"] = false;

      IngestResult ingest;
      try {
        std::optional<std::vector<int>> q;
        if (cfg.contains("cardinalities")) q = parse_int_list(cfg["cardinalities"]);
        ingest = read_dataset_csv(data_path, q);
      } catch (const Error& e) {
        err << "dataset: " << e.what() << '\n';
        return 3;
      }
      for (const auto& w : ingest.warnings) err << "warning: " << w << '\n';
      SamplerConfig sc;
      try {
        sc = config_from_json(cfg, ingest.data);
      } catch (const Error& e) {
        err << "config: " << e.what() << '\n';
        return e.code() == ErrorCode::too_few_distinct_rows ? 3 : 2;
      }
      if (sc.seed_style == SeedStyle::centers && !sc.initial_classes) {
        // fail early with a data error instead of inside a worker
        Rng probe = make_rng(0);
        try {
          seed_classes_default(ingest.data, sc.classes, probe);
        } catch (const Error& e) {
          err << "dataset: " << e.what() << '\n';
          return 3;
        }
      }
      auto records = run_chains(ingest.data, sc, jobs);
      json echo = cfg;
      echo["seed"] = sc.seed;
      for (size_t k = 0; k < records.size(); ++k)
        write_record(fit_out + "/chain_" + std::to_string(k), records[k], echo);
      json summary = write_diagnostics(fit_out, records, std::nullopt);
      out << "wrote " << records.size() << " chain(s) to " << fit_out << "; WAIC " << summary["waic"] << '\n';
      return 0;
    }
    if (*diag) {
      auto records = load_records(record_path);
      std::optional<DomainStructure> truth;
      if (!truth_path.empty()) truth = truth_from_json(read_json(truth_path)).structure;
      if (truth) {
        std::vector<Partition> parts;
        for (int c = 0; c < truth->classes(); ++c) parts.push_back(truth->partition(c));
        truth = DomainStructure::from_partitions(parts, records.front().J, truth->classes(), records.front().D,
                                                 StructureMode::heterogeneous);
      }
      json summary = write_diagnostics(diag_out.empty() ? record_path : diag_out, records, truth, warmup_cut);
      out << summary.dump(2) << '\n';
      return 0;
    }
    if (*rep) {
      const json plan = read_json(plan_path);
      auto cells = run_study(plan, rep_jobs, err);
      write_report_csv(out, cells);
      int failed = 0;
      for (const auto& c : cells) failed += c.errors();
      return failed ? 4 : 0;
    }
  } catch (const Error& e) {
    err << e.what() << '\n';
    return exit_code(e.code());
  } catch (const std::exception& e) {
    err << e.what() << '\n';
    return 4;
  }
  return 0;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::vector<const char*> argv{"dlcm"};
  for (const auto& a : args) argv.push_back(a.c_str());
  return run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace dlcm
