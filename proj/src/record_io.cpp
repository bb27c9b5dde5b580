// Apache License, Version 2.0, refer to LICENSE.txt
#include "dlcm/record_io.hpp"

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <set>
#include <sstream>

#include "dlcm/error.hpp"

namespace dlcm {

namespace fs = std::filesystem;

json structure_to_json(const DomainStructure& s) {
  json classes = json::array();
  for (int c = 0; c < s.classes(); ++c) classes.push_back({{"class", c}, {"domains", s.partition(c)}});
  return {{"mode", to_string(s.mode())}, {"E", s.equivalence()}, {"classes", classes}};
}

DomainStructure structure_from_json(const json& j, int items, int slots) {
  try {
    const StructureMode mode = parse_mode(j.at("mode").get<std::string>());
    std::vector<int> E = j.contains("E") ? j.at("E").get<std::vector<int>>() : std::vector<int>{};
    std::vector<Partition> parts;
    for (const auto& c : j.at("classes")) parts.push_back(c.at("domains").get<Partition>());
    if (items <= 0) {
      items = 0;
      for (const auto& b : parts.front()) items += static_cast<int>(b.size());
    }
    if (slots <= 0) slots = items * items - 1 < items ? items : items * items - 1;
    return DomainStructure::from_partitions(parts, items, static_cast<int>(parts.size()), slots, mode, E);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::config_invalid, std::string("malformed structure: ") + e.what());
  }
}

json params_to_json(const ModelParams& p) {
  json th = json::array();
  for (const auto& [k, v] : p.theta) th.push_back({{"class", k.cls}, {"domain", k.domain}, {"theta", v}});
  return {{"pi", p.pi}, {"theta", th}};
}

ModelParams params_from_json(const json& j) {
  ModelParams p;
  p.pi = j.at("pi").get<std::vector<double>>();
  for (const auto& e : j.at("theta"))
    p.theta[{e.at("class").get<int>(), e.at("domain").get<int>()}] = e.at("theta").get<std::vector<double>>();
  return p;
}

json truth_to_json(const Truth& t, const std::vector<int>& classes) {
  json j = {{"cardinalities", t.cardinalities},
            {"structure", structure_to_json(t.structure)},
            {"params", params_to_json(t.params)}};
  if (!classes.empty()) j["classes"] = classes;
  return j;
}

Truth truth_from_json(const json& j) {
  Truth t;
  t.cardinalities = j.at("cardinalities").get<std::vector<int>>();
  t.structure = structure_from_json(j.at("structure"), static_cast<int>(t.cardinalities.size()), 0);
  t.params = params_from_json(j.at("params"));
  return t;
}

json acceptance_to_json(const AcceptanceStats& s) {
  return {{"proposed", s.proposed},
          {"accepted", s.accepted},
          {"rejected_identifiability", s.rejected_identifiability},
          {"rejected_mh", s.rejected_mh},
          {"no_valid", s.no_valid},
          {"acceptance_rate", s.proposed ? static_cast<double>(s.accepted) / s.proposed : 0.0}};
}

json summary_to_json(const FitSummary& s) {
  json j = {{"lppd", s.lppd},
            {"waic_penalty", s.waic_penalty},
            {"waic", s.waic},
            {"n_eff_iters", s.n_eff_iters},
            {"mode_structure", structure_to_json(s.mode_structure)},
            {"mode_share", s.mode_share}};
  j["psrf"] = s.psrf ? json(*s.psrf) : json(nullptr);
  return j;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::io, "cannot write " + path);
  out << text;
}

json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io, "cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::config_invalid, path + ": " + e.what());
  }
}

namespace {

DomainStructure columns_to_structure(const ChainRecord& rec, const std::vector<int>& cols) {
  DomainStructure s(rec.J, rec.C, rec.D, StructureMode::heterogeneous);
  for (int c = 0; c < rec.C; ++c) s.set_column(c, std::span<const int>(cols.data() + static_cast<long>(c) * rec.J, rec.J));
  try {
    s.set_mode(rec.mode, rec.equivalence);
  } catch (const Error&) {
  }
  return s;
}

std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

}  // namespace

void write_record(const std::string& dir, const ChainRecord& rec, const json& config_echo, bool with_params) {
  fs::create_directories(dir);
  json meta = {{"seed", rec.seed},
               {"J", rec.J},
               {"C", rec.C},
               {"D", rec.D},
               {"mode", to_string(rec.mode)},
               {"E", rec.equivalence},
               {"cardinalities", rec.cardinalities},
               {"warmup", rec.warmup},
               {"main", rec.main},
               {"thin", rec.thin},
               {"fixed_structure", rec.fixed_structure},
               {"acceptance", acceptance_to_json(rec.stats)},
               {"loglik_stored", !rec.loglik.empty()}};
  if (!config_echo.is_null()) meta["config"] = config_echo;
  write_text(dir + "/meta.json", meta.dump(2) + "\n");

  {
    std::ofstream out(dir + "/structures.jsonl", std::ios::binary);
    if (!out) throw Error(ErrorCode::io, "cannot write structures.jsonl");
    for (long t = 0; t < rec.iterations(); ++t) {
      json line = {{"iteration", t + 1},
                   {"loglik", rec.total_loglik[t]},
                   {"structure", structure_to_json(columns_to_structure(rec, rec.structures[t]))}};
      out << line.dump() << '\n';
    }
  }
  if (with_params) {
    std::set<DomainKey> keys;
    std::map<DomainKey, size_t> width;
    for (const auto& p : rec.draws)
      for (const auto& [k, v] : p.theta) {
        keys.insert(k);
        width[k] = std::max(width[k], v.size());
      }
    std::ofstream out(dir + "/params.csv", std::ios::binary);
    if (!out) throw Error(ErrorCode::io, "cannot write params.csv");
    out << "iteration";
    for (int c = 0; c < rec.C; ++c) out << ",pi_" << c;
    for (const auto& k : keys)
      for (size_t r = 0; r < width[k]; ++r) out << ",theta_" << k.cls << '_' << k.domain << '_' << r;
    out << '\n';
    for (size_t t = 0; t < rec.draws.size(); ++t) {
      const auto& p = rec.draws[t];
      out << rec.draw_iterations[t];
      for (double v : p.pi) out << ',' << fmt(v);
      for (const auto& k : keys) {
        auto it = p.theta.find(k);
        for (size_t r = 0; r < width[k]; ++r) {
          out << ',';
          if (it != p.theta.end() && r < it->second.size()) out << fmt(it->second[r]);
        }
      }
      out << '\n';
    }
  }
  if (!rec.loglik.empty()) {
    std::ofstream out(dir + "/loglik.csv", std::ios::binary);
    if (!out) throw Error(ErrorCode::io, "cannot write loglik.csv");
    const size_t n = rec.loglik.front().size();
    out << "iteration";
    for (size_t i = 0; i < n; ++i) out << ",s" << i;
    out << '\n';
    for (size_t t = 0; t < rec.loglik.size(); ++t) {
      out << rec.warmup + static_cast<long>(t) + 1;
      for (double v : rec.loglik[t]) out << ',' << fmt(v);
      out << '\n';
    }
  }
}

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur.push_back(ch);
    }
  }
  out.push_back(cur);
  return out;
}

}  // namespace

ChainRecord read_record(const std::string& dir) {
  ChainRecord rec;
  const json meta = read_json(dir + "/meta.json");
  try {
    rec.seed = meta.at("seed").get<std::uint64_t>();
    rec.J = meta.at("J").get<int>();
    rec.C = meta.at("C").get<int>();
    rec.D = meta.at("D").get<int>();
    rec.mode = parse_mode(meta.at("mode").get<std::string>());
    rec.equivalence = meta.at("E").get<std::vector<int>>();
    rec.cardinalities = meta.at("cardinalities").get<std::vector<int>>();
    rec.warmup = meta.at("warmup").get<long>();
    rec.main = meta.at("main").get<long>();
    rec.thin = meta.at("thin").get<int>();
    rec.fixed_structure = meta.at("fixed_structure").get<bool>();
    const auto& a = meta.at("acceptance");
    rec.stats = {a.at("proposed").get<long>(), a.at("accepted").get<long>(),
                 a.at("rejected_identifiability").get<long>(), a.at("rejected_mh").get<long>(),
                 a.at("no_valid").get<long>()};
  } catch (const json::exception& e) {
    throw Error(ErrorCode::config_invalid, dir + "/meta.json: " + e.what());
  }
  {
    std::ifstream in(dir + "/structures.jsonl");
    if (!in) throw Error(ErrorCode::io, "cannot open " + dir + "/structures.jsonl");
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      const json j = json::parse(line);
      const auto s = structure_from_json(j.at("structure"), rec.J, rec.D);
      std::vector<int> cols;
      for (int c = 0; c < rec.C; ++c) {
        auto col = canonical_column(s.column(c));
        cols.insert(cols.end(), col.begin(), col.end());
      }
      rec.structures.push_back(std::move(cols));
      rec.total_loglik.push_back(j.at("loglik").get<double>());
    }
  }
  if (std::ifstream in(dir + "/params.csv"); in) {
    std::string line;
    std::getline(in, line);
    const auto header = split(line);
    struct Col {
      int kind;  // 0 pi, 1 theta
      int c, d, r;
    };
    std::vector<Col> cols;
    for (size_t k = 1; k < header.size(); ++k) {
      const std::string& h = header[k];
      if (h.rfind("pi_", 0) == 0) {
        cols.push_back({0, std::stoi(h.substr(3)), 0, 0});
      } else {
        int c = 0, d = 0, r = 0;
        std::sscanf(h.c_str(), "theta_%d_%d_%d", &c, &d, &r);
        cols.push_back({1, c, d, r});
      }
    }
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      const auto cells = split(line);
      ModelParams p;
      p.pi.assign(rec.C, 0.0);
      for (size_t k = 1; k < cells.size() && k - 1 < cols.size(); ++k) {
        if (cells[k].empty()) continue;
        const Col& col = cols[k - 1];
        const double v = std::stod(cells[k]);
        if (col.kind == 0) {
          p.pi[col.c] = v;
        } else {
          auto& th = p.theta[{col.c, col.d}];
          if (static_cast<int>(th.size()) <= col.r) th.resize(col.r + 1, 0.0);
          th[col.r] = v;
        }
      }
      rec.draw_iterations.push_back(std::stol(cells[0]));
      rec.draws.push_back(std::move(p));
    }
  }
  if (std::ifstream in(dir + "/loglik.csv"); in) {
    std::string line;
    std::getline(in, line);
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      const auto cells = split(line);
      std::vector<double> row;
      for (size_t k = 1; k < cells.size(); ++k) row.push_back(std::stod(cells[k]));
      rec.pointwise.add(row);
      rec.loglik.push_back(std::move(row));
    }
  }
  return rec;
}

}  // namespace dlcm
