// Apache License, Version 2.0, refer to LICENSE.txt
#include "dlcm/simgen.hpp"

#include <array>

#include "dlcm/encoding.hpp"
#include "dlcm/error.hpp"
#include "dlcm/rng.hpp"

namespace dlcm {

const char* to_string(Scenario s) {
  switch (s) {
    case Scenario::traditional: return "traditional";
    case Scenario::homogeneous: return "homogeneous";
    case Scenario::homogeneous_bad: return "homogeneous_bad";
    case Scenario::heterogeneous: return "heterogeneous";
    case Scenario::custom: return "custom";
  }
  return "?";
}

Scenario parse_scenario(const std::string& s) {
  if (s == "traditional") return Scenario::traditional;
  if (s == "homogeneous") return Scenario::homogeneous;
  if (s == "homogeneous_bad" || s == "homogeneous2") return Scenario::homogeneous_bad;
  if (s == "heterogeneous") return Scenario::heterogeneous;
  if (s == "custom") return Scenario::custom;
  throw Error(ErrorCode::config_invalid, "unknown scenario '" + s + "'");
}

namespace {

constexpr int kItems = 24;
constexpr int kSlots = kItems * kItems - 1;

// Assembles a truth from per-class domain lists. Items not listed are singletons
// with P(X=1) taken from `p_one[c][j]`.
struct Builder {
  int C;
  std::vector<std::vector<std::pair<std::vector<int>, std::vector<double>>>> domains;  // [c]
  std::vector<std::array<double, kItems>> p_one;

  Truth build() const {
    Truth t;
    t.cardinalities.assign(kItems, 2);
    t.params.pi.assign(C, 1.0 / C);
    std::vector<Partition> parts(C);
    for (int c = 0; c < C; ++c) {
      std::vector<char> used(kItems, 0);
      for (const auto& [items, th] : domains[c]) {
        parts[c].push_back(items);
        for (int j : items) used[j] = 1;
      }
      for (int j = 0; j < kItems; ++j)
        if (!used[j]) parts[c].push_back({j});
      std::sort(parts[c].begin(), parts[c].end());
    }
    t.structure = DomainStructure::from_partitions(parts, kItems, C, kSlots, StructureMode::heterogeneous);
    for (int c = 0; c < C; ++c) {
      for (size_t d = 0; d < parts[c].size(); ++d) {
        const auto& block = parts[c][d];
        std::vector<double> th;
        for (const auto& [items, table] : domains[c])
          if (items == block) th = table;
        if (th.empty()) th = {1.0 - p_one[c][block.front()], p_one[c][block.front()]};
        t.params.theta[{c, static_cast<int>(d)}] = th;
      }
    }
    return t;
  }
};

std::vector<double> normalized(std::vector<double> v) {
  double s = 0;
  for (double x : v) s += x;
  for (double& x : v) x /= s;
  return v;
}

Truth traditional_truth() {
  const double c0[6] = {0.2, 0.8, 0.2, 0.8, 0.2, 0.8};
  const double c1[6] = {0.8, 0.2, 0.5, 0.8, 0.2, 0.5};
  Builder b{2, {{}, {}}, {{}, {}}};
  for (int j = 0; j < kItems; ++j) {
    b.p_one[0][j] = c0[j % 6];
    b.p_one[1][j] = c1[j % 6];
  }
  auto t = b.build();
  t.structure.set_mode(StructureMode::homogeneous);
  return t;
}

void homogeneous_tail(Builder& b, int first) {
  // independent items after the dependent block, by position in a six-item cycle
  const double c0[6] = {0.8, 0.2, 0.8, 0.2, 0.8, 0.2};
  const double c1[6] = {0.2, 0.8, 0.5, 0.2, 0.8, 0.5};
  for (int j = first; j < kItems; ++j) {
    const int k = (j - first) % 6;
    b.p_one[0][j] = c0[k];
    b.p_one[1][j] = c1[k];
  }
}

Truth homogeneous_truth() {
  Builder b{2, {{}, {}}, {{}, {}}};
  // the class-1 table as printed sums to 0.98; it is rescaled
  b.domains[0].push_back({{0, 1, 2}, {0.30, 0.30, 0.02, 0.02, 0.02, 0.02, 0.02, 0.30}});
  b.domains[1].push_back({{0, 1, 2}, normalized({0.40, 0.03, 0.03, 0.03, 0.03, 0.03, 0.03, 0.40})});
  for (const std::vector<int>& pair : {std::vector<int>{3, 4}, std::vector<int>{5, 6}}) {
    b.domains[0].push_back({pair, {0.30, 0.05, 0.05, 0.60}});
    b.domains[1].push_back({pair, {0.60, 0.05, 0.05, 0.30}});
  }
  homogeneous_tail(b, 7);
  auto t = b.build();
  t.structure.set_mode(StructureMode::homogeneous);
  return t;
}

Truth homogeneous_bad_truth() {
  Builder b{2, {{}, {}}, {{}, {}}};
  // 16 patterns: all-zero and all-one carry most of the mass, as in the 3-item table
  std::vector<double> c0(16, 0.30 / 14), c1(16, 0.30 / 14);
  c0[0] = 0.30;
  c0[15] = 0.40;
  c1[0] = 0.40;
  c1[15] = 0.30;
  b.domains[0].push_back({{0, 1, 2, 3}, c0});
  b.domains[1].push_back({{0, 1, 2, 3}, c1});
  for (const std::vector<int>& pair : {std::vector<int>{4, 5}, std::vector<int>{6, 7}}) {
    b.domains[0].push_back({pair, {0.30, 0.05, 0.05, 0.60}});
    b.domains[1].push_back({pair, {0.60, 0.05, 0.05, 0.30}});
  }
  homogeneous_tail(b, 8);
  auto t = b.build();
  t.structure.set_mode(StructureMode::homogeneous);
  return t;
}

Truth heterogeneous_truth() {
  Builder b{2, {{}, {}}, {{}, {}}};
  const std::vector<double> triple = {0.02, 0.30, 0.30, 0.02, 0.30, 0.02, 0.02, 0.02};
  b.domains[0].push_back({{0, 1, 2}, triple});
  b.domains[0].push_back({{5, 6}, {0.30, 0.05, 0.05, 0.60}});
  b.domains[0].push_back({{7, 8}, {0.60, 0.05, 0.05, 0.30}});
  b.domains[1].push_back({{2, 3, 4}, triple});
  b.domains[1].push_back({{7, 8}, {0.30, 0.05, 0.05, 0.60}});
  const std::array<double, kItems> c0 = {0.36, 0.36, 0.36, 0.80, 0.20, 0.65, 0.65, 0.35, 0.35, 0.50, 0.20, 0.80,
                                         0.50, 0.20, 0.80, 0.50, 0.20, 0.80, 0.50, 0.20, 0.80, 0.50, 0.20, 0.80};
  const std::array<double, kItems> c1 = {0.80, 0.20, 0.36, 0.36, 0.36, 0.30, 0.30, 0.65, 0.65, 0.20, 0.80, 0.20,
                                         0.80, 0.20, 0.80, 0.20, 0.80, 0.20, 0.80, 0.20, 0.80, 0.20, 0.80, 0.20};
  b.p_one[0] = c0;
  b.p_one[1] = c1;
  return b.build();
}

}  // namespace

Truth build_truth(Scenario scenario) {
  switch (scenario) {
    case Scenario::traditional: return traditional_truth();
    case Scenario::homogeneous: return homogeneous_truth();
    case Scenario::homogeneous_bad: return homogeneous_bad_truth();
    case Scenario::heterogeneous: return heterogeneous_truth();
    case Scenario::custom: break;
  }
  throw Error(ErrorCode::config_invalid, "custom scenarios need an explicit truth");
}

DomainStructure bad_seed_structure() {
  Partition p{{0, 1, 8}, {2, 3, 9}};
  for (int j = 4; j < kItems; ++j)
    if (j != 8 && j != 9) p.push_back({j});
  auto out = DomainStructure::from_partitions({p}, kItems, 2, kSlots, StructureMode::homogeneous);
  return out;
}

SimulatedData generate(const Truth& truth, int n, std::uint64_t seed) {
  const DomainStructure& s = truth.structure;
  const int J = s.items(), C = s.classes();
  if (n < 0) throw Error(ErrorCode::config_invalid, "n must be nonnegative");
  Rng rng = make_rng(seed);
  SimulatedData out;
  out.data = Dataset{};
  out.data.rows = n;
  out.data.cardinalities = truth.cardinalities;
  for (int j = 0; j < J; ++j) out.data.item_names.push_back("Q" + std::to_string(j));
  out.data.responses.assign(static_cast<size_t>(n) * J, 0);
  out.classes.resize(n);

  struct Term {
    MappingVector mv;
    const std::vector<double>* theta;
  };
  std::vector<std::vector<Term>> terms(C);
  for (int c = 0; c < C; ++c) {
    auto col = s.column(c);
    for (int d : s.nonempty_domains(c)) {
      std::vector<int> items;
      for (int j = 0; j < J; ++j)
        if (col[j] == d) items.push_back(j);
      auto it = truth.params.theta.find({c, d});
      if (it == truth.params.theta.end()) throw Error(ErrorCode::dimension_mismatch, "truth lacks a theta");
      terms[c].push_back({MappingVector(items, truth.cardinalities), &it->second});
    }
  }
  for (int i = 0; i < n; ++i) {
    const int c = categorical(rng, truth.params.pi);
    out.classes[i] = c;
    int* row = out.data.responses.data() + static_cast<size_t>(i) * J;
    for (const auto& t : terms[c]) {
      const PatternId r = categorical(rng, *t.theta);
      const auto x = t.mv.decode(r);
      for (size_t k = 0; k < x.size(); ++k) row[t.mv.items()[k]] = x[k];
    }
  }
  return out;
}

SimulatedData generate(const GeneratorSpec& spec) {
  if (spec.scenario == Scenario::custom) return generate(spec.truth, spec.n, spec.seed);
  return generate(build_truth(spec.scenario), spec.n, spec.seed);
}

}  // namespace dlcm
