// Apache License, Version 2.0, refer to LICENSE.txt
// Runs every acceptance criterion and prints one PASS/FAIL line each.
// Usage: acceptance [output_dir] [--quick]
// --quick cuts replicate counts and chain lengths for smoke runs; its verdicts do
// not count.

#include <algorithm>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <functional>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "dlcm/cli.hpp"
#include "dlcm/identifiability.hpp"
#include "dlcm/priors.hpp"
#include "dlcm/sampler.hpp"
#include "oracles.hpp"

using namespace dlcm;
namespace fs = std::filesystem;

namespace {

struct Line {
  int id;
  std::string name;
  bool ok;
  std::string detail;
};

std::vector<Line> lines;

void report(int id, const std::string& name, bool ok, const std::string& detail) {
  lines.push_back({id, name, ok, detail});
  std::cout << (ok ? "PASS" : "FAIL") << "  criterion " << std::setw(2) << id << "  " << name << "  [" << detail
            << "]" << std::endl;
}

int count_correct(const CellReport& c) {
  int k = 0;
  for (const auto& r : c.reps) k += r.ok && r.mode_correct;
  return k;
}

int count_errors(const CellReport& c) { return c.errors(); }

double max_seconds(const CellReport& c) {
  double m = 0;
  for (const auto& r : c.reps) m = std::max(m, r.seconds);
  return m;
}

std::string fmt(double v, int prec = 2) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(prec) << v;
  return s.str();
}

struct Study {
  std::string root;
  bool quick;
  int reps(int full) const { return quick ? std::min(full, 3) : full; }
  long len(long full) const { return quick ? full / 10 : full; }

  // One cell, run (or resumed) under the shared output root.
  CellReport run(const std::string& data, int n, const std::string& model, const std::string& prior,
                 const std::string& seed_style, int replicates, nlohmann::json config) {
    nlohmann::json cell = {{"data", data},      {"n", n},
                           {"model", model},    {"prior", prior},
                           {"seed_style", seed_style}, {"replicates", replicates},
                           {"config", config}};
    nlohmann::json plan = {{"output", root}, {"seed", 20240601}, {"cells", nlohmann::json::array({cell})}};
    std::ostringstream log;
    auto cells = run_study(plan, 0, log);
    return cells.front();
  }

  nlohmann::json protocol(long warmup, long main) const {
    return {{"warmup", len(warmup)}, {"main", len(main)}};
  }
};

}  // namespace

int main(int argc, char** argv) {
  std::string out_dir = "acceptance_out";
  bool quick = false;
  for (int a = 1; a < argc; ++a) {
    if (std::strcmp(argv[a], "--quick") == 0) quick = true;
    else out_dir = argv[a];
  }
  // every run starts clean so nothing is resumed from older builds
  fs::remove_all(out_dir);
  fs::create_directories(out_dir);
  Study study{out_dir, quick};
  if (quick) std::cout << "quick mode: verdicts below are smoke checks only\n";

  // ---- recovery studies
  const int R = study.reps(20);
  CellReport homo = study.run("homogeneous", 500, "homogeneous", "bucket", "default", R, study.protocol(1000, 5000));
  CellReport trad = study.run("traditional", 500, "homogeneous", "pattern_adjusted", "default", R,
                              study.protocol(1000, 5000));
  CellReport unif = study.run("homogeneous", 500, "homogeneous", "uniform", "default", R, study.protocol(1000, 5000));
  nlohmann::json het_cfg = study.protocol(1300, 5000);
  het_cfg["homo_iters"] = quick ? 30 : 300;
  CellReport het = study.run("heterogeneous", 1000, "heterogeneous", "bucket", "default", R, het_cfg);
  CellReport rnd = study.run("homogeneous", 500, "homogeneous", "bucket", "random", R, study.protocol(1000, 5000));

  const int need17 = static_cast<int>(std::ceil(17.0 / 20 * R));
  {
    const int k = count_correct(homo);
    const double t500 = max_seconds(homo), t1000 = max_seconds(het);
    const bool ok = k >= need17 && count_errors(homo) == 0 && t500 <= 120 && t1000 <= 240;
    report(1, "homogeneous recovery, n=500, bucket", ok,
           std::to_string(k) + "/" + std::to_string(R) + " (need " + std::to_string(need17) +
               "); slowest replicate " + fmt(t500, 1) + " s at n=500 (limit 120), " + fmt(t1000, 1) +
               " s at n=1000 (limit 240)");
  }
  {
    auto med = homo.first_hit_median();
    int missing = 0;
    for (const auto& r : homo.reps) missing += !r.first_hit;
    // replicates that never hit the truth count as infinitely late
    std::vector<double> v;
    for (const auto& r : homo.reps) v.push_back(r.first_hit ? static_cast<double>(*r.first_hit) : INFINITY);
    std::sort(v.begin(), v.end());
    const double m = v.size() % 2 ? v[v.size() / 2] : 0.5 * (v[v.size() / 2 - 1] + v[v.size() / 2]);
    report(2, "median first hit of the truth", m <= 150,
           "median " + fmt(m, 1) + " iterations (limit 150); never hit: " + std::to_string(missing) +
               (med ? "; median over hits " + fmt(*med, 1) : std::string()));
  }
  {
    const int need = static_cast<int>(std::ceil(19.0 / 20 * R));
    const int k = count_correct(trad);
    report(3, "traditional data, pattern-adjusted prior", k >= need && count_errors(trad) == 0,
           std::to_string(k) + "/" + std::to_string(R) + " (need " + std::to_string(need) + ")");
  }
  {
    const int limit = static_cast<int>(std::floor(2.0 / 20 * R));
    const int k = count_correct(unif);
    report(4, "uniform prior control", k <= limit && count_errors(unif) == 0,
           std::to_string(k) + "/" + std::to_string(R) + " (at most " + std::to_string(limit) + ")");
  }
  {
    const int need = static_cast<int>(std::ceil(16.0 / 20 * R));
    const int k = count_correct(het);
    report(5, "heterogeneous recovery, n=1000", k >= need && count_errors(het) == 0,
           std::to_string(k) + "/" + std::to_string(R) + " (need " + std::to_string(need) + ")");
  }
  {
    const int k = count_correct(rnd);
    report(6, "random seeds, homogeneous recovery", k >= need17 && count_errors(rnd) == 0,
           std::to_string(k) + "/" + std::to_string(R) + " (need " + std::to_string(need17) + "); default seeds " +
               std::to_string(count_correct(homo)) + "/" + std::to_string(R));
  }

  // ---- exact computations
  {
    const int J = 20, D = 399;
    auto sizes = [&](std::vector<int> big) {
      int used = 0;
      for (int s : big) used += s;
      for (int k = used; k < J; ++k) big.push_back(1);
      return big;
    };
    auto column = [](const std::vector<int>& sz) {
      std::vector<int> col;
      for (int d = 0; d < static_cast<int>(sz.size()); ++d)
        for (int k = 0; k < sz[d]; ++k) col.push_back(d);
      return col;
    };
    const std::vector<std::vector<int>> listed = {{}, {2}, {3}, {2, 2}, {3, 2}, {2, 2, 2}, {4}};
    std::vector<double> mass;
    double total = 0;
    for (auto& b : listed) {
      mass.push_back(size_class_prior(sizes(b), J, D));
      total += mass.back();
    }
    const double want_pct[3] = {61.6, 30.8, 6.2};
    const double want_log[3] = {-0.48, -6.42, -12.37};
    const int row[3] = {0, 1, 3};
    const std::vector<int> Q(J, 2);
    bool ok = true;
    std::ostringstream d;
    for (int k = 0; k < 3; ++k) {
      const double pct = 100 * mass[row[k]] / total;
      const double lp = log_prior_class(column(sizes(listed[row[k]])), Q, {PriorKind::bucket, D, 1.0});
      ok &= std::abs(pct - want_pct[k]) <= 0.1 + 1e-9 && std::abs(lp - want_log[k]) <= 0.01;
      d << fmt(pct, 2) << "% / " << fmt(lp, 3) << (k < 2 ? "; " : "");
    }
    report(7, "twenty-item prior table", ok, d.str());
  }
  {
    double worst = 0;
    int cases = 0;
    for (double alpha : {1.0, 2.5})
      for (int a = 0; a <= 5; ++a)
        for (int b = 0; b <= 5; ++b) {
          std::vector<int> n2 = {a, b};
          const double q2 = oracle::dirichlet_moment_quadrature(n2, alpha);
          worst = std::max(worst, std::abs(std::exp(domain_log_marginal(n2, alpha)) - q2) / q2);
          ++cases;
          for (int c = 0; c <= 5; ++c) {
            std::vector<int> n3 = {a, b, c};
            const double q3 = oracle::dirichlet_moment_quadrature(n3, alpha);
            worst = std::max(worst, std::abs(std::exp(domain_log_marginal(n3, alpha)) - q3) / q3);
            ++cases;
          }
        }
    std::ostringstream d;
    d << cases << " binary/ternary count vectors, worst relative error " << std::scientific << std::setprecision(2)
      << worst;
    report(8, "domain marginal likelihood vs quadrature", worst <= 1e-8, d.str());
  }
  {
    double worst = 0;
    int cases = 0;
    for (int J = 1; J <= 4; ++J)
      for (int D = J; D <= 5; ++D) {
        oracle::BucketEnumeration e = oracle::enumerate_bucket(J, D);
        const std::vector<int> Q(J, 2);
        for (auto& [part, m] : e.partition_mass) {
          std::vector<int> col(J);
          for (int b = 0; b < static_cast<int>(part.size()); ++b)
            for (int j : part[b]) col[j] = b;
          worst = std::max(worst, std::abs(std::exp(log_prior_class(col, Q, {PriorKind::bucket, D, 1.0})) - m));
          ++cases;
        }
        for (auto& [sz, m] : e.size_class_mass) {
          worst = std::max(worst, std::abs(size_class_prior(sz, J, D) - m));
          ++cases;
        }
      }
    std::ostringstream d;
    d << cases << " masses, worst absolute error " << std::scientific << std::setprecision(2) << worst;
    report(9, "bucket prior vs enumeration", worst <= 1e-12, d.str());
  }
  {
    const long iters = quick ? 20000 : 100000;
    bool ok = true;
    std::ostringstream d;
    struct Case {
      int J, D, C;
      StructureMode mode;
    };
    // the stated case first; it admits only the singleton structure, so larger ones follow
    for (Case c : {Case{3, 3, 2, StructureMode::heterogeneous}, Case{3, 3, 2, StructureMode::homogeneous},
                   Case{4, 5, 2, StructureMode::homogeneous}, Case{4, 4, 2, StructureMode::heterogeneous},
                   Case{3, 3, 1, StructureMode::homogeneous}}) {
      auto r = oracle::prior_only_chi_squared(c.J, c.D, c.C, c.mode, iters, 77 + c.J * 10 + c.D);
      ok &= r.ok;
      d << "J" << c.J << "/D" << c.D << "/C" << c.C << '/' << to_string(c.mode) << ": " << r.detail << "; ";
    }
    report(10, "prior-only chain frequencies", ok, d.str());
  }
  {
    auto a = oracle::conjugacy_suite(101);
    auto b = oracle::collapsed_consistency_suite(202);
    report(11, "conjugacy and collapsed-consistency suites", a.ok && b.ok, a.detail + " | " + b.detail);
  }
  {
    DomainStructure s = DomainStructure::from_partitions(
        {{{0, 1}, {2, 3}, {4, 5}, {6}}, {{0}, {1, 2}, {3}, {4, 5}, {6}}}, 7, 2, 48, StructureMode::heterogeneous);
    PooledPartition p = pooled_domains(s, std::vector<int>(7, 2));
    const bool pooled_ok = p.blocks == std::vector<std::vector<int>>{{0, 1, 2, 3}, {4, 5}, {6}};
    DomainStructure one = DomainStructure::from_partitions({{{0, 1, 2, 3, 4}}}, 5, 2, 24, StructureMode::homogeneous);
    const bool one_rejected = !kruskal_identifiable(pooled_domains(one, std::vector<int>(5, 2)), 2);
    DomainStructure three(3, 2, 8, StructureMode::homogeneous);
    const bool three_ok = kruskal_identifiable(pooled_domains(three, std::vector<int>(3, 2)), 2);
    report(12, "identifiability cases", pooled_ok && one_rejected && three_ok,
           std::string("pooled example ") + (pooled_ok ? "ok" : "wrong") + ", one domain " +
               (one_rejected ? "rejected" : "accepted") + ", three singletons " + (three_ok ? "accepted" : "rejected"));
  }

  // ---- fit comparison on heterogeneous data; the heterogeneous cell resumes criterion 5's replicates
  {
    const int W = study.reps(10);
    nlohmann::json plain = study.protocol(1300, 5000);
    CellReport a = study.run("heterogeneous", 1000, "heterogeneous", "bucket", "default", W, het_cfg);
    CellReport b = study.run("heterogeneous", 1000, "homogeneous", "bucket", "default", W, plain);
    CellReport c = study.run("heterogeneous", 1000, "traditional", "bucket", "default", W, plain);
    const double wa = a.waic_mean(), wb = b.waic_mean(), wc = c.waic_mean();
    int ordered = 0;
    for (int r = 0; r < W; ++r) ordered += a.reps[r].waic < b.reps[r].waic && b.reps[r].waic < c.reps[r].waic;
    const bool ok = wa < wb && wb < wc && a.errors() + b.errors() + c.errors() == 0;
    report(13, "WAIC ordering on heterogeneous data", ok,
           "means " + fmt(wa, 1) + " < " + fmt(wb, 1) + " < " + fmt(wc, 1) + "; ordered in " + std::to_string(ordered) +
               "/" + std::to_string(W) + " replicates");
  }

  int failed = 0;
  for (const auto& l : lines) failed += !l.ok;
  std::cout << (failed ? "FAIL" : "PASS") << "  overall  " << lines.size() - failed << "/" << lines.size()
            << " criteria" << (quick ? " (quick mode)" : "") << std::endl;
  return failed ? 1 : 0;
}
