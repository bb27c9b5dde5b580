// Apache License, Version 2.0, refer to LICENSE.txt
#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <sstream>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include "dlcm/identifiability.hpp"
#include "dlcm/rng.hpp"
#include "dlcm/sampler.hpp"

namespace oracle {

namespace {

using boost::math::quadrature::gauss_kronrod;

double integrate01(const std::function<double(double)>& f, double a, double b) {
  return gauss_kronrod<double, 31>::integrate(f, a, b, 8, 1e-12);
}

// Copes with the non-smooth endpoints of t^(a-1) when a is not an integer.
double integrate_endpoints(const std::function<double(double)>& f, double a, double b) {
  static boost::math::quadrature::tanh_sinh<double> rule;
  return rule.integrate(f, a, b, 1e-12);
}

// First-appearance relabeling, kept separate from the library's version.
std::vector<int> relabel(const std::vector<int>& col) {
  std::map<int, int> m;
  std::vector<int> out(col.size());
  for (size_t j = 0; j < col.size(); ++j) {
    auto it = m.find(col[j]);
    if (it == m.end()) it = m.emplace(col[j], static_cast<int>(m.size())).first;
    out[j] = it->second;
  }
  return out;
}

struct Moments {
  double mean = 0, var = 0, m4 = 0;
};

Moments sample_moments(const std::vector<double>& v) {
  Moments m;
  for (double x : v) m.mean += x;
  m.mean /= static_cast<double>(v.size());
  for (double x : v) {
    const double d2 = (x - m.mean) * (x - m.mean);
    m.var += d2;
    m.m4 += d2 * d2;
  }
  m.var /= static_cast<double>(v.size() - 1);
  m.m4 /= static_cast<double>(v.size());
  return m;
}

// Compares draws of one Dirichlet coordinate with its exact mean and variance.
bool check_dirichlet_coordinate(const std::vector<double>& draws, double a_k, double a0, std::ostringstream& log,
                                const char* label) {
  const double mean = a_k / a0;
  const double var = a_k * (a0 - a_k) / (a0 * a0 * (a0 + 1));
  Moments m = sample_moments(draws);
  const double N = static_cast<double>(draws.size());
  // draws are independent, so plain standard errors; the variance one uses the fourth moment
  const double se = std::sqrt(var / N);
  const double se_var = std::sqrt(std::max(m.m4 - m.var * m.var, 0.0) / N);
  const bool ok = std::abs(m.mean - mean) <= 3 * se && std::abs(m.var - var) <= 3 * se_var;
  log << label << ": mean " << m.mean << " vs " << mean << ", var " << m.var << " vs " << var
      << (ok ? "" : " MISMATCH") << "; ";
  return ok;
}

dlcm::Dataset one_item_dataset(const std::vector<int>& codes, int Q) {
  dlcm::Dataset d;
  d.rows = static_cast<int>(codes.size());
  d.responses = codes;
  d.cardinalities = {Q};
  d.item_names = {"x0"};
  return d;
}

struct BatchMean {
  double mean = 0, se = 0;
};

BatchMean batch_mean(const std::vector<double>& series, int batches) {
  const size_t len = series.size() / batches;
  std::vector<double> means(batches, 0.0);
  for (int b = 0; b < batches; ++b) {
    for (size_t t = 0; t < len; ++t) means[b] += series[b * len + t];
    means[b] /= static_cast<double>(len);
  }
  Moments m = sample_moments(means);
  return {m.mean, std::sqrt(m.var / batches)};
}

}  // namespace

std::vector<std::vector<int>> set_partition_labels(int J) {
  std::vector<std::vector<int>> out;
  std::vector<int> a(J, 0);
  std::function<void(int, int)> rec = [&](int j, int used) {
    if (j == J) {
      out.push_back(a);
      return;
    }
    for (int v = 0; v <= used && v < J; ++v) {
      a[j] = v;
      rec(j + 1, std::max(used, v + 1));
    }
  };
  if (J == 0) return {{}};
  a[0] = 0;
  rec(1, 1);
  return out;
}

Partition to_partition(const std::vector<int>& labels) {
  std::map<int, std::vector<int>> by_label;
  for (int j = 0; j < static_cast<int>(labels.size()); ++j) by_label[labels[j]].push_back(j);
  Partition p;
  for (auto& [_, block] : by_label) p.push_back(block);
  std::sort(p.begin(), p.end());
  return p;
}

double dirichlet_moment_quadrature(const std::vector<int>& n, double a) {
  const int R = static_cast<int>(n.size());
  const double norm = std::exp(std::lgamma(R * a) - R * std::lgamma(a));
  auto w = [&](double t, int k) { return std::pow(std::max(t, 0.0), n[k] + a - 1); };
  if (R == 2) return norm * integrate_endpoints([&](double t) { return w(t, 0) * w(1 - t, 1); }, 0, 1);
  if (R != 3) throw std::invalid_argument("only two or three categories");
  auto outer = [&](double t1) {
    const double rest = 1 - t1;
    if (rest <= 0) return 0.0;
    auto inner = [&](double t2) { return w(t2, 1) * w(rest - t2, 2); };
    return w(t1, 0) * integrate_endpoints(inner, 0, rest);
  };
  return norm * integrate_endpoints(outer, 0, 1);
}

BucketEnumeration enumerate_bucket(int J, int D) {
  BucketEnumeration e;
  long total = 1;
  for (int j = 0; j < J; ++j) total *= D;
  std::vector<int> col(J, 0);
  for (long code = 0; code < total; ++code) {
    long c = code;
    for (int j = 0; j < J; ++j) {
      col[j] = static_cast<int>(c % D);
      c /= D;
    }
    Partition p = to_partition(col);
    e.partition_mass[p] += 1.0 / static_cast<double>(total);
    std::vector<int> sizes;
    for (auto& b : p) sizes.push_back(static_cast<int>(b.size()));
    std::sort(sizes.rbegin(), sizes.rend());
    e.size_class_mass[sizes] += 1.0 / static_cast<double>(total);
  }
  return e;
}

std::vector<std::vector<int>> closure_blocks(const dlcm::DomainStructure& s) {
  const int J = s.items();
  std::vector<std::vector<char>> reach(J, std::vector<char>(J, 0));
  for (int c = 0; c < s.classes(); ++c)
    for (int a = 0; a < J; ++a)
      for (int b = 0; b < J; ++b)
        if (s.domain(a, c) == s.domain(b, c)) reach[a][b] = 1;
  for (int k = 0; k < J; ++k)
    for (int a = 0; a < J; ++a)
      for (int b = 0; b < J; ++b)
        if (reach[a][k] && reach[k][b]) reach[a][b] = 1;
  std::vector<std::vector<int>> blocks;
  std::vector<char> seen(J, 0);
  for (int a = 0; a < J; ++a) {
    if (seen[a]) continue;
    std::vector<int> block;
    for (int b = 0; b < J; ++b)
      if (reach[a][b]) {
        block.push_back(b);
        seen[b] = 1;
      }
    blocks.push_back(block);
  }
  return blocks;
}

namespace {

std::vector<double> block_counts(const std::vector<std::vector<int>>& blocks, const std::vector<int>& Q) {
  std::vector<double> out;
  for (auto& b : blocks) {
    double k = 1;
    for (int j : b) k *= Q[j];
    out.push_back(k);
  }
  return out;
}

double score_of(const double kappa[3], int C) {
  double m = 0;
  for (int k = 0; k < 3; ++k) m += std::min(kappa[k], static_cast<double>(C));
  return m;
}

}  // namespace

bool greedy_identifiable(const std::vector<std::vector<int>>& blocks, const std::vector<int>& Q, int C) {
  std::vector<double> cnt = block_counts(blocks, Q);
  std::vector<int> order(blocks.size());
  std::iota(order.begin(), order.end(), 0);
  auto smallest = [&](int b) { return *std::min_element(blocks[b].begin(), blocks[b].end()); };
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (cnt[a] != cnt[b]) return cnt[a] > cnt[b];
    return smallest(a) < smallest(b);
  });
  double kappa[3] = {1, 1, 1};
  for (int b : order) {
    int best = 0;
    double best_gain = -1;
    for (int k = 0; k < 3; ++k) {
      const double gain = std::min(kappa[k] * cnt[b], double(C)) - std::min(kappa[k], double(C));
      if (gain > best_gain) {
        best_gain = gain;
        best = k;
      }
    }
    kappa[best] *= cnt[b];
  }
  return score_of(kappa, C) >= 2 * C + 2;
}

int exhaustive_kruskal_score(const std::vector<std::vector<int>>& blocks, const std::vector<int>& Q, int C) {
  std::vector<double> cnt = block_counts(blocks, Q);
  const int B = static_cast<int>(blocks.size());
  long total = 1;
  for (int b = 0; b < B; ++b) total *= 3;
  double best = 0;
  for (long code = 0; code < total; ++code) {
    double kappa[3] = {1, 1, 1};
    long c = code;
    for (int b = 0; b < B; ++b) {
      kappa[c % 3] *= cnt[b];
      c /= 3;
    }
    best = std::max(best, score_of(kappa, C));
  }
  return static_cast<int>(best);
}

std::map<std::vector<int>, double> proposal_distribution(const std::vector<int>& column, int D, double p,
                                                         int max_items) {
  std::map<std::vector<int>, double> out;
  std::vector<int> sizes(D, 0);
  for (int d : column) ++sizes[d];
  std::vector<int> nonempty;
  int first_empty = -1;
  for (int d = 0; d < D; ++d) {
    if (sizes[d]) nonempty.push_back(d);
    else if (first_empty < 0) first_empty = d;
  }
  const int k = static_cast<int>(nonempty.size());
  const std::vector<int> old = relabel(column);
  for (int d1 : nonempty) {
    std::vector<std::pair<int, double>> targets;
    const bool may_split = sizes[d1] > 1 && first_empty >= 0;
    const double rest = may_split ? 1 - p : 1.0;
    if (may_split) targets.push_back({first_empty, p});
    if (k >= 2)
      for (int d2 : nonempty)
        if (d2 != d1) targets.push_back({d2, rest / (k - 1)});
    for (auto [d2, w] : targets) {
      std::vector<int> pool;
      for (int j = 0; j < static_cast<int>(column.size()); ++j)
        if (column[j] == d1 || column[j] == d2) pool.push_back(j);
      const int m = static_cast<int>(pool.size());
      std::map<std::vector<int>, int> hits;
      int valid = 0;
      for (long mask = 0; mask < (1L << m); ++mask) {
        std::vector<int> next = column;
        int a = 0;
        for (int t = 0; t < m; ++t) {
          const bool side = (mask >> t) & 1;
          next[pool[t]] = side ? d2 : d1;
          a += !side;
        }
        if (a > max_items || m - a > max_items) continue;
        std::vector<int> canon = relabel(next);
        if (canon == old) continue;
        ++valid;
        ++hits[canon];
      }
      for (auto& [canon, h] : hits) out[canon] += w / k * h / valid;
    }
  }
  return out;
}

double collapsed_joint_quadrature(int c0, int c1, int x0, int x1, const std::vector<double>& alpha_c,
                                  double alpha_theta) {
  const double a0 = alpha_c[0], a1 = alpha_c[1];
  const double pi_norm = std::exp(std::lgamma(a0 + a1) - std::lgamma(a0) - std::lgamma(a1));
  auto pi_part = [&](double t) {
    double v = pi_norm * std::pow(t, a0 - 1) * std::pow(1 - t, a1 - 1);
    v *= c0 == 0 ? t : 1 - t;
    v *= c1 == 0 ? t : 1 - t;
    return v;
  };
  double result = integrate01(pi_part, 0, 1);
  const double th_norm = std::exp(std::lgamma(2 * alpha_theta) - 2 * std::lgamma(alpha_theta));
  for (int c = 0; c < 2; ++c) {
    auto th_part = [&](double t) {
      double v = th_norm * std::pow(t, alpha_theta - 1) * std::pow(1 - t, alpha_theta - 1);
      if (c0 == c) v *= x0 == 1 ? t : 1 - t;
      if (c1 == c) v *= x1 == 1 ? t : 1 - t;
      return v;
    };
    result *= integrate01(th_part, 0, 1);
  }
  return result;
}

double chi_squared_p(double stat, int dof) {
  if (dof <= 0) return 1.0;
  boost::math::chi_squared dist(dof);
  return boost::math::cdf(boost::math::complement(dist, stat));
}

double normal_two_sided_p(double z) { return std::erfc(std::abs(z) / std::sqrt(2.0)); }

CheckResult prior_only_chi_squared(int J, int D, int C, dlcm::StructureMode mode, long iterations,
                                   std::uint64_t seed) {
  using namespace dlcm;
  const std::vector<int> Q(J, 2);
  const BucketEnumeration e = enumerate_bucket(J, D);
  const auto labels = set_partition_labels(J);

  // Target: bucket mass per class partition (one per group), restricted to admissible structures.
  std::map<std::vector<int>, double> target;
  const int free_classes = mode == StructureMode::homogeneous ? 1 : C;
  std::vector<int> pick(free_classes, 0);
  const int P = static_cast<int>(labels.size());
  for (;;) {
    std::vector<Partition> parts;
    double w = 1;
    for (int g = 0; g < free_classes; ++g) {
      Partition p = to_partition(labels[pick[g]]);
      w *= e.partition_mass.at(p);
      parts.push_back(p);
    }
    DomainStructure s = DomainStructure::from_partitions(parts, J, C, D, mode);
    bool fits = true;
    for (auto& p : parts)
      for (auto& b : p) fits = fits && static_cast<int>(b.size()) <= 10;
    if (fits && (C == 1 || greedy_identifiable(closure_blocks(s), Q, C))) {
      std::vector<int> key;
      for (int c = 0; c < C; ++c) {
        const auto& l = labels[pick[mode == StructureMode::homogeneous ? 0 : c]];
        key.insert(key.end(), l.begin(), l.end());
      }
      target[key] += w;
    }
    int g = 0;
    while (g < free_classes && ++pick[g] == P) pick[g++] = 0;
    if (g == free_classes) break;
  }
  double z = 0;
  for (auto& [_, w] : target) z += w;
  for (auto& [_, w] : target) w /= z;

  Dataset data;
  data.cardinalities = Q;
  for (int j = 0; j < J; ++j) data.item_names.push_back("x" + std::to_string(j));
  SamplerConfig cfg;
  cfg.classes = C;
  cfg.mode = mode;
  cfg.hyper.D = D;
  cfg.hyper.n_homo_iters = 0;
  cfg.warmup = 2000;
  cfg.main = iterations;
  cfg.thin = 0;
  cfg.store_loglik = false;
  cfg.seed = seed;
  ChainRecord rec = run_chain(data, cfg, derive_seed(seed, 0));

  std::map<std::vector<int>, long> seen;
  for (long t = cfg.warmup; t < rec.iterations(); ++t) ++seen[rec.structures[t]];
  double stat = 0;
  bool outside = false;
  for (auto& [key, n] : seen)
    if (!target.count(key)) outside = true;
  for (auto& [key, w] : target) {
    const double expected = w * iterations;
    const double got = seen.count(key) ? static_cast<double>(seen[key]) : 0.0;
    stat += (got - expected) * (got - expected) / expected;
  }
  const int dof = static_cast<int>(target.size()) - 1;
  const double pval = chi_squared_p(stat, dof);
  std::ostringstream log;
  log << target.size() << " admissible structures, chi2 " << stat << " on " << dof << " dof, p " << pval;
  if (outside) log << ", visited a structure outside the admissible set";
  return {!outside && pval > 0.001, log.str()};
}

CheckResult conjugacy_suite(std::uint64_t seed) {
  using namespace dlcm;
  std::ostringstream log;
  bool ok = true;
  Rng rng = make_rng(seed);
  const int N = 50000;

  {  // binary theta, counts [8,2], alpha 1 -> Beta(9, 3)
    std::vector<int> codes(8, 0);
    codes.push_back(1);
    codes.push_back(1);
    Dataset d = one_item_dataset(codes, 2);
    Hyperparams h;
    h.resolve(1, 1);
    ChainState st(d, DomainStructure(1, 1, 1, StructureMode::homogeneous), std::vector<int>(10, 0), {1.0});
    std::vector<double> t0;
    for (int s = 0; s < N; ++s) {
      gibbs_theta(st, h, rng);
      t0.push_back(st.slots[0][0].theta[0]);
    }
    ok &= check_dirichlet_coordinate(t0, 9, 12, log, "theta[8,2]");
  }
  {  // ternary theta, counts [3,0,1], alpha 0.5
    Dataset d = one_item_dataset({0, 0, 2, 0}, 3);
    Hyperparams h;
    h.alpha_theta = 0.5;
    h.resolve(1, 1);
    ChainState st(d, DomainStructure(1, 1, 1, StructureMode::homogeneous), std::vector<int>(4, 0), {1.0});
    std::vector<std::vector<double>> t(3);
    for (int s = 0; s < N; ++s) {
      gibbs_theta(st, h, rng);
      for (int r = 0; r < 3; ++r) t[r].push_back(st.slots[0][0].theta[r]);
    }
    const double a[3] = {3.5, 0.5, 1.5};
    for (int r = 0; r < 3; ++r) ok &= check_dirichlet_coordinate(t[r], a[r], 5.5, log, "theta[3,0,1]");
  }
  {  // pi with class counts [70,30]
    std::vector<int> classes(100, 0);
    std::fill(classes.begin() + 70, classes.end(), 1);
    Dataset d = one_item_dataset(std::vector<int>(100, 0), 2);
    for (auto alpha : {std::vector<double>{1, 1}, std::vector<double>{2, 0.5}}) {
      Hyperparams h;
      h.alpha_c = alpha;
      h.resolve(1, 2);
      ChainState st(d, DomainStructure(1, 2, 1, StructureMode::homogeneous), classes, {0.5, 0.5});
      std::vector<double> p0;
      for (int s = 0; s < N; ++s) {
        gibbs_pi(st, h, rng);
        p0.push_back(st.pi[0]);
      }
      ok &= check_dirichlet_coordinate(p0, 70 + alpha[0], 100 + alpha[0] + alpha[1], log, "pi[70,30]");
    }
  }
  return {ok, log.str()};
}

CheckResult collapsed_consistency_suite(std::uint64_t seed) {
  using namespace dlcm;
  std::ostringstream log;
  bool ok = true;
  Rng rng = make_rng(seed);

  {  // Full-sweep transition on a two-subject, one-item toy against quadrature.
    Dataset d = one_item_dataset({1, 0}, 2);
    Hyperparams h;
    h.alpha_c = {1, 2};
    h.alpha_theta = 1.5;
    h.resolve(1, 2);
    auto cond = [&](int i, int other, int c) {
      double num = 0, den = 0;
      for (int k = 0; k < 2; ++k) {
        const double j = i == 0 ? collapsed_joint_quadrature(k, other, 1, 0, h.alpha_c, h.alpha_theta)
                                : collapsed_joint_quadrature(other, k, 1, 0, h.alpha_c, h.alpha_theta);
        den += j;
        if (k == c) num = j;
      }
      return num / den;
    };
    double worst_exact = 0, worst_mc = 0;
    bool mc_ok = true;
    const int sweeps = 100000;
    for (int s0 = 0; s0 < 2; ++s0)
      for (int s1 = 0; s1 < 2; ++s1) {
        ChainState st(d, DomainStructure(1, 2, 1, StructureMode::homogeneous), {s0, s1}, {0.5, 0.5});
        std::map<std::pair<int, int>, int> freq;
        for (int k = 0; k < sweeps; ++k) {
          st.classes = {s0, s1};
          st.recount();
          gibbs_classes(st, h, rng, true);
          ++freq[{st.classes[0], st.classes[1]}];
        }
        for (int n0 = 0; n0 < 2; ++n0)
          for (int n1 = 0; n1 < 2; ++n1) {
            const double truth = cond(0, s1, n0) * cond(1, n0, n1);
            st.classes = {s0, s1};
            st.recount();
            const double first = collapsed_class_probs(st, 0, h)[n0];
            st.classes = {n0, s1};
            st.recount();
            const double second = collapsed_class_probs(st, 1, h)[n1];
            worst_exact = std::max(worst_exact, std::abs(first * second - truth));
            const double f = freq[{n0, n1}] / static_cast<double>(sweeps);
            const double se = std::sqrt(truth * (1 - truth) / sweeps);
            worst_mc = std::max(worst_mc, std::abs(f - truth));
            if (std::abs(f - truth) > 4.5 * se) mc_ok = false;
          }
      }
    log << "transition vs quadrature: max error " << worst_exact << ", sampled max error " << worst_mc << "; ";
    ok &= worst_exact <= 1e-3 && mc_ok;
  }

  {  // Long-run occupancy with and without collapsing.
    const int n = 40, J = 5;
    Dataset d;
    d.rows = n;
    d.cardinalities.assign(J, 2);
    for (int j = 0; j < J; ++j) d.item_names.push_back("x" + std::to_string(j));
    Rng gen = make_rng(derive_seed(seed, 99));
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < J; ++j) d.responses.push_back(uniform01(gen) < (i % 2 ? 0.8 : 0.2) ? 1 : 0);
    Hyperparams h;
    h.resolve(J, 2);
    const long burn = 1000, T = 40000;
    std::vector<std::vector<double>> stats[2];
    for (int collapsed = 0; collapsed < 2; ++collapsed) {
      Rng r = make_rng(derive_seed(seed, 10 + collapsed));
      ChainState st(d, DomainStructure(J, 2, h.D, StructureMode::homogeneous), seed_classes_random(n, 2, r),
                    {0.5, 0.5});
      stats[collapsed].assign(3, {});
      for (long t = 0; t < burn + T; ++t) {
        gibbs_theta(st, h, r);
        gibbs_pi(st, h, r);
        gibbs_classes(st, h, r, collapsed == 1);
        if (t < burn) continue;
        stats[collapsed][0].push_back(std::max(st.class_counts[0], st.class_counts[1]) / double(n));
        stats[collapsed][1].push_back(st.classes[0] == st.classes[1]);
        stats[collapsed][2].push_back(st.classes[0] == st.classes[2]);
      }
    }
    const char* names[3] = {"larger class share", "subjects 0,1 together", "subjects 0,2 together"};
    for (int k = 0; k < 3; ++k) {
      BatchMean a = batch_mean(stats[0][k], 40), b = batch_mean(stats[1][k], 40);
      const double z = (a.mean - b.mean) / std::sqrt(a.se * a.se + b.se * b.se);
      const double p = normal_two_sided_p(z);
      log << names[k] << ": " << a.mean << " vs " << b.mean << " (p " << p << "); ";
      ok &= p > 0.001;
    }
  }
  return {ok, log.str()};
}

}  // namespace oracle
