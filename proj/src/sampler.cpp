// Apache License, Version 2.0, refer to LICENSE.txt
#include "dlcm/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <map>
#include <mutex>
#include <thread>

#include "dlcm/error.hpp"
#include "dlcm/identifiability.hpp"

namespace dlcm {

const char* to_string(SeedStyle s) { return s == SeedStyle::random ? "random" : "default"; }

SeedStyle parse_seed_style(const std::string& s) {
  if (s == "default" || s == "centers") return SeedStyle::centers;
  if (s == "random") return SeedStyle::random;
  throw Error(ErrorCode::config_invalid, "unknown seed style '" + s + "'");
}

namespace {

// Re-embeds a user structure into the configured slot count and grouping.
DomainStructure conform(const DomainStructure& s, int D, StructureMode mode, const std::vector<int>& E) {
  std::vector<Partition> parts;
  for (int c = 0; c < s.classes(); ++c) parts.push_back(s.partition(c));
  return DomainStructure::from_partitions(parts, s.items(), s.classes(), D, mode, E);
}

bool columns_identical(const DomainStructure& s) {
  for (int c = 1; c < s.classes(); ++c)
    if (s.partition(c) != s.partition(0)) return false;
  return true;
}

}  // namespace

void validate_config(SamplerConfig& cfg, const Dataset& data) {
  auto bad = [](const std::string& m) { throw Error(ErrorCode::config_invalid, m); };
  const int J = data.items();
  if (J < 1) bad("dataset has no items");
  if (cfg.classes < 1) bad("need at least one class");
  if (cfg.chains < 1) bad("need at least one chain");
  if (cfg.warmup < 0 || cfg.main < 0) bad("iteration counts must be nonnegative");
  if (cfg.thin < 0) bad("thin must be nonnegative");
  const int C = cfg.classes;
  cfg.hyper.resolve(J, C, cfg.warmup + cfg.main);
  cfg.hyper.validate(J, C);
  cfg.equivalence = normalize_equivalence(cfg.mode, cfg.equivalence, C);

  std::vector<int> q(data.cardinalities);
  for (int v : q)
    if (v < 2) bad("every item needs at least two categories");
  std::sort(q.rbegin(), q.rend());
  double biggest = 1;
  for (int k = 0; k < std::min(J, cfg.hyper.max_items); ++k) biggest *= q[k];
  if (biggest > static_cast<double>(1 << 26))
    bad("MaxItems allows domains with more than 2^26 patterns");

  if (cfg.fixed_structure) {
    if (cfg.fixed_structure->items() != J || cfg.fixed_structure->classes() != C)
      bad("fixed structure has the wrong shape");
    cfg.fixed_structure = conform(*cfg.fixed_structure, cfg.hyper.D, cfg.mode, cfg.equivalence);
    if (!admissible(*cfg.fixed_structure, data.cardinalities, cfg.hyper))
      bad("fixed structure is not admissible");
    cfg.hyper.n_homo_iters = 0;
  } else if (cfg.mode != StructureMode::homogeneous && cfg.warmup < cfg.hyper.n_homo_iters) {
    bad("warmup must cover the homogeneous warmup iterations");
  }
  if (cfg.initial_structure) {
    if (cfg.initial_structure->items() != J || cfg.initial_structure->classes() != C)
      bad("initial structure has the wrong shape");
    const bool homo_start = cfg.mode == StructureMode::homogeneous || cfg.hyper.n_homo_iters > 0;
    if (homo_start && !columns_identical(*cfg.initial_structure))
      bad("a homogeneous start needs one partition shared by all classes");
    cfg.initial_structure =
        conform(*cfg.initial_structure, cfg.hyper.D,
                homo_start ? StructureMode::homogeneous : cfg.mode, cfg.equivalence);
    if (!admissible(*cfg.initial_structure, data.cardinalities, cfg.hyper))
      bad("initial structure is not admissible");
  }
  if (cfg.initial_classes) {
    if (static_cast<int>(cfg.initial_classes->size()) != data.n()) bad("initial classes have the wrong length");
    for (int c : *cfg.initial_classes)
      if (c < 0 || c >= C) bad("initial class out of range");
  }
}

ChainState::ChainState(const Dataset& data, DomainStructure s, std::vector<int> cls, std::vector<double> p)
    : structure(std::move(s)), classes(std::move(cls)), pi(std::move(p)), data_(&data) {
  const int C = structure.classes(), D = structure.slots();
  if (static_cast<int>(classes.size()) != data.n())
    throw Error(ErrorCode::dimension_mismatch, "one class label per subject required");
  if (static_cast<int>(pi.size()) != C) throw Error(ErrorCode::dimension_mismatch, "pi length");
  slots.assign(C, std::vector<DomainSlot>(D));
  recount();
  for (int c = 0; c < C; ++c) {
    auto col = structure.column(c);
    std::vector<std::vector<int>> items(D);
    for (int j = 0; j < structure.items(); ++j) items[col[j]].push_back(j);
    for (int d = 0; d < D; ++d)
      if (!items[d].empty()) set_domain(c, d, std::move(items[d]));
  }
}

void ChainState::set_domain(int c, int d, std::vector<int> items) {
  DomainSlot& slot = slots[c][d];
  slot.items = std::move(items);
  slot.places.clear();
  slot.patterns = slot.items.empty() ? 0 : 1;
  for (int j : slot.items) {
    slot.places.push_back(slot.patterns);
    slot.patterns *= data_->cardinalities[j];
  }
  slot.counts.assign(slot.patterns, 0);
  slot.theta.assign(slot.patterns, slot.patterns ? 1.0 / slot.patterns : 0.0);
  slot.log_theta.assign(slot.patterns, slot.patterns ? -std::log(static_cast<double>(slot.patterns)) : 0.0);
  for (int i : members[c]) ++slot.counts[slot.pattern(data_->row(i))];
}

void ChainState::recount() {
  const int C = structure.classes();
  members.assign(C, {});
  class_counts.assign(C, 0);
  for (int i = 0; i < data_->n(); ++i) {
    members[classes[i]].push_back(i);
    ++class_counts[classes[i]];
  }
  for (int c = 0; c < C; ++c)
    for (auto& slot : slots[c]) {
      if (slot.empty()) continue;
      std::fill(slot.counts.begin(), slot.counts.end(), 0);
      for (int i : members[c]) ++slot.counts[slot.pattern(data_->row(i))];
    }
}

void ChainState::audit() const {
  auto fail = [](const std::string& m) { throw Error(ErrorCode::config_invalid, "count audit failed: " + m); };
  const int C = structure.classes(), D = structure.slots();
  std::vector<int> cc(C, 0);
  for (int c : classes) ++cc[c];
  if (cc != class_counts) fail("class occupancy");
  for (int c = 0; c < C; ++c) {
    if (static_cast<int>(members[c].size()) != cc[c]) fail("member lists");
    auto col = structure.column(c);
    for (int d = 0; d < D; ++d) {
      std::vector<int> items;
      for (int j = 0; j < structure.items(); ++j)
        if (col[j] == d) items.push_back(j);
      const DomainSlot& slot = slots[c][d];
      if (items != slot.items) fail("slot items differ from structure");
      if (slot.empty()) continue;
      std::vector<int> fresh(slot.patterns, 0);
      for (int i = 0; i < data_->n(); ++i)
        if (classes[i] == c) ++fresh[slot.pattern(data_->row(i))];
      if (fresh != slot.counts) fail("pattern counts");
    }
  }
}

ModelParams ChainState::params() const {
  ModelParams p;
  p.pi = pi;
  for (int c = 0; c < structure.classes(); ++c)
    for (int d = 0; d < structure.slots(); ++d)
      if (!slots[c][d].empty()) p.theta[{c, d}] = slots[c][d].theta;
  return p;
}

std::vector<int> ChainState::nonempty(int c) const {
  std::vector<int> out;
  for (int d = 0; d < structure.slots(); ++d)
    if (!slots[c][d].empty()) out.push_back(d);
  return out;
}

std::vector<int> seed_classes_default(const Dataset& data, int C, Rng& rng) {
  const int n = data.n(), J = data.items();
  std::vector<int> distinct;
  {
    std::map<std::vector<int>, int> seen;
    for (int i = 0; i < n; ++i) {
      auto r = data.row(i);
      if (seen.try_emplace(std::vector<int>(r.begin(), r.end()), i).second) distinct.push_back(i);
    }
  }
  if (static_cast<int>(distinct.size()) < C)
    throw Error(ErrorCode::too_few_distinct_rows,
                std::to_string(distinct.size()) + " distinct rows for " + std::to_string(C) + " classes");
  auto l1 = [&](int a, int b) {
    int s = 0;
    for (int j = 0; j < J; ++j) s += std::abs(data.at(a, j) - data.at(b, j));
    return s;
  };
  std::vector<int> centers{distinct[uniform_index(rng, static_cast<int>(distinct.size()))]};
  std::vector<int> nearest(distinct.size());
  for (size_t k = 0; k < distinct.size(); ++k) nearest[k] = l1(distinct[k], centers[0]);
  while (static_cast<int>(centers.size()) < C) {
    size_t best = 0;
    for (size_t k = 1; k < distinct.size(); ++k)
      if (nearest[k] > nearest[best]) best = k;
    centers.push_back(distinct[best]);
    for (size_t k = 0; k < distinct.size(); ++k) nearest[k] = std::min(nearest[k], l1(distinct[k], distinct[best]));
  }
  std::vector<int> out(n);
  for (int i = 0; i < n; ++i) {
    int best = 0, bd = l1(i, centers[0]);
    for (int c = 1; c < C; ++c) {
      int dd = l1(i, centers[c]);
      if (dd < bd) {
        bd = dd;
        best = c;
      }
    }
    out[i] = best;
  }
  return out;
}

std::vector<int> seed_classes_random(int n, int C, Rng& rng) {
  std::vector<int> out(n);
  for (int& c : out) c = uniform_index(rng, C);
  return out;
}

namespace {

// Uniform set partition of J items with blocks of at most K items.
Partition uniform_bounded_partition(int J, int K, Rng& rng) {
  // T[m] = number of such partitions of m items; doubles are fine for ratios
  std::vector<double> T(J + 1, 0.0);
  std::vector<std::vector<double>> binom(J + 1, std::vector<double>(J + 1, 0.0));
  for (int a = 0; a <= J; ++a) {
    binom[a][0] = 1;
    for (int b = 1; b <= a; ++b) binom[a][b] = binom[a - 1][b - 1] + (b < a ? binom[a - 1][b] : 0.0);
  }
  T[0] = 1;
  for (int m = 1; m <= J; ++m)
    for (int s = 1; s <= std::min(K, m); ++s) T[m] += binom[m - 1][s - 1] * T[m - s];
  std::vector<int> rest(J);
  for (int j = 0; j < J; ++j) rest[j] = j;
  Partition p;
  while (!rest.empty()) {
    const int m = static_cast<int>(rest.size());
    std::vector<double> w;
    for (int s = 1; s <= std::min(K, m); ++s) w.push_back(binom[m - 1][s - 1] * T[m - s]);
    const int s = categorical(rng, w) + 1;
    std::vector<int> block{rest[0]};
    std::vector<int> others(rest.begin() + 1, rest.end());
    for (int t = 0; t < s - 1; ++t) {
      int pick = t + uniform_index(rng, static_cast<int>(others.size()) - t);
      std::swap(others[t], others[pick]);
      block.push_back(others[t]);
    }
    std::sort(block.begin(), block.end());
    p.push_back(block);
    std::vector<int> next(others.begin() + (s - 1), others.end());
    std::sort(next.begin(), next.end());
    rest = std::move(next);
  }
  std::sort(p.begin(), p.end());
  return p;
}

}  // namespace

DomainStructure seed_structure_random(int J, int C, std::span<const int> cardinalities,
                                      const Hyperparams& hyper, StructureMode mode,
                                      std::vector<int> equivalence, Rng& rng) {
  const auto E = normalize_equivalence(mode, std::move(equivalence), C);
  int groups = 0;
  for (int e : E) groups = std::max(groups, e + 1);
  for (int attempt = 0; attempt < 100000; ++attempt) {
    std::vector<Partition> per_group;
    for (int g = 0; g < groups; ++g) per_group.push_back(uniform_bounded_partition(J, hyper.max_items, rng));
    std::vector<Partition> per_class;
    for (int c = 0; c < C; ++c) per_class.push_back(per_group[E[c]]);
    auto s = DomainStructure::from_partitions(per_class, J, C, hyper.D, mode, E);
    if (admissible(s, cardinalities, hyper)) return s;
  }
  throw Error(ErrorCode::config_invalid, "no admissible random structure found");
}

void gibbs_theta(ChainState& st, const Hyperparams& hyper, Rng& rng) {
  for (auto& per_class : st.slots)
    for (auto& slot : per_class) {
      if (slot.empty()) continue;
      dirichlet_counts(rng, hyper.alpha_theta, slot.counts, slot.theta);
      for (size_t r = 0; r < slot.theta.size(); ++r) slot.log_theta[r] = std::log(slot.theta[r]);
    }
}

void gibbs_pi(ChainState& st, const Hyperparams& hyper, Rng& rng) {
  const int C = st.structure.classes();
  std::vector<double> a(C);
  for (int c = 0; c < C; ++c) a[c] = hyper.alpha_c[c] + st.class_counts[c];
  dirichlet(rng, a, st.pi);
}

namespace {

struct ClassTerms {
  std::vector<std::vector<const DomainSlot*>> slots;  // nonempty slots per class
  explicit ClassTerms(const ChainState& st) : slots(st.structure.classes()) {
    for (int c = 0; c < st.structure.classes(); ++c)
      for (const auto& s : st.slots[c])
        if (!s.empty()) slots[c].push_back(&s);
  }
};

void class_log_weights(const ChainState& st, const ClassTerms& terms, std::span<const int> row,
                       std::vector<double>& lw) {
  const int C = st.structure.classes();
  lw.resize(C);
  for (int c = 0; c < C; ++c) {
    double s = std::log(st.pi[c]);
    for (const DomainSlot* slot : terms.slots[c]) s += slot->log_theta[slot->pattern(row)];
    lw[c] = s;
  }
}

void collapsed_log_weights(const ChainState& st, int i, const Hyperparams& hyper, std::vector<double>& lw) {
  const int C = st.structure.classes();
  const auto row = st.data().row(i);
  const int own = st.classes[i];
  lw.resize(C);
  for (int c = 0; c < C; ++c) {
    const int self = c == own;
    const double n = st.class_counts[c] - self;
    double s = std::log(n + hyper.alpha_c[c]);
    for (const auto& slot : st.slots[c]) {
      if (slot.empty()) continue;
      const double cnt = slot.counts[slot.pattern(row)] - self;
      s += std::log(cnt + hyper.alpha_theta) - std::log(n + slot.patterns * hyper.alpha_theta);
    }
    lw[c] = s;
  }
}

void subject_logliks(const ChainState& st, std::vector<double>& out) {
  ClassTerms terms(st);
  std::vector<double> lw;
  out.resize(st.data().n());
  for (int i = 0; i < st.data().n(); ++i) {
    class_log_weights(st, terms, st.data().row(i), lw);
    out[i] = log_sum_exp(lw);
  }
}

}  // namespace

std::vector<double> collapsed_class_probs(const ChainState& st, int i, const Hyperparams& hyper) {
  std::vector<double> lw;
  collapsed_log_weights(st, i, hyper, lw);
  const double z = log_sum_exp(lw);
  for (double& v : lw) v = std::exp(v - z);
  return lw;
}

void gibbs_classes(ChainState& st, const Hyperparams& hyper, Rng& rng, bool collapsed,
                   std::vector<double>* loglik_out) {
  const int n = st.data().n();
  std::vector<double> lw, scratch;
  if (!collapsed) {
    ClassTerms terms(st);
    if (loglik_out) loglik_out->resize(n);
    for (int i = 0; i < n; ++i) {
      class_log_weights(st, terms, st.data().row(i), lw);
      if (loglik_out) (*loglik_out)[i] = log_sum_exp(lw);
      st.classes[i] = categorical_log(rng, lw, scratch);
    }
    st.recount();
    return;
  }
  for (int i = 0; i < n; ++i) {
    collapsed_log_weights(st, i, hyper, lw);
    const int old = st.classes[i];
    const int fresh = categorical_log(rng, lw, scratch);
    if (fresh == old) continue;
    const auto row = st.data().row(i);
    for (auto& slot : st.slots[old])
      if (!slot.empty()) --slot.counts[slot.pattern(row)];
    for (auto& slot : st.slots[fresh])
      if (!slot.empty()) ++slot.counts[slot.pattern(row)];
    --st.class_counts[old];
    ++st.class_counts[fresh];
    st.classes[i] = fresh;
  }
  st.members.assign(st.structure.classes(), {});
  for (int i = 0; i < n; ++i) st.members[st.classes[i]].push_back(i);
}

namespace {

// lgamma(alpha + k) for integer k, filled lazily.
class LgammaTable {
 public:
  explicit LgammaTable(double alpha) : alpha_(alpha) {}
  double operator()(int k) {
    while (static_cast<int>(table_.size()) <= k) table_.push_back(std::lgamma(alpha_ + table_.size()));
    return table_[k];
  }

 private:
  double alpha_;
  std::vector<double> table_;
};

double fast_log_marginal(std::span<const int> counts, double alpha, LgammaTable& lg) {
  if (counts.empty()) return 0.0;
  const double base = lg(0);
  double s = 0;
  long total = 0;
  for (int n : counts)
    if (n) {
      s += lg(n) - base;
      total += n;
    }
  const double ra = alpha * counts.size();
  return s - std::lgamma(total + ra) + std::lgamma(ra);
}

void count_patterns(const ChainState& st, int c, const std::vector<int>& items, std::vector<int>& counts,
                    PatternId& patterns) {
  std::vector<PatternId> places;
  patterns = 1;
  for (int j : items) {
    places.push_back(patterns);
    patterns *= st.data().cardinalities[j];
  }
  counts.assign(items.empty() ? 0 : patterns, 0);
  if (items.empty()) {
    patterns = 0;
    return;
  }
  const int* base = st.data().responses.data();
  const int J = st.data().items();
  for (int i : st.members[c]) {
    const int* row = base + static_cast<size_t>(i) * J;
    PatternId r = 0;
    for (size_t k = 0; k < items.size(); ++k) r += places[k] * row[items[k]];
    ++counts[r];
  }
}

double lgamma_patterns(PatternId r) { return r ? std::lgamma(static_cast<double>(r)) : 0.0; }

}  // namespace

AcceptanceStats mh_structure_sweep(ChainState& st, const PriorSpec& prior, const Hyperparams& hyper, Rng& rng) {
  AcceptanceStats stats;
  const auto& Q = st.data().cardinalities;
  const int J = st.structure.items(), D = st.structure.slots();
  LgammaTable lg(hyper.alpha_theta);
  std::vector<std::vector<int>> new_a, new_b;
  for (const auto& group : st.structure.groups()) {
    const int rep = group.front();
    const int g = static_cast<int>(group.size());
    new_a.resize(g);
    new_b.resize(g);
    for (int it = 0; it < hyper.n_domain_iters; ++it) {
      ++stats.proposed;
      auto prop = try_propose_swap(st.structure.column(rep), D, hyper, rng);
      if (!prop) {
        ++stats.no_valid;
        continue;
      }
      DomainStructure cand = st.structure;
      cand.set_group_column(rep, prop->proposed_column);
      if (!admissible(cand, Q, hyper)) {
        ++stats.rejected_identifiability;
        continue;
      }
      const int d1 = prop->d1, d2 = prop->d2;
      std::vector<int> items_a, items_b;
      for (int j = 0; j < J; ++j) {
        if (prop->proposed_column[j] == d1) items_a.push_back(j);
        if (prop->proposed_column[j] == d2) items_b.push_back(j);
      }
      const DomainSlot& old_a = st.slots[rep][d1];
      const DomainSlot& old_b = st.slots[rep][d2];

      double dll = 0;
      PatternId ra = 0, rb = 0;
      for (int k = 0; k < g; ++k) {
        const int c = group[k];
        count_patterns(st, c, items_a, new_a[k], ra);
        count_patterns(st, c, items_b, new_b[k], rb);
        dll += fast_log_marginal(new_a[k], hyper.alpha_theta, lg) +
               fast_log_marginal(new_b[k], hyper.alpha_theta, lg) -
               fast_log_marginal(st.slots[c][d1].counts, hyper.alpha_theta, lg) -
               fast_log_marginal(st.slots[c][d2].counts, hyper.alpha_theta, lg);
      }
      int k_old = 0;
      for (const auto& s : st.slots[rep]) k_old += !s.empty();
      const int k_new = k_old + (old_b.empty() ? 1 : 0) - (items_a.empty() || items_b.empty() ? 1 : 0);
      const double lg_old = lgamma_patterns(old_a.patterns) + lgamma_patterns(old_b.patterns);
      const double lg_new = lgamma_patterns(ra) + lgamma_patterns(rb);
      double dprior = log_prior_class(J, k_new, 0.0, prior) - log_prior_class(J, k_old, 0.0, prior);
      if (prior.kind == PriorKind::pattern_adjusted) dprior -= g * (lg_new - lg_old);

      const double log_a = dprior + dll - prop->log_forward_over_backward;
      if (!(log_a >= 0 || std::log(uniform01(rng)) < log_a)) {
        ++stats.rejected_mh;
        continue;
      }
      ++stats.accepted;
      st.structure.set_group_column(rep, prop->proposed_column);
      for (int k = 0; k < g; ++k) {
        const int c = group[k];
        for (int pass = 0; pass < 2; ++pass) {
          const int d = pass ? d2 : d1;
          auto& items = pass ? items_b : items_a;
          auto& counts = pass ? new_b[k] : new_a[k];
          DomainSlot& slot = st.slots[c][d];
          slot.items = items;
          slot.places.clear();
          slot.patterns = items.empty() ? 0 : 1;
          for (int j : items) {
            slot.places.push_back(slot.patterns);
            slot.patterns *= Q[j];
          }
          slot.counts = std::move(counts);
          if (slot.empty()) {
            slot.counts.clear();
            slot.theta.clear();
            slot.log_theta.clear();
            continue;
          }
          dirichlet_counts(rng, hyper.alpha_theta, slot.counts, slot.theta);
          slot.log_theta.resize(slot.theta.size());
          for (size_t r = 0; r < slot.theta.size(); ++r) slot.log_theta[r] = std::log(slot.theta[r]);
        }
      }
    }
  }
  return stats;
}

namespace {

void add_stats(AcceptanceStats& a, const AcceptanceStats& b) {
  a.proposed += b.proposed;
  a.accepted += b.accepted;
  a.rejected_identifiability += b.rejected_identifiability;
  a.rejected_mh += b.rejected_mh;
  a.no_valid += b.no_valid;
}

}  // namespace

ChainRecord run_chain(const Dataset& data, const SamplerConfig& config, std::uint64_t chain_seed) {
  SamplerConfig cfg = config;
  validate_config(cfg, data);
  const Hyperparams& hyper = cfg.hyper;
  const PriorSpec prior = prior_spec(hyper);
  const int J = data.items(), C = cfg.classes, D = hyper.D;
  const auto& Q = data.cardinalities;
  const bool fixed = cfg.fixed_structure.has_value();
  const bool homo_phase = !fixed && cfg.mode != StructureMode::homogeneous && hyper.n_homo_iters > 0;
  const StructureMode start_mode = homo_phase ? StructureMode::homogeneous : cfg.mode;
  Rng rng = make_rng(chain_seed);

  DomainStructure s;
  if (fixed)
    s = *cfg.fixed_structure;
  else if (cfg.initial_structure)
    s = *cfg.initial_structure;
  else if (cfg.seed_style == SeedStyle::random)
    s = seed_structure_random(J, C, Q, hyper, start_mode, cfg.equivalence, rng);
  else
    s = DomainStructure(J, C, D, start_mode, cfg.equivalence);
  if (!admissible(s, Q, hyper))
    throw Error(ErrorCode::config_invalid, "the starting structure is not admissible");

  std::vector<int> classes;
  if (cfg.initial_classes)
    classes = *cfg.initial_classes;
  else if (data.n() == 0)
    classes = {};
  else if (cfg.seed_style == SeedStyle::random)
    classes = seed_classes_random(data.n(), C, rng);
  else
    classes = seed_classes_default(data, C, rng);

  ChainState st(data, std::move(s), std::move(classes), std::vector<double>(C, 1.0 / C));

  ChainRecord rec;
  rec.seed = chain_seed;
  rec.J = J;
  rec.C = C;
  rec.D = D;
  rec.mode = cfg.mode;
  rec.equivalence = cfg.equivalence;
  rec.cardinalities = Q;
  rec.warmup = cfg.warmup;
  rec.main = cfg.main;
  rec.thin = cfg.thin;
  rec.fixed_structure = fixed;
  const long total = cfg.warmup + cfg.main;
  rec.structures.reserve(total);
  rec.total_loglik.reserve(total);

  std::vector<double> ll;
  std::vector<int> canon(static_cast<size_t>(J) * C);
  for (long t = 1; t <= total; ++t) {
    st.iteration = t;
    if (homo_phase && t == hyper.n_homo_iters + 1) st.structure.set_mode(cfg.mode, cfg.equivalence);
    if (!fixed) add_stats(rec.stats, mh_structure_sweep(st, prior, hyper, rng));
    if (cfg.audit) st.audit();
    gibbs_theta(st, hyper, rng);
    gibbs_pi(st, hyper, rng);
    if (cfg.collapsed_class_update) {
      gibbs_classes(st, hyper, rng, true);
      subject_logliks(st, ll);
    } else {
      gibbs_classes(st, hyper, rng, false, &ll);
    }
    if (cfg.audit) st.audit();
    if (!fixed && !admissible(st.structure, Q, hyper))
      throw Error(ErrorCode::config_invalid, "sampler reached an inadmissible structure");

    for (int c = 0; c < C; ++c) {
      auto col = canonical_column(st.structure.column(c));
      std::copy(col.begin(), col.end(), canon.begin() + static_cast<long>(c) * J);
    }
    rec.structures.push_back(canon);
    double tot = 0;
    for (double v : ll) tot += v;
    rec.total_loglik.push_back(tot);

    if (t <= cfg.warmup) continue;
    rec.pointwise.add(ll);
    if (cfg.store_loglik) rec.loglik.push_back(ll);
    if (cfg.thin > 0 && (t - cfg.warmup) % cfg.thin == 0) {
      ModelParams p;
      p.pi = st.pi;
      for (int c = 0; c < C; ++c) {
        const int* col = canon.data() + static_cast<long>(c) * J;
        for (int d = 0; d < D; ++d) {
          const DomainSlot& slot = st.slots[c][d];
          if (!slot.empty()) p.theta[{c, col[slot.items.front()]}] = slot.theta;
        }
      }
      rec.draw_iterations.push_back(t);
      rec.draws.push_back(std::move(p));
    }
  }
  return rec;
}

std::vector<ChainRecord> run_chains(const Dataset& data, const SamplerConfig& config, int jobs) {
  SamplerConfig cfg = config;
  validate_config(cfg, data);
  const int chains = cfg.chains;
  if (jobs <= 0) jobs = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  jobs = std::min(jobs, chains);
  std::vector<ChainRecord> out(chains);
  std::vector<std::exception_ptr> errors(chains);
  std::mutex mu;
  int next = 0;
  auto worker = [&] {
    for (;;) {
      int k;
      {
        std::lock_guard<std::mutex> lock(mu);
        if (next >= chains) return;
        k = next++;
      }
      try {
        out[k] = run_chain(data, config, derive_seed(cfg.seed, k));
      } catch (...) {
        errors[k] = std::current_exception();
      }
    }
  };
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < jobs; ++w) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return out;
}

}  // namespace dlcm
