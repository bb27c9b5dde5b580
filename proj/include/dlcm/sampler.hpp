// Apache License, Version 2.0, refer to LICENSE.txt
#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "dlcm/encoding.hpp"
#include "dlcm/priors.hpp"
#include "dlcm/record.hpp"
#include "dlcm/rng.hpp"
#include "dlcm/structure.hpp"
#include "dlcm/types.hpp"

namespace dlcm {

// centers: farthest-point class seeds and all-singleton domains.
enum class SeedStyle { centers, random };
const char* to_string(SeedStyle s);
SeedStyle parse_seed_style(const std::string& s);

struct SamplerConfig {
  int classes = 2;
  int chains = 1;
  long warmup = 1000;
  long main = 5000;
  Hyperparams hyper;
  StructureMode mode = StructureMode::homogeneous;
  std::vector<int> equivalence;
  bool collapsed_class_update = false;
  std::uint64_t seed = 0;
  SeedStyle seed_style = SeedStyle::centers;
  std::optional<DomainStructure> fixed_structure;
  std::optional<DomainStructure> initial_structure;
  std::optional<std::vector<int>> initial_classes;
  int thin = 1;  // keep pi/theta every thin-th main iteration; 0 keeps none
  bool store_loglik = true;
  bool audit = false;  // recount from scratch and compare after every update
};

// Resolves hyperparameter defaults against the data and checks everything.
void validate_config(SamplerConfig& cfg, const Dataset& data);

struct DomainSlot {
  std::vector<int> items;  // ascending; empty slot has none
  std::vector<PatternId> places;
  PatternId patterns = 0;
  std::vector<int> counts;
  std::vector<double> theta;
  std::vector<double> log_theta;

  bool empty() const { return items.empty(); }
  PatternId pattern(std::span<const int> row) const {
    PatternId r = 0;
    for (size_t k = 0; k < items.size(); ++k) r += places[k] * row[items[k]];
    return r;
  }
};

class ChainState {
 public:
  ChainState(const Dataset& data, DomainStructure structure, std::vector<int> classes,
             std::vector<double> pi);

  const Dataset& data() const { return *data_; }
  // Replaces the items of one slot for one class and recounts it. theta is left uniform.
  void set_domain(int c, int d, std::vector<int> items);
  // Rebuilds members, class counts and pattern counts from the class labels.
  void recount();
  // Throws if the counts differ from a from-scratch recount.
  void audit() const;
  ModelParams params() const;
  std::vector<int> nonempty(int c) const;

  DomainStructure structure;
  std::vector<int> classes;
  std::vector<int> class_counts;
  std::vector<double> pi;
  std::vector<std::vector<DomainSlot>> slots;  // [c][d]
  std::vector<std::vector<int>> members;
  long iteration = 0;

 private:
  const Dataset* data_;
};

std::vector<int> seed_classes_default(const Dataset& data, int C, Rng& rng);
std::vector<int> seed_classes_random(int n, int C, Rng& rng);
// Uniform over MaxItems-bounded partitions, redrawn until admissible.
DomainStructure seed_structure_random(int J, int C, std::span<const int> cardinalities,
                                      const Hyperparams& hyper, StructureMode mode,
                                      std::vector<int> equivalence, Rng& rng);

void gibbs_theta(ChainState& st, const Hyperparams& hyper, Rng& rng);
void gibbs_pi(ChainState& st, const Hyperparams& hyper, Rng& rng);
// When loglik_out is given it receives each subject's mixture log-likelihood under
// the current (pi, theta) (non-collapsed update only).
void gibbs_classes(ChainState& st, const Hyperparams& hyper, Rng& rng, bool collapsed,
                   std::vector<double>* loglik_out = nullptr);
// Conditional class probabilities for subject i with pi and theta integrated out,
// treating every other subject's class as fixed.
std::vector<double> collapsed_class_probs(const ChainState& st, int i, const Hyperparams& hyper);

double domain_log_marginal(std::span<const int> counts, double alpha_theta);

struct ProposalOutcome {
  std::vector<int> proposed_column;
  double log_forward_over_backward = 0;
  int d1 = -1, d2 = -1;
};

std::optional<ProposalOutcome> try_propose_swap(std::span<const int> column, int D,
                                                const Hyperparams& hyper, Rng& rng);
// Throws NoValidProposal where try_propose_swap gives nothing.
ProposalOutcome propose_swap(std::span<const int> column, int D, const Hyperparams& hyper, Rng& rng);
// Proposal ratio p_f/p_b for a move between two columns, from the domain sizes.
double proposal_log_ratio(int nonempty_before, int s1, int s2, int s1_new, int s2_new, double p_empty);

AcceptanceStats mh_structure_sweep(ChainState& st, const PriorSpec& prior, const Hyperparams& hyper,
                                   Rng& rng);

ChainRecord run_chain(const Dataset& data, const SamplerConfig& config, std::uint64_t chain_seed);
// Chain k uses derive_seed(config.seed, k). jobs <= 0 means hardware concurrency.
std::vector<ChainRecord> run_chains(const Dataset& data, const SamplerConfig& config, int jobs = 0);

}  // namespace dlcm
