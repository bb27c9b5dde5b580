// Apache License, Version 2.0, refer to LICENSE.txt
#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace dlcm {

using Rng = std::mt19937_64;

// splitmix64 of (root, stream); gives independent-looking per-chain seeds.
std::uint64_t derive_seed(std::uint64_t root, std::uint64_t stream);
Rng make_rng(std::uint64_t seed);

double uniform01(Rng& rng);
int uniform_index(Rng& rng, int n);

// Draws into `out`, which is resized to alpha.size().
void dirichlet(Rng& rng, std::span<const double> alpha, std::vector<double>& out);
// Symmetric concentration plus integer counts.
void dirichlet_counts(Rng& rng, double alpha, std::span<const int> counts, std::vector<double>& out);

// Index drawn proportionally to exp(logw), computed in place-safe scratch.
int categorical_log(Rng& rng, std::span<const double> logw, std::vector<double>& scratch);
int categorical(Rng& rng, std::span<const double> weights);

}  // namespace dlcm
