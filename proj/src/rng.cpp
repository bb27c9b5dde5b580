// Apache License, Version 2.0, refer to LICENSE.txt
#include "dlcm/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace dlcm {

std::uint64_t derive_seed(std::uint64_t root, std::uint64_t stream) {
  std::uint64_t z = root + 0x9E3779B97F4A7C15ull * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

Rng make_rng(std::uint64_t seed) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
  return Rng(seq);
}

double uniform01(Rng& rng) {
  // 53 random bits, never exactly zero
  return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
}

int uniform_index(Rng& rng, int n) {
  return static_cast<int>(std::uniform_int_distribution<int>(0, n - 1)(rng));
}

namespace {

double gamma_draw(Rng& rng, double shape) {
  return std::gamma_distribution<double>(shape, 1.0)(rng);
}

void normalize(std::vector<double>& out) {
  double s = 0;
  for (double v : out) s += v;
  if (s > 0) {
    for (double& v : out) v /= s;
  } else {
    // every gamma underflowed; fall back to the largest-shape corner
    std::fill(out.begin(), out.end(), 1.0 / out.size());
  }
}

}  // namespace

void dirichlet(Rng& rng, std::span<const double> alpha, std::vector<double>& out) {
  out.resize(alpha.size());
  for (size_t k = 0; k < alpha.size(); ++k) out[k] = gamma_draw(rng, alpha[k]);
  normalize(out);
}

void dirichlet_counts(Rng& rng, double alpha, std::span<const int> counts, std::vector<double>& out) {
  out.resize(counts.size());
  for (size_t k = 0; k < counts.size(); ++k) out[k] = gamma_draw(rng, alpha + counts[k]);
  normalize(out);
}

int categorical_log(Rng& rng, std::span<const double> logw, std::vector<double>& scratch) {
  double mx = -std::numeric_limits<double>::infinity();
  for (double v : logw) mx = std::max(mx, v);
  scratch.resize(logw.size());
  for (size_t k = 0; k < logw.size(); ++k) scratch[k] = std::exp(logw[k] - mx);
  return categorical(rng, scratch);
}

int categorical(Rng& rng, std::span<const double> weights) {
  double total = 0;
  for (double w : weights) total += w;
  double u = uniform01(rng) * total;
  const int n = static_cast<int>(weights.size());
  for (int k = 0; k < n; ++k) {
    u -= weights[k];
    if (u < 0) return k;
  }
  for (int k = n - 1; k >= 0; --k)
    if (weights[k] > 0) return k;
  return n - 1;
}

}  // namespace dlcm
