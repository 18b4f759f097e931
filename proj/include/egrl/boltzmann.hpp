// SPDX-License-Identifier: Apache-2.0
//
// Stateless Boltzmann chromosome: per node-tensor priors and temperatures,
// sampled through a temperature-scaled softmax. Computing an action never
// touches the workload graph.
#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include "egrl/errors.hpp"
#include "egrl/gnn.hpp"
#include "egrl/hwsim.hpp"
#include "egrl/mat.hpp"
#include "egrl/rng.hpp"

namespace egrl {

inline constexpr double kTempMin = 1e-3;
inline constexpr double kTempMax = 10.0;

// Priors are unnormalized logits so mutation and crossover stay
// unconstrained; temperatures are clamped to [kTempMin, kTempMax].
struct BoltzmannGenome {
  Mat priors;        // N x 6: [0,3) weight tensor, [3,6) activation
  Mat temperatures;  // N x 2

  int n() const { return priors.rows; }

  bool operator==(const BoltzmannGenome& o) const {
    return priors.a == o.priors.a && temperatures.a == o.temperatures.a;
  }
};

inline BoltzmannGenome random_boltzmann(int n, std::uint64_t seed) {
  BoltzmannGenome g;
  g.priors = Mat(n, 6);
  g.temperatures = Mat(n, 2);
  Rng rng(derive_seed(seed, "boltzmann_init"));
  for (double& v : g.priors.a) v = rng.uniform(-1.0, 1.0);
  for (double& v : g.temperatures.a) v = 1.0;
  return g;
}

inline void clamp_temperatures(BoltzmannGenome& g) {
  for (double& t : g.temperatures.a) t = std::min(kTempMax, std::max(kTempMin, t));
}

// p_i = exp(prior_i/T) / sum_j exp(prior_j/T), max-subtracted for stability.
inline std::array<double, 3> boltzmann_probs(const double* priors, double temperature) {
  if (temperature <= 0.0) throw std::invalid_argument("temperature must be > 0");
  const double m = std::max(priors[0], std::max(priors[1], priors[2]));
  std::array<double, 3> p;
  double denom = 0.0;
  for (int k = 0; k < 3; ++k) {
    p[k] = std::exp((priors[k] - m) / temperature);
    denom += p[k];
  }
  for (int k = 0; k < 3; ++k) p[k] /= denom;
  return p;
}

// All 2N categorical distributions of a genome, policy layout (N x 6).
inline Mat boltzmann_prob_matrix(const BoltzmannGenome& g) {
  Mat probs(g.n(), 6);
  for (int i = 0; i < g.n(); ++i)
    for (int t = 0; t < 2; ++t) {
      const auto p = boltzmann_probs(g.priors.row(i) + 3 * t, g.temperatures(i, t));
      for (int k = 0; k < 3; ++k) probs(i, 3 * t + k) = p[k];
    }
  return probs;
}

// Independent categorical draw per node-tensor; deterministic under seed.
inline MappingDecision boltzmann_act(const BoltzmannGenome& g, std::uint64_t seed) {
  const int n = g.n();
  MappingDecision m;
  m.weight_mem.resize(n);
  m.act_mem.resize(n);
  Rng rng(derive_seed(seed, "boltzmann_act"));
  for (int i = 0; i < n; ++i)
    for (int t = 0; t < 2; ++t) {
      const auto p = boltzmann_probs(g.priors.row(i) + 3 * t, g.temperatures(i, t));
      const int pick = rng.categorical(p.data(), 3);
      (t == 0 ? m.weight_mem[i] : m.act_mem[i]) = static_cast<std::uint8_t>(pick);
    }
  return m;
}

// Seeds the prior from a GNN policy's posterior: priors <- log(probs),
// temperatures reset to 1, so boltzmann_probs reproduces the distribution
// exactly at T=1.
inline BoltzmannGenome seed_from_gnn(const BoltzmannGenome& base, const Mat& gnn_probs) {
  if (!base.priors.same_shape(gnn_probs))
    throw std::invalid_argument("gnn probability matrix shape does not match genome");
  BoltzmannGenome out = base;
  for (std::size_t i = 0; i < out.priors.a.size(); ++i)
    out.priors.a[i] = std::log(std::max(gnn_probs.a[i], kProbFloor));
  for (double& t : out.temperatures.a) t = 1.0;
  return out;
}

// Alternative seeding: encode the sampled action itself as a one-hot prior.
inline BoltzmannGenome seed_from_action(const BoltzmannGenome& base, const MappingDecision& a) {
  if (a.n() != base.n()) throw std::invalid_argument("action length does not match genome");
  BoltzmannGenome out = base;
  out.priors.zero();
  for (int i = 0; i < base.n(); ++i) {
    out.priors(i, a.weight_mem[i]) = 1.0;
    out.priors(i, 3 + a.act_mem[i]) = 1.0;
  }
  for (double& t : out.temperatures.a) t = 1.0;
  return out;
}

// Flat view (priors ‖ temperatures) used by single-point crossover and
// mutation.
inline std::vector<double> boltzmann_flatten(const BoltzmannGenome& g) {
  std::vector<double> v;
  v.reserve(g.priors.a.size() + g.temperatures.a.size());
  v.insert(v.end(), g.priors.a.begin(), g.priors.a.end());
  v.insert(v.end(), g.temperatures.a.begin(), g.temperatures.a.end());
  return v;
}

inline BoltzmannGenome boltzmann_unflatten(int n, const std::vector<double>& v) {
  const std::size_t expect = static_cast<std::size_t>(n) * 8;
  if (v.size() != expect)
    throw std::invalid_argument("boltzmann vector length " + std::to_string(v.size()) +
                                " does not match 8*N=" + std::to_string(expect));
  BoltzmannGenome g;
  g.priors = Mat(n, 6);
  g.temperatures = Mat(n, 2);
  std::copy(v.begin(), v.begin() + 6 * n, g.priors.a.begin());
  std::copy(v.begin() + 6 * n, v.end(), g.temperatures.a.begin());
  return g;
}

// Checkpoint: N, schema, then priors and temperatures as raw little-endian
// float64s.
inline void save_boltzmann(const BoltzmannGenome& g, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot open '" + path + "' for writing");
  const std::uint32_t header[2] = {static_cast<std::uint32_t>(g.n()), 1u};
  out.write(reinterpret_cast<const char*>(header), sizeof(header));
  out.write(reinterpret_cast<const char*>(g.priors.a.data()),
            static_cast<std::streamsize>(g.priors.a.size() * sizeof(double)));
  out.write(reinterpret_cast<const char*>(g.temperatures.a.data()),
            static_cast<std::streamsize>(g.temperatures.a.size() * sizeof(double)));
}

inline BoltzmannGenome load_boltzmann(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open genome file '" + path + "'");
  std::uint32_t header[2];
  in.read(reinterpret_cast<char*>(header), sizeof(header));
  if (!in || header[1] != 1u) throw SchemaError("bad genome header in '" + path + "'");
  const int n = static_cast<int>(header[0]);
  BoltzmannGenome g;
  g.priors = Mat(n, 6);
  g.temperatures = Mat(n, 2);
  in.read(reinterpret_cast<char*>(g.priors.a.data()),
          static_cast<std::streamsize>(g.priors.a.size() * sizeof(double)));
  in.read(reinterpret_cast<char*>(g.temperatures.a.data()),
          static_cast<std::streamsize>(g.temperatures.a.size() * sizeof(double)));
  if (!in) throw SchemaError("truncated genome file '" + path + "'");
  return g;
}

}  // namespace egrl
