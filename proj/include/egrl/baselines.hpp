// SPDX-License-Identifier: Apache-2.0
//
// Search baselines: the greedy dynamic-programming sweep (conditional
// independence across nodes, several passes) and the exhaustive oracle for
// tiny graphs.
#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "egrl/hwsim.hpp"
#include "egrl/workload.hpp"

namespace egrl {

struct GreedyDpTrial {
  long step = 0;  // 1-based evaluation counter
  int node = 0;
  int weight_level = 0, act_level = 0;
  double reward = 0.0;
  double epsilon = 0.0;
  std::optional<double> latency;
  MappingDecision executed;  // rectified trial map
};

struct GreedyDpResult {
  MappingDecision mapping;
  std::vector<GreedyDpTrial> trajectory;  // exactly 9*N entries per pass run
  int passes_run = 0;
};

// Starts from all-DRAM, then per node (topological order) tries all 9
// (weight, activation) level pairs with everything else fixed and commits
// the reward-maximizing pair; ties go to lower level indices. Repeats up to
// `passes` sweeps, stopping early on a fixed point.
inline GreedyDpResult greedy_dp(const WorkloadGraph& g, const HardwareModel& hw,
                                double omega_baseline, int passes,
                                double invalid_penalty = 1.0) {
  if (passes < 1) throw std::invalid_argument("passes must be >= 1");
  GreedyDpResult res;
  res.mapping = MappingDecision::uniform(g.n(), kDram);
  long step = 0;
  for (int pass = 0; pass < passes; ++pass) {
    bool changed = false;
    for (int i = 0; i < g.n(); ++i) {
      int best_w = -1, best_a = -1;
      double best_r = 0.0;
      for (int w = 0; w < kNumMemLevels; ++w) {
        for (int a = 0; a < kNumMemLevels; ++a) {
          MappingDecision trial = res.mapping;
          trial.weight_mem[i] = static_cast<std::uint8_t>(w);
          trial.act_mem[i] = static_cast<std::uint8_t>(a);
          const EvalResult r = compute_reward(g, hw, trial, omega_baseline, invalid_penalty);
          res.trajectory.push_back({++step, i, w, a, r.reward, r.epsilon, r.latency, r.rectified});
          if (best_w < 0 || r.reward > best_r) {
            best_r = r.reward;
            best_w = w;
            best_a = a;
          }
        }
      }
      if (res.mapping.weight_mem[i] != best_w || res.mapping.act_mem[i] != best_a) {
        res.mapping.weight_mem[i] = static_cast<std::uint8_t>(best_w);
        res.mapping.act_mem[i] = static_cast<std::uint8_t>(best_a);
        changed = true;
      }
    }
    res.passes_run = pass + 1;
    if (!changed) break;
  }
  return res;
}

struct OracleResult {
  MappingDecision mapping;  // canonical rectified optimum
  double latency = 0.0;
  long evaluated = 0;
};

namespace detail {

// Interleaved (w0, a0, w1, a1, ...) lexicographic comparison.
inline bool lex_before(const MappingDecision& a, const MappingDecision& b) {
  for (int i = 0; i < a.n(); ++i) {
    if (a.weight_mem[i] != b.weight_mem[i]) return a.weight_mem[i] < b.weight_mem[i];
    if (a.act_mem[i] != b.act_mem[i]) return a.act_mem[i] < b.act_mem[i];
  }
  return false;
}

}  // namespace detail

// Ground truth for tiny graphs: enumerates all 9^N proposals, rectifies
// each, and keeps the minimum-latency valid result. Ties break toward the
// lexicographically smallest decision vector.
inline OracleResult exhaustive_oracle(const WorkloadGraph& g, const HardwareModel& hw) {
  const int n = g.n();
  double combos = 1.0;
  for (int i = 0; i < 2 * n; ++i) combos *= 3.0;
  if (combos > 1e6)
    throw ConfigError("exhaustive oracle limited to 9^N <= 1e6 (N <= 6); got N = " +
                      std::to_string(n));
  OracleResult best;
  bool have = false;
  MappingDecision m = MappingDecision::uniform(n, kDram);
  const long total = static_cast<long>(combos);
  for (long code = 0; code < total; ++code) {
    long c = code;
    for (int i = 0; i < n; ++i) {
      m.weight_mem[i] = static_cast<std::uint8_t>(c % 3);
      c /= 3;
      m.act_mem[i] = static_cast<std::uint8_t>(c % 3);
      c /= 3;
    }
    auto [rect, eps] = rectify(g, hw, m);
    const double lat = simulate_latency(g, hw, rect);
    ++best.evaluated;
    if (!have || lat < best.latency ||
        (lat == best.latency && detail::lex_before(rect, best.mapping))) {
      best.latency = lat;
      best.mapping = rect;
      have = true;
    }
  }
  return best;
}

}  // namespace egrl
