// SPDX-License-Identifier: Apache-2.0
//
// Run artifacts. Everything here is deterministic for a fixed (config,
// seed) except summary.json's wall_time_s; reruns produce byte-identical
// result logs (results.jsonl, generations.jsonl, mappings.jsonl, series.csv,
// best_mapping.json).
#pragma once

#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "egrl/gnn.hpp"
#include "egrl/orchestrator.hpp"

namespace egrl {

namespace detail {

inline nlohmann::ordered_json eval_to_json(const EvalRecord& r) {
  nlohmann::ordered_json j;
  j["step"] = r.step;
  j["gen"] = r.gen;
  j["policy"] = r.policy;
  j["encoding"] = r.encoding;
  j["uid"] = r.uid;
  j["epsilon"] = r.epsilon;
  if (r.latency)
    j["latency"] = *r.latency;
  else
    j["latency"] = nullptr;
  j["reward"] = r.reward;
  j["speedup"] = r.speedup;
  return j;
}

// Interleaved (w0, a0, w1, a1, ...) flat view used by the embedding export.
inline std::vector<int> interleaved_map(const MappingDecision& m) {
  std::vector<int> v;
  v.reserve(2 * m.n());
  for (int i = 0; i < m.n(); ++i) {
    v.push_back(m.weight_mem[i]);
    v.push_back(m.act_mem[i]);
  }
  return v;
}

}  // namespace detail

inline void write_run_result(const RunResult& res, std::uint64_t seed, const std::string& dir) {
  std::filesystem::create_directories(dir);
  {
    std::ofstream out(dir + "/results.jsonl");
    out << R"({"schema":1,"file":"results"})" << "\n";
    for (const EvalRecord& r : res.evals) out << detail::eval_to_json(r).dump() << "\n";
  }
  {
    std::ofstream out(dir + "/generations.jsonl");
    out << R"({"schema":1,"file":"generations"})" << "\n";
    for (const GenRecord& g : res.gens) {
      nlohmann::ordered_json j;
      j["gen"] = g.gen;
      j["best"] = g.best;
      j["mean"] = g.mean;
      j["worst"] = g.worst;
      j["n_gnn"] = g.n_gnn;
      j["n_boltzmann"] = g.n_boltzmann;
      j["elite_uids"] = g.elite_uids;
      j["buffer_size"] = g.buffer_size;
      auto opt = [](const std::optional<double>& v) {
        return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(nullptr);
      };
      j["temp_min"] = opt(g.temp_min);
      j["temp_max"] = opt(g.temp_max);
      j["critic_loss"] = opt(g.critic_loss);
      j["actor_loss"] = opt(g.actor_loss);
      out << j.dump() << "\n";
    }
  }
  {
    // Valid executed mappings (plus the step-0 compiler map) for offline
    // embedding/visualization tooling.
    std::ofstream out(dir + "/mappings.jsonl");
    out << R"({"schema":1,"file":"mappings"})" << "\n";
    for (const EvalRecord& r : res.evals) {
      if (r.policy != "compiler" && r.speedup <= 0.0) continue;
      nlohmann::ordered_json j;
      j["step"] = r.step;
      j["policy"] = r.policy;
      j["speedup"] = r.speedup;
      j["map"] = detail::interleaved_map(r.executed);
      out << j.dump() << "\n";
    }
  }
  {
    std::ofstream out(dir + "/series.csv");
    out << "iteration,best_speedup\n";
    double best = 0.0;
    char buf[64];
    for (const EvalRecord& r : res.evals) {
      if (r.policy == "compiler") continue;
      if (r.speedup > best) {
        best = r.speedup;
        std::snprintf(buf, sizeof buf, "%ld,%.9g\n", r.step, best);
        out << buf;
      }
    }
    std::snprintf(buf, sizeof buf, "%ld,%.9g\n", res.iterations, best);
    out << buf;
  }
  {
    std::ofstream out(dir + "/best_mapping.json");
    out << mapping_to_json(res.best_mapping, res.workload_name).dump(1) << "\n";
  }
  if (res.best_gnn) save_checkpoint(*res.best_gnn, dir + "/best_gnn.ckpt");
  {
    nlohmann::ordered_json j;
    j["schema"] = 1;
    j["workload"] = res.workload_name;
    j["algorithm"] = res.algorithm;
    j["seed"] = seed;
    j["iterations"] = res.iterations;
    j["iterations_note"] =
        "iterations count simulator evaluations of agent proposals; the step-0 "
        "compiler baseline and learner updates are not iterations";
    j["generations"] = res.generations;
    j["baseline_latency"] = res.baseline_latency;
    j["best_speedup"] = res.best_speedup;
    j["best_step"] = res.best_step;
    j["migrations"] = res.migrations;
    j["reseeds"] = res.reseeds;
    j["deployment"] = {{"uid", res.deployment.uid},
                       {"encoding", res.deployment.encoding},
                       {"fitness", res.deployment.fitness}};
    if (res.best_gnn) {
      j["best_gnn"] = {{"uid", res.best_gnn_uid},
                       {"speedup", res.best_gnn_speedup},
                       {"checkpoint", "best_gnn.ckpt"}};
    }
    j["wall_time_s"] = res.wall_time_s;
    std::ofstream out(dir + "/summary.json");
    out << j.dump(1) << "\n";
  }
}

// ---------------------------------------------------------------------------
// Cross-seed aggregation
// ---------------------------------------------------------------------------

struct AggregatePoint {
  long iteration;
  double mean, stddev;
};

// Best-so-far speedup per seed, sampled on a common iteration grid.
inline std::vector<AggregatePoint> aggregate_series(const std::vector<RunResult>& runs,
                                                    int grid_points = 200) {
  if (runs.empty()) throw std::invalid_argument("no runs to aggregate");
  long horizon = 0;
  for (const RunResult& r : runs) horizon = std::max(horizon, r.iterations);
  const long width = std::max<long>(1, horizon / std::max(1, grid_points));
  std::vector<AggregatePoint> out;
  for (long it = width; it <= horizon; it += width) {
    double mean = 0.0;
    std::vector<double> vals;
    for (const RunResult& r : runs) {
      double best = 0.0;
      for (const EvalRecord& e : r.evals) {
        if (e.policy == "compiler" || e.step > it) continue;
        best = std::max(best, e.speedup);
      }
      vals.push_back(best);
      mean += best;
    }
    mean /= vals.size();
    double var = 0.0;
    for (double v : vals) var += (v - mean) * (v - mean);
    var /= vals.size();
    out.push_back({it, mean, std::sqrt(var)});
  }
  return out;
}

inline double median(std::vector<double> v) {
  if (v.empty()) throw std::invalid_argument("median of empty set");
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

inline void write_aggregate(const std::vector<RunResult>& runs,
                            const std::vector<std::uint64_t>& seeds, const std::string& dir) {
  std::filesystem::create_directories(dir);
  {
    std::ofstream out(dir + "/aggregate_series.csv");
    out << "iteration,mean_best_speedup,std_best_speedup\n";
    char buf[96];
    for (const AggregatePoint& p : aggregate_series(runs)) {
      std::snprintf(buf, sizeof buf, "%ld,%.9g,%.9g\n", p.iteration, p.mean, p.stddev);
      out << buf;
    }
  }
  nlohmann::ordered_json j;
  j["schema"] = 1;
  j["n_seeds"] = runs.size();
  j["seeds"] = seeds;
  std::vector<double> bests;
  for (const RunResult& r : runs) bests.push_back(r.best_speedup);
  j["best_speedups"] = bests;
  double mean = 0.0;
  for (double b : bests) mean += b;
  mean /= bests.size();
  double var = 0.0;
  for (double b : bests) var += (b - mean) * (b - mean);
  var /= bests.size();
  j["mean_best_speedup"] = mean;
  j["std_best_speedup"] = std::sqrt(var);
  j["median_best_speedup"] = median(bests);
  std::ofstream out(dir + "/aggregate.json");
  out << j.dump(1) << "\n";
}

// ---------------------------------------------------------------------------
// Mapping-shift matrix (byte-weighted)
// ---------------------------------------------------------------------------

// entry (i, j) = bytes of tensors mapped to level i by `base` and level j by
// `other`. Weight-less weight entries carry zero bytes and vanish naturally.
inline std::array<std::array<double, 3>, 3> mapshift_matrix(const MappingDecision& base,
                                                            const MappingDecision& other,
                                                            const WorkloadGraph& g,
                                                            bool normalize_rows = false) {
  if (base.n() != g.n() || other.n() != g.n())
    throw std::invalid_argument("mapping length does not match workload");
  std::array<std::array<double, 3>, 3> m{};
  for (const TensorLife& t : tensor_lives(g)) {
    const int i = t.is_weight ? base.weight_mem[t.node] : base.act_mem[t.node];
    const int j = t.is_weight ? other.weight_mem[t.node] : other.act_mem[t.node];
    m[i][j] += static_cast<double>(t.bytes);
  }
  if (normalize_rows) {
    for (auto& row : m) {
      const double s = row[0] + row[1] + row[2];
      if (s > 0)
        for (double& v : row) v /= s;
    }
  }
  return m;
}

}  // namespace egrl
