// SPDX-License-Identifier: Apache-2.0
//
// Simulated accelerator: three-level memory hierarchy, liveness-aware
// capacity checking, spill rectification, a serial roofline latency model,
// the greedy compiler heuristic, and the valid/invalid reward split.
#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "egrl/errors.hpp"
#include "egrl/workload.hpp"

namespace egrl {

// Level indices, slow to fast.
inline constexpr int kDram = 0;
inline constexpr int kLlc = 1;
inline constexpr int kSram = 2;
inline constexpr int kNumMemLevels = 3;

struct MemoryLevelSpec {
  std::string name;
  std::int64_t capacity_bytes = 0;
  double bandwidth_bytes_per_s = 0.0;
};

struct HardwareModel {
  std::array<MemoryLevelSpec, kNumMemLevels> levels;  // DRAM, LLC, SRAM
  double compute_rate = 0.0;                          // ops/second

  void validate() const {
    for (const auto& l : levels) {
      if (l.capacity_bytes <= 0) throw ConfigError("memory level '" + l.name + "' capacity must be > 0");
      if (l.bandwidth_bytes_per_s <= 0) throw ConfigError("memory level '" + l.name + "' bandwidth must be > 0");
    }
    if (!(levels[kDram].capacity_bytes > levels[kLlc].capacity_bytes &&
          levels[kLlc].capacity_bytes > levels[kSram].capacity_bytes))
      throw ConfigError("capacities must strictly decrease DRAM > LLC > SRAM");
    if (!(levels[kDram].bandwidth_bytes_per_s < levels[kLlc].bandwidth_bytes_per_s &&
          levels[kLlc].bandwidth_bytes_per_s < levels[kSram].bandwidth_bytes_per_s))
      throw ConfigError("bandwidths must strictly increase DRAM < LLC < SRAM");
    if (compute_rate <= 0) throw ConfigError("compute_rate must be > 0");
  }

  double bw(int level) const { return levels[level].bandwidth_bytes_per_s; }
  std::int64_t cap(int level) const { return levels[level].capacity_bytes; }

  // "default": chip-scale capacities, bandwidth ratios 1:10:100.
  // "desk": LLC/SRAM scaled down 1000x so the synthetic workloads contend
  // for fast memory; DRAM keeps its capacity so it always absorbs spills.
  static HardwareModel preset(const std::string& name) {
    HardwareModel hw;
    hw.compute_rate = 1e12;
    if (name == "default") {
      hw.levels = {MemoryLevelSpec{"DRAM", 32'000'000'000, 1e9},
                   MemoryLevelSpec{"LLC", 24'000'000, 1e10},
                   MemoryLevelSpec{"SRAM", 4'000'000, 1e11}};
    } else if (name == "desk") {
      hw.levels = {MemoryLevelSpec{"DRAM", 32'000'000'000, 1e9},
                   MemoryLevelSpec{"LLC", 24'000, 1e10},
                   MemoryLevelSpec{"SRAM", 4'000, 1e11}};
    } else {
      throw ConfigError("unknown hardware preset '" + name + "'");
    }
    hw.validate();
    return hw;
  }
};

inline nlohmann::ordered_json hardware_to_json(const HardwareModel& hw) {
  nlohmann::ordered_json j;
  j["schema"] = 1;
  auto& levels = j["levels"] = nlohmann::ordered_json::array();
  for (const auto& l : hw.levels) {
    nlohmann::ordered_json lj;
    lj["name"] = l.name;
    lj["capacity_bytes"] = l.capacity_bytes;
    lj["bandwidth_bytes_per_s"] = l.bandwidth_bytes_per_s;
    levels.push_back(lj);
  }
  j["compute_rate"] = hw.compute_rate;
  return j;
}

inline HardwareModel hardware_from_json(const nlohmann::json& j) {
  HardwareModel hw;
  if (!j.is_object() || !j.contains("levels") || !j["levels"].is_array() ||
      j["levels"].size() != kNumMemLevels)
    throw SchemaError("hardware config needs a 'levels' array of 3 entries (DRAM, LLC, SRAM)");
  for (int i = 0; i < kNumMemLevels; ++i) {
    const auto& lj = j["levels"][i];
    hw.levels[i].name = lj.value("name", std::string(i == kDram ? "DRAM" : i == kLlc ? "LLC" : "SRAM"));
    if (!lj.contains("capacity_bytes") || !lj.contains("bandwidth_bytes_per_s"))
      throw SchemaError("level " + std::to_string(i) + " needs capacity_bytes and bandwidth_bytes_per_s");
    hw.levels[i].capacity_bytes = lj["capacity_bytes"].get<std::int64_t>();
    hw.levels[i].bandwidth_bytes_per_s = lj["bandwidth_bytes_per_s"].get<double>();
  }
  if (!j.contains("compute_rate")) throw SchemaError("hardware config missing compute_rate");
  hw.compute_rate = j["compute_rate"].get<double>();
  hw.validate();
  return hw;
}

inline HardwareModel load_hardware(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open hardware config '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("hardware config is not valid JSON: ") + e.what());
  }
  return hardware_from_json(j);
}

// ---------------------------------------------------------------------------
// Mapping decisions
// ---------------------------------------------------------------------------

// Per-node level assignment for the weight tensor and the output activation.
struct MappingDecision {
  std::vector<std::uint8_t> weight_mem;
  std::vector<std::uint8_t> act_mem;

  static MappingDecision uniform(int n, std::uint8_t level) {
    MappingDecision m;
    m.weight_mem.assign(n, level);
    m.act_mem.assign(n, level);
    return m;
  }

  int n() const { return static_cast<int>(weight_mem.size()); }

  void check_against(const WorkloadGraph& g) const {
    if (n() != g.n() || static_cast<int>(act_mem.size()) != g.n())
      throw std::invalid_argument("mapping length does not match workload");
    for (int i = 0; i < g.n(); ++i)
      if (weight_mem[i] >= kNumMemLevels || act_mem[i] >= kNumMemLevels)
        throw std::invalid_argument("mapping entry outside {0,1,2} at node " + std::to_string(i));
  }

  // Weight entries of weight-less nodes carry no bytes; pin them to DRAM so
  // comparisons and epsilon are well-defined.
  MappingDecision canonical(const WorkloadGraph& g) const {
    MappingDecision m = *this;
    for (int i = 0; i < g.n(); ++i)
      if (g.nodes[i].weight_size == 0) m.weight_mem[i] = kDram;
    return m;
  }

  bool operator==(const MappingDecision&) const = default;
};

inline nlohmann::ordered_json mapping_to_json(const MappingDecision& m, const std::string& workload_name) {
  nlohmann::ordered_json j;
  j["schema"] = 1;
  j["workload"] = workload_name;
  j["weight_mem"] = m.weight_mem;
  j["act_mem"] = m.act_mem;
  return j;
}

inline MappingDecision mapping_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("weight_mem") || !j.contains("act_mem"))
    throw SchemaError("mapping file needs weight_mem and act_mem arrays");
  MappingDecision m;
  for (const auto& v : j["weight_mem"]) m.weight_mem.push_back(v.get<std::uint8_t>());
  for (const auto& v : j["act_mem"]) m.act_mem.push_back(v.get<std::uint8_t>());
  if (m.weight_mem.size() != m.act_mem.size()) throw SchemaError("mapping arrays differ in length");
  return m;
}

inline MappingDecision load_mapping(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open mapping file '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("mapping file is not valid JSON: ") + e.what());
  }
  return mapping_from_json(j);
}

// ---------------------------------------------------------------------------
// Capacity / liveness
// ---------------------------------------------------------------------------

// Execution steps are the nodes in topological order. A weight becomes
// resident at its node's step and is never evicted; an activation is live
// from its producer's step through its last consumer's step.
struct TensorLife {
  int node;
  bool is_weight;
  std::int64_t bytes;
  int start, end;  // inclusive step interval
};

inline std::vector<TensorLife> tensor_lives(const WorkloadGraph& g) {
  std::vector<TensorLife> out;
  out.reserve(2 * g.n());
  for (int i = 0; i < g.n(); ++i) {
    if (g.nodes[i].weight_size > 0)
      out.push_back({i, true, g.nodes[i].weight_size, i, g.n() - 1});
    out.push_back({i, false, g.activation_bytes[i], i, g.last_consumer[i]});
  }
  return out;
}

struct CapacityViolation {
  int step;                // node index executing when the level overflows
  int level;
  std::int64_t overflow_bytes;
};

// Empty result iff the mapping is valid. Violations are ordered by step,
// fastest level first within a step (the order rectification consumes them).
inline std::vector<CapacityViolation> check_capacity(const WorkloadGraph& g,
                                                     const HardwareModel& hw,
                                                     const MappingDecision& m) {
  m.check_against(g);
  const int n = g.n();
  std::array<std::vector<std::int64_t>, kNumMemLevels> diff;
  for (auto& d : diff) d.assign(n + 1, 0);
  for (const TensorLife& t : tensor_lives(g)) {
    const int lvl = t.is_weight ? m.weight_mem[t.node] : m.act_mem[t.node];
    diff[lvl][t.start] += t.bytes;
    diff[lvl][t.end + 1] -= t.bytes;
  }
  std::vector<CapacityViolation> out;
  std::array<std::int64_t, kNumMemLevels> usage{};
  for (int step = 0; step < n; ++step) {
    for (int lvl = 0; lvl < kNumMemLevels; ++lvl) usage[lvl] += diff[lvl][step];
    for (int lvl = kNumMemLevels - 1; lvl >= 0; --lvl)
      if (usage[lvl] > hw.cap(lvl)) out.push_back({step, lvl, usage[lvl] - hw.cap(lvl)});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Rectification
// ---------------------------------------------------------------------------

// Spills until valid: at the earliest violated step (fastest level first),
// move the largest offending tensor one level slower. Ties on size go to the
// lower node index, weights before activations. Returns the valid map and
// the re-assigned bytes ratio epsilon.
inline std::pair<MappingDecision, double> rectify(const WorkloadGraph& g,
                                                  const HardwareModel& hw,
                                                  const MappingDecision& proposed) {
  MappingDecision m = proposed.canonical(g);
  const std::vector<TensorLife> lives = tensor_lives(g);
  while (true) {
    const auto viols = check_capacity(g, hw, m);
    if (viols.empty()) break;
    const CapacityViolation v = viols.front();
    if (v.level == kDram)
      throw ConfigError("DRAM capacity cannot hold the workload; hardware misconfigured");
    const TensorLife* pick = nullptr;
    for (const TensorLife& t : lives) {
      const int lvl = t.is_weight ? m.weight_mem[t.node] : m.act_mem[t.node];
      if (lvl != v.level || t.start > v.step || t.end < v.step) continue;
      if (pick == nullptr || t.bytes > pick->bytes ||
          (t.bytes == pick->bytes &&
           (t.node < pick->node || (t.node == pick->node && t.is_weight && !pick->is_weight))))
        pick = &t;
    }
    // A violated level always has at least one live tensor on it.
    if (pick->is_weight)
      m.weight_mem[pick->node] = static_cast<std::uint8_t>(v.level - 1);
    else
      m.act_mem[pick->node] = static_cast<std::uint8_t>(v.level - 1);
  }
  const MappingDecision base = proposed.canonical(g);
  std::int64_t moved = 0;
  for (const TensorLife& t : lives) {
    const int was = t.is_weight ? base.weight_mem[t.node] : base.act_mem[t.node];
    const int now = t.is_weight ? m.weight_mem[t.node] : m.act_mem[t.node];
    if (was != now) moved += t.bytes;
  }
  const double eps = static_cast<double>(moved) / static_cast<double>(g.total_mappable_bytes());
  return {m, eps};
}

// ---------------------------------------------------------------------------
// Latency model
// ---------------------------------------------------------------------------

inline std::int64_t node_compute_ops(const NodeFeatures& f) {
  switch (static_cast<OpKind>(f.op_id)) {
    case OpKind::kConv:
      return f.ofm_size * f.kernel_x * f.kernel_y * f.ifm_z;
    case OpKind::kFc:
      return f.ifm_size * f.ofm_size;
    default:
      return f.ofm_size;
  }
}

// Serial roofline: per node, max(compute time, memory time), summed in
// topological order. A node reads its weights from their level, reads each
// predecessor's activation from the producer's level, and writes its own
// activation to its own level.
inline double simulate_latency(const WorkloadGraph& g, const HardwareModel& hw,
                               const MappingDecision& m) {
  if (!check_capacity(g, hw, m).empty())
    throw std::invalid_argument("simulate_latency requires a valid mapping");
  double total = 0.0;
  for (int i = 0; i < g.n(); ++i) {
    const NodeFeatures& f = g.nodes[i];
    const double compute = static_cast<double>(node_compute_ops(f)) / hw.compute_rate;
    double mem = 0.0;
    if (f.weight_size > 0) mem += static_cast<double>(f.weight_size) / hw.bw(m.weight_mem[i]);
    for (int p : g.preds[i]) mem += static_cast<double>(g.activation_bytes[p]) / hw.bw(m.act_mem[p]);
    mem += static_cast<double>(g.activation_bytes[i]) / hw.bw(m.act_mem[i]);
    total += std::max(compute, mem);
  }
  return total;
}

// ---------------------------------------------------------------------------
// Compiler heuristic
// ---------------------------------------------------------------------------

// Greedy fastest-first without lookahead: walk nodes in topological order,
// weights before the activation, and put each tensor in the fastest level
// whose remaining liveness-feasible capacity admits it. Always valid.
inline MappingDecision compiler_map(const WorkloadGraph& g, const HardwareModel& hw) {
  if (!check_capacity(g, hw, MappingDecision::uniform(g.n(), kDram)).empty())
    throw ConfigError("DRAM capacity cannot hold the workload; hardware misconfigured");
  const int n = g.n();
  std::array<std::vector<std::int64_t>, kNumMemLevels> usage;
  for (auto& u : usage) u.assign(n, 0);

  auto place = [&](std::int64_t bytes, int start, int end) -> int {
    for (int lvl = kNumMemLevels - 1; lvl >= 0; --lvl) {
      bool fits = true;
      for (int t = start; t <= end && fits; ++t)
        fits = usage[lvl][t] + bytes <= hw.cap(lvl);
      if (fits) {
        for (int t = start; t <= end; ++t) usage[lvl][t] += bytes;
        return lvl;
      }
    }
    return kDram;  // unreachable: DRAM feasibility checked above
  };

  MappingDecision m = MappingDecision::uniform(n, kDram);
  for (int i = 0; i < n; ++i) {
    if (g.nodes[i].weight_size > 0)
      m.weight_mem[i] = static_cast<std::uint8_t>(place(g.nodes[i].weight_size, i, n - 1));
    m.act_mem[i] = static_cast<std::uint8_t>(place(g.activation_bytes[i], i, g.last_consumer[i]));
  }
  return m;
}

// ---------------------------------------------------------------------------
// Reward
// ---------------------------------------------------------------------------

struct EvalResult {
  bool valid = false;
  double epsilon = 0.0;
  std::optional<double> latency;  // seconds; present iff a valid path executed
  double omega = 0.0;             // 1/latency when valid
  double reward = 0.0;
  MappingDecision rectified;
};

// Valid proposals run "inference" and score (omega/omega_baseline)^2;
// invalid proposals score -invalid_penalty * epsilon and skip execution.
inline EvalResult compute_reward(const WorkloadGraph& g, const HardwareModel& hw,
                                 const MappingDecision& m, double omega_baseline,
                                 double invalid_penalty = 1.0) {
  if (omega_baseline <= 0) throw std::invalid_argument("omega_baseline must be > 0");
  EvalResult r;
  auto [rectified, eps] = rectify(g, hw, m);
  r.rectified = std::move(rectified);
  r.epsilon = eps;
  if (eps == 0.0) {
    r.valid = true;
    const double lat = simulate_latency(g, hw, r.rectified);
    r.latency = lat;
    r.omega = 1.0 / lat;
    const double ratio = r.omega / omega_baseline;
    r.reward = ratio * ratio;
  } else {
    r.valid = false;
    r.reward = -invalid_penalty * eps;
  }
  return r;
}

// Speedup metric: >1 improves on the baseline, (0,1) degrades, 0 is reserved
// for invalid mappings.
inline double speedup_of(const EvalResult& r, double omega_baseline) {
  return r.valid ? r.omega / omega_baseline : 0.0;
}

}  // namespace egrl
