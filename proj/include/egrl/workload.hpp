// SPDX-License-Identifier: Apache-2.0
//
// DNN workloads as featured DAGs: each node is an operational layer carrying
// 19 integer features; edges are featureless (all tensor information lives in
// the source node). Includes synthetic generators, the canonical JSON file
// format, and the standardized feature matrix fed to graph policies.
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "egrl/errors.hpp"
#include "egrl/mat.hpp"
#include "egrl/rng.hpp"

namespace egrl {

// Activations are sized in elements; one byte per element keeps all cost
// arithmetic exact in integers (weights are already byte counts).
inline constexpr std::int64_t kElementBytes = 1;

inline constexpr int kNumNodeFeatures = 19;

// Operation vocabulary; encoded as a single integer feature.
enum class OpKind : int {
  kConv = 0,
  kFc = 1,
  kPool = 2,
  kAdd = 3,
  kConcat = 4,
  kNorm = 5,
  kAct = 6,
  kEmbed = 7,
};

inline constexpr int kNumOpKinds = 8;

inline bool op_has_weights(OpKind k) {
  return k == OpKind::kConv || k == OpKind::kFc || k == OpKind::kNorm ||
         k == OpKind::kEmbed;
}

// One node's features, in file order: op_id, weight_size, ifm_x, ifm_y,
// ifm_z, ofm_x, ofm_y, ofm_z, ifm_size, ofm_size, n_ops_left, n_w_left,
// groups, kernel_x, kernel_y, stride, pad, dilation, batch.
struct NodeFeatures {
  std::int64_t op_id = 0;
  std::int64_t weight_size = 0;  // bytes; 0 for weight-less ops
  std::int64_t ifm_x = 1, ifm_y = 1, ifm_z = 1;
  std::int64_t ofm_x = 1, ofm_y = 1, ofm_z = 1;
  std::int64_t ifm_size = 1;  // = ifm_x * ifm_y * ifm_z
  std::int64_t ofm_size = 1;  // = ofm_x * ofm_y * ofm_z
  std::int64_t n_ops_left = 0;
  std::int64_t n_w_left = 0;
  std::int64_t groups = 0, kernel_x = 0, kernel_y = 0, stride = 0, pad = 0,
               dilation = 0;  // convolution parameters, 0 when not conv
  std::int64_t batch = 1;

  std::array<std::int64_t, kNumNodeFeatures> to_array() const {
    return {op_id, weight_size, ifm_x, ifm_y, ifm_z, ofm_x, ofm_y, ofm_z,
            ifm_size, ofm_size, n_ops_left, n_w_left, groups, kernel_x,
            kernel_y, stride, pad, dilation, batch};
  }

  static NodeFeatures from_array(const std::array<std::int64_t, kNumNodeFeatures>& a) {
    NodeFeatures f;
    f.op_id = a[0]; f.weight_size = a[1];
    f.ifm_x = a[2]; f.ifm_y = a[3]; f.ifm_z = a[4];
    f.ofm_x = a[5]; f.ofm_y = a[6]; f.ofm_z = a[7];
    f.ifm_size = a[8]; f.ofm_size = a[9];
    f.n_ops_left = a[10]; f.n_w_left = a[11];
    f.groups = a[12]; f.kernel_x = a[13]; f.kernel_y = a[14];
    f.stride = a[15]; f.pad = a[16]; f.dilation = a[17];
    f.batch = a[18];
    return f;
  }

  bool operator==(const NodeFeatures&) const = default;
};

// Immutable after construction; share freely across parallel evaluators.
struct WorkloadGraph {
  std::string name;
  std::vector<NodeFeatures> nodes;
  std::vector<std::pair<int, int>> edges;  // (src, dst), src < dst, sorted

  // Derived (filled by finalize):
  std::vector<std::int64_t> activation_bytes;  // per node, ofm_size * kElementBytes
  std::vector<std::vector<int>> preds, succs;
  std::vector<int> last_consumer;             // own index when no consumer
  std::vector<std::vector<int>> neighborhoods;  // {v} ∪ in(v) ∪ out(v), sorted

  int n() const { return static_cast<int>(nodes.size()); }

  std::int64_t total_weight_bytes() const {
    std::int64_t s = 0;
    for (const auto& f : nodes) s += f.weight_size;
    return s;
  }
  std::int64_t total_activation_bytes() const {
    std::int64_t s = 0;
    for (auto b : activation_bytes) s += b;
    return s;
  }
  // All bytes a mapping places: resident weights plus activations.
  std::int64_t total_mappable_bytes() const {
    return total_weight_bytes() + total_activation_bytes();
  }

  bool operator==(const WorkloadGraph& o) const {
    return name == o.name && nodes == o.nodes && edges == o.edges;
  }
};

namespace detail {

[[noreturn]] inline void schema_fail(const std::string& msg) { throw SchemaError(msg); }

inline void check_dag_and_canonical(const WorkloadGraph& g) {
  const int n = g.n();
  std::vector<int> indeg(n, 0);
  std::vector<std::vector<int>> adj(n);
  for (auto [s, d] : g.edges) {
    if (s < 0 || s >= n || d < 0 || d >= n)
      schema_fail("edge (" + std::to_string(s) + "," + std::to_string(d) + ") out of range");
    if (s == d) schema_fail("self edge at node " + std::to_string(s));
    adj[s].push_back(d);
    indeg[d]++;
  }
  // Kahn; cycle detection comes before any ordering complaint.
  std::vector<int> q;
  for (int i = 0; i < n; ++i)
    if (indeg[i] == 0) q.push_back(i);
  int seen = 0;
  while (!q.empty()) {
    int v = q.back();
    q.pop_back();
    ++seen;
    for (int d : adj[v])
      if (--indeg[d] == 0) q.push_back(d);
  }
  if (seen != n) schema_fail("cycle detected in workload graph");
  for (auto [s, d] : g.edges)
    if (s >= d)
      schema_fail("edge (" + std::to_string(s) + "," + std::to_string(d) +
                  ") violates canonical topological node order");
}

inline void check_node_features(const WorkloadGraph& g) {
  const int n = g.n();
  std::vector<std::int64_t> w_suffix(n + 1, 0);
  for (int i = n - 1; i >= 0; --i)
    w_suffix[i] = w_suffix[i + 1] + (g.nodes[i].weight_size > 0 ? 1 : 0);
  for (int i = 0; i < n; ++i) {
    const NodeFeatures& f = g.nodes[i];
    const std::string at = "node " + std::to_string(i) + ": ";
    if (f.op_id < 0 || f.op_id >= kNumOpKinds)
      schema_fail(at + "op_id " + std::to_string(f.op_id) + " outside vocabulary");
    if (f.weight_size < 0) schema_fail(at + "negative weight_size");
    if (f.ifm_x < 1 || f.ifm_y < 1 || f.ifm_z < 1 || f.ofm_x < 1 || f.ofm_y < 1 || f.ofm_z < 1)
      schema_fail(at + "feature-map dimensions must be >= 1");
    if (f.ifm_size != f.ifm_x * f.ifm_y * f.ifm_z)
      schema_fail(at + "ifm_size=" + std::to_string(f.ifm_size) +
                  " but ifm_x*ifm_y*ifm_z=" + std::to_string(f.ifm_x * f.ifm_y * f.ifm_z));
    if (f.ofm_size != f.ofm_x * f.ofm_y * f.ofm_z)
      schema_fail(at + "ofm_size=" + std::to_string(f.ofm_size) +
                  " but ofm_x*ofm_y*ofm_z=" + std::to_string(f.ofm_x * f.ofm_y * f.ofm_z));
    if (f.batch != 1) schema_fail(at + "batch must be 1");
    const bool conv = f.op_id == static_cast<int>(OpKind::kConv);
    if (conv) {
      if (f.groups < 1 || f.kernel_x < 1 || f.kernel_y < 1 || f.stride < 1 ||
          f.dilation < 1 || f.pad < 0)
        schema_fail(at + "invalid convolution parameters");
    } else {
      if (f.groups != 0 || f.kernel_x != 0 || f.kernel_y != 0 || f.stride != 0 ||
          f.pad != 0 || f.dilation != 0)
        schema_fail(at + "convolution parameters must be 0 for non-conv op");
    }
    if (f.n_ops_left != n - 1 - i)
      schema_fail(at + "n_ops_left=" + std::to_string(f.n_ops_left) + " expected " +
                  std::to_string(n - 1 - i));
    if (f.n_w_left != w_suffix[i + 1])
      schema_fail(at + "n_w_left=" + std::to_string(f.n_w_left) + " expected " +
                  std::to_string(w_suffix[i + 1]));
  }
}

}  // namespace detail

// Validates invariants and fills derived fields. Nodes must already be in
// canonical topological order (all edges point forward).
inline WorkloadGraph finalize_workload(WorkloadGraph g) {
  if (g.nodes.empty()) detail::schema_fail("workload has no nodes");
  std::sort(g.edges.begin(), g.edges.end());
  for (std::size_t i = 1; i < g.edges.size(); ++i)
    if (g.edges[i] == g.edges[i - 1])
      detail::schema_fail("duplicate edge (" + std::to_string(g.edges[i].first) + "," +
                          std::to_string(g.edges[i].second) + ")");
  detail::check_dag_and_canonical(g);
  detail::check_node_features(g);

  const int n = g.n();
  g.activation_bytes.resize(n);
  for (int i = 0; i < n; ++i) g.activation_bytes[i] = g.nodes[i].ofm_size * kElementBytes;
  g.preds.assign(n, {});
  g.succs.assign(n, {});
  for (auto [s, d] : g.edges) {
    g.succs[s].push_back(d);
    g.preds[d].push_back(s);
  }
  g.last_consumer.resize(n);
  for (int i = 0; i < n; ++i)
    g.last_consumer[i] = g.succs[i].empty() ? i : *std::max_element(g.succs[i].begin(), g.succs[i].end());
  g.neighborhoods.assign(n, {});
  for (int v = 0; v < n; ++v) {
    auto& nb = g.neighborhoods[v];
    nb.push_back(v);
    nb.insert(nb.end(), g.preds[v].begin(), g.preds[v].end());
    nb.insert(nb.end(), g.succs[v].begin(), g.succs[v].end());
    std::sort(nb.begin(), nb.end());
    nb.erase(std::unique(nb.begin(), nb.end()), nb.end());
  }
  return g;
}

// Recomputes the order-derived features from scratch; generator helper.
inline void recompute_order_features(std::vector<NodeFeatures>& nodes) {
  const int n = static_cast<int>(nodes.size());
  std::int64_t w_after = 0;
  for (int i = n - 1; i >= 0; --i) {
    nodes[i].n_ops_left = n - 1 - i;
    nodes[i].n_w_left = w_after;
    if (nodes[i].weight_size > 0) ++w_after;
  }
}

// ---------------------------------------------------------------------------
// Canonical file format (schema 1)
// ---------------------------------------------------------------------------

inline nlohmann::ordered_json workload_to_json(const WorkloadGraph& g) {
  nlohmann::ordered_json j;
  j["schema"] = 1;
  j["name"] = g.name;
  auto& nodes = j["nodes"] = nlohmann::ordered_json::array();
  for (const auto& f : g.nodes) nodes.push_back(f.to_array());
  auto& edges = j["edges"] = nlohmann::ordered_json::array();
  for (auto [s, d] : g.edges) edges.push_back({s, d});
  return j;
}

inline WorkloadGraph workload_from_json(const nlohmann::json& j) {
  if (!j.is_object()) detail::schema_fail("workload file is not a JSON object");
  if (!j.contains("schema") || !j["schema"].is_number_integer() || j["schema"].get<int>() != 1)
    detail::schema_fail("workload schema version must be 1");
  WorkloadGraph g;
  if (!j.contains("name") || !j["name"].is_string()) detail::schema_fail("missing 'name'");
  g.name = j["name"].get<std::string>();
  if (!j.contains("nodes") || !j["nodes"].is_array()) detail::schema_fail("missing 'nodes' array");
  for (const auto& row : j["nodes"]) {
    if (!row.is_array() || row.size() != kNumNodeFeatures)
      detail::schema_fail("node " + std::to_string(g.nodes.size()) + ": expected " +
                          std::to_string(kNumNodeFeatures) + " features");
    std::array<std::int64_t, kNumNodeFeatures> a{};
    for (int k = 0; k < kNumNodeFeatures; ++k) {
      if (!row[k].is_number_integer())
        detail::schema_fail("node " + std::to_string(g.nodes.size()) + ": feature " +
                            std::to_string(k) + " is not an integer");
      a[k] = row[k].get<std::int64_t>();
    }
    g.nodes.push_back(NodeFeatures::from_array(a));
  }
  if (!j.contains("edges") || !j["edges"].is_array()) detail::schema_fail("missing 'edges' array");
  for (const auto& e : j["edges"]) {
    if (!e.is_array() || e.size() != 2 || !e[0].is_number_integer() || !e[1].is_number_integer())
      detail::schema_fail("edges must be [src,dst] integer pairs");
    g.edges.emplace_back(e[0].get<int>(), e[1].get<int>());
  }
  return finalize_workload(std::move(g));
}

inline void store_workload(const WorkloadGraph& g, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot open '" + path + "' for writing");
  out << workload_to_json(g).dump(1) << "\n";
}

inline WorkloadGraph load_workload(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open workload file '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    detail::schema_fail(std::string("workload file '") + path + "' is not valid JSON: " + e.what());
  }
  return workload_from_json(j);
}

// ---------------------------------------------------------------------------
// Synthetic generators
// ---------------------------------------------------------------------------

enum class SyntheticKind { kChain, kResnetLike, kBertLike };

inline const char* to_string(SyntheticKind k) {
  switch (k) {
    case SyntheticKind::kChain: return "chain";
    case SyntheticKind::kResnetLike: return "resnet_like";
    case SyntheticKind::kBertLike: return "bert_like";
  }
  return "?";
}

inline SyntheticKind synthetic_kind_from_string(const std::string& s) {
  if (s == "chain") return SyntheticKind::kChain;
  if (s == "resnet_like") return SyntheticKind::kResnetLike;
  if (s == "bert_like") return SyntheticKind::kBertLike;
  throw ConfigError("unknown workload kind '" + s + "'");
}

// Generated totals are forced past this floor so mapping never degenerates
// into "everything fits the fast levels". 1.5x the desk preset's combined
// LLC+SRAM capacity.
inline constexpr std::int64_t kMinSyntheticBytes = 42000;

namespace detail {

// Per-tensor sizes: log-uniform across ~2.5 decades, desk-preset scale.
inline std::int64_t draw_tensor_bytes(Rng& rng) {
  return static_cast<std::int64_t>(
      std::llround(std::exp(rng.uniform(std::log(64.0), std::log(16384.0)))));
}

inline void split_dims(std::int64_t target, std::int64_t& x, std::int64_t& y, std::int64_t& z) {
  x = std::max<std::int64_t>(1, std::llround(std::cbrt(static_cast<double>(target))));
  y = std::max<std::int64_t>(1, std::llround(std::sqrt(static_cast<double>(target) / x)));
  z = std::max<std::int64_t>(1, std::llround(static_cast<double>(target) / (x * y)));
}

}  // namespace detail

// Deterministic for fixed (kind, n_nodes, seed).
inline WorkloadGraph generate_synthetic(SyntheticKind kind, int n_nodes, std::uint64_t seed) {
  if (n_nodes < 1) throw ConfigError("n_nodes must be >= 1");
  const int n = n_nodes;
  Rng rng(derive_seed(seed, "workload", static_cast<std::uint64_t>(kind), static_cast<std::uint64_t>(n)));

  std::vector<OpKind> ops(n);
  std::vector<std::pair<int, int>> edges;
  switch (kind) {
    case SyntheticKind::kChain: {
      static constexpr OpKind cycle[6] = {OpKind::kConv, OpKind::kNorm, OpKind::kAct,
                                          OpKind::kConv, OpKind::kPool, OpKind::kFc};
      for (int i = 0; i < n; ++i) ops[i] = (i == 0) ? OpKind::kConv : cycle[i % 6];
      for (int i = 0; i + 1 < n; ++i) edges.emplace_back(i, i + 1);
      break;
    }
    case SyntheticKind::kResnetLike: {
      static constexpr OpKind cycle[3] = {OpKind::kConv, OpKind::kNorm, OpKind::kAct};
      for (int i = 0; i < n; ++i) ops[i] = cycle[i % 3];
      for (int i = 0; i + 1 < n; ++i) edges.emplace_back(i, i + 1);
      for (int i = 0; i + 4 < n; i += 4) {
        edges.emplace_back(i, i + 4);
        ops[i + 4] = OpKind::kAdd;  // skip-connection merge
      }
      break;
    }
    case SyntheticKind::kBertLike: {
      int tail = -1, i = 0;
      if (n >= 7) {  // leading embedding, then attention-ish blocks
        ops[0] = OpKind::kEmbed;
        tail = 0;
        i = 1;
      }
      while (n - i >= 6) {
        const int b = i;
        ops[b] = OpKind::kNorm;
        ops[b + 1] = OpKind::kFc;
        ops[b + 2] = OpKind::kFc;  // two attention-like branches
        ops[b + 3] = OpKind::kAdd;
        ops[b + 4] = OpKind::kFc;
        ops[b + 5] = OpKind::kAdd;  // block residual
        if (tail >= 0) edges.emplace_back(tail, b);
        edges.emplace_back(b, b + 1);
        edges.emplace_back(b, b + 2);
        edges.emplace_back(b + 1, b + 3);
        edges.emplace_back(b + 2, b + 3);
        edges.emplace_back(b + 3, b + 4);
        edges.emplace_back(b + 4, b + 5);
        edges.emplace_back(b, b + 5);
        tail = b + 5;
        i = b + 6;
      }
      static constexpr OpKind rest[3] = {OpKind::kFc, OpKind::kAct, OpKind::kNorm};
      for (int k = 0; i < n; ++i, ++k) {
        ops[i] = (i == 0) ? OpKind::kFc : rest[k % 3];
        if (tail >= 0) edges.emplace_back(tail, i);
        tail = i;
      }
      break;
    }
  }

  // Predecessor lists (needed to propagate ifm dims).
  std::vector<std::vector<int>> preds(n);
  for (auto [s, d] : edges) preds[d].push_back(s);
  for (auto& p : preds) std::sort(p.begin(), p.end());

  std::vector<NodeFeatures> nodes(n);
  for (int i = 0; i < n; ++i) {
    NodeFeatures& f = nodes[i];
    f.op_id = static_cast<int>(ops[i]);
    detail::split_dims(detail::draw_tensor_bytes(rng), f.ofm_x, f.ofm_y, f.ofm_z);
    f.weight_size = op_has_weights(ops[i]) ? detail::draw_tensor_bytes(rng) : 0;
    if (ops[i] == OpKind::kConv) {
      static constexpr std::int64_t kernels[3] = {1, 3, 5};
      f.kernel_x = f.kernel_y = kernels[rng.below(3)];
      f.stride = 1 + static_cast<std::int64_t>(rng.below(2));
      f.pad = (f.kernel_x - 1) / 2;
      f.dilation = 1;
      f.groups = 1;
    }
    f.batch = 1;
  }

  // Force totals past the floor so fast memory stays contended.
  auto total_bytes = [&]() {
    std::int64_t t = 0;
    for (const auto& f : nodes) t += f.weight_size + f.ofm_x * f.ofm_y * f.ofm_z * kElementBytes;
    return t;
  };
  for (int guard = 0; guard < 64 && total_bytes() < kMinSyntheticBytes; ++guard) {
    const double f = 1.05 * static_cast<double>(kMinSyntheticBytes) / static_cast<double>(total_bytes());
    for (auto& nf : nodes) {
      if (nf.weight_size > 0)
        nf.weight_size = std::max<std::int64_t>(1, std::llround(nf.weight_size * f));
      nf.ofm_z = std::max<std::int64_t>(1, std::llround(nf.ofm_z * f));
    }
  }

  for (int i = 0; i < n; ++i) {
    NodeFeatures& f = nodes[i];
    f.ofm_size = f.ofm_x * f.ofm_y * f.ofm_z;
    if (preds[i].empty()) {
      std::int64_t x, y, z;
      detail::split_dims(detail::draw_tensor_bytes(rng), x, y, z);
      f.ifm_x = x; f.ifm_y = y; f.ifm_z = z;
    } else {
      const NodeFeatures& p = nodes[preds[i][0]];
      f.ifm_x = p.ofm_x; f.ifm_y = p.ofm_y; f.ifm_z = p.ofm_z;
    }
    f.ifm_size = f.ifm_x * f.ifm_y * f.ifm_z;
  }
  recompute_order_features(nodes);

  WorkloadGraph g;
  std::ostringstream name;
  name << to_string(kind) << "_" << n << "_s" << seed;
  g.name = name.str();
  g.nodes = std::move(nodes);
  g.edges = std::move(edges);
  return finalize_workload(std::move(g));
}

// ---------------------------------------------------------------------------
// Feature matrix
// ---------------------------------------------------------------------------

// Per-column standardization constants; stddev 0 marks a constant column
// (mapped to all-zeros). Reusable on a different graph for transfer runs.
struct FeatureScaler {
  std::array<double, kNumNodeFeatures> mean{};
  std::array<double, kNumNodeFeatures> stddev{};
};

inline Mat raw_feature_matrix(const WorkloadGraph& g) {
  Mat x(g.n(), kNumNodeFeatures);
  for (int i = 0; i < g.n(); ++i) {
    const auto a = g.nodes[i].to_array();
    for (int k = 0; k < kNumNodeFeatures; ++k) x(i, k) = static_cast<double>(a[k]);
  }
  return x;
}

inline FeatureScaler fit_scaler(const WorkloadGraph& g) {
  const Mat x = raw_feature_matrix(g);
  FeatureScaler s;
  for (int k = 0; k < kNumNodeFeatures; ++k) {
    double mean = 0.0;
    for (int i = 0; i < x.rows; ++i) mean += x(i, k);
    mean /= x.rows;
    double var = 0.0;
    for (int i = 0; i < x.rows; ++i) {
      const double d = x(i, k) - mean;
      var += d * d;
    }
    var /= x.rows;
    s.mean[k] = mean;
    const double sd = std::sqrt(var);
    s.stddev[k] = (sd > 1e-12 * std::max(1.0, std::abs(mean))) ? sd : 0.0;
  }
  return s;
}

inline Mat apply_scaler(const WorkloadGraph& g, const FeatureScaler& s) {
  Mat x = raw_feature_matrix(g);
  for (int k = 0; k < kNumNodeFeatures; ++k)
    for (int i = 0; i < x.rows; ++i)
      x(i, k) = s.stddev[k] > 0.0 ? (x(i, k) - s.mean[k]) / s.stddev[k] : 0.0;
  return x;
}

// N x 19 standardized feature matrix plus the scaler that produced it.
inline std::pair<Mat, FeatureScaler> feature_matrix(const WorkloadGraph& g) {
  FeatureScaler s = fit_scaler(g);
  return {apply_scaler(g, s), s};
}

}  // namespace egrl
