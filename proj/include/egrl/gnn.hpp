// SPDX-License-Identifier: Apache-2.0
//
// Graph policy network: standardized node features in, per-node logits out
// (two independent 3-way categoricals: weight tensor level, activation
// level). A flat stack of attention message-passing layers with residual
// connections and tanh nonlinearities; hand-written reverse-mode backward.
//
// Flat parameter layout (row-major matrices):
//   W_in[in_dim x H], b_in[H],
//   for each layer l in 0..D-1:
//     for each head h in 0..A-1: W_h[H x d], a_src[d], a_dst[d]   (d = H/A)
//     W_u[H x H], b_u[H]
//   W_out[H x out_dim], b_out[out_dim]
#pragma once

#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "egrl/errors.hpp"
#include "egrl/hwsim.hpp"
#include "egrl/mat.hpp"
#include "egrl/rng.hpp"
#include "egrl/workload.hpp"

namespace egrl {

inline constexpr int kPolicyOutDim = 6;  // [0,3) weight levels, [3,6) activation levels
inline constexpr double kProbFloor = 1e-12;

struct GnnConfig {
  int in_dim = kNumNodeFeatures;
  int hidden = 128;
  int depth = 4;
  int heads = 4;
  int out_dim = kPolicyOutDim;
  bool attention = true;  // false: plain mean aggregation over the neighborhood

  int head_dim() const { return hidden / heads; }

  void validate() const {
    if (in_dim < 1 || hidden < 1 || depth < 0 || heads < 1 || out_dim < 1)
      throw ConfigError("invalid GNN dimensions");
    if (hidden % heads != 0) throw ConfigError("hidden size must be divisible by heads");
  }

  static GnnConfig paper_policy() { return {kNumNodeFeatures, 128, 4, 4, kPolicyOutDim, true}; }
  static GnnConfig desk_policy() { return {kNumNodeFeatures, 32, 2, 2, kPolicyOutDim, true}; }
};

inline std::size_t gnn_param_count(const GnnConfig& c) {
  const std::size_t H = c.hidden, d = c.head_dim();
  const std::size_t per_head = H * d + 2 * d;
  const std::size_t per_layer = c.heads * per_head + H * H + H;
  return c.in_dim * H + H + c.depth * per_layer + H * c.out_dim + c.out_dim;
}

// Offsets into the flat vector.
struct GnnLayout {
  std::size_t w_in, b_in, layers, per_layer, per_head, w_out, b_out, total;
  int H, d, A;

  explicit GnnLayout(const GnnConfig& c) {
    c.validate();
    H = c.hidden;
    d = c.head_dim();
    A = c.heads;
    per_head = static_cast<std::size_t>(H) * d + 2 * d;
    per_layer = A * per_head + static_cast<std::size_t>(H) * H + H;
    w_in = 0;
    b_in = w_in + static_cast<std::size_t>(c.in_dim) * H;
    layers = b_in + H;
    w_out = layers + static_cast<std::size_t>(c.depth) * per_layer;
    b_out = w_out + static_cast<std::size_t>(H) * c.out_dim;
    total = b_out + c.out_dim;
  }

  std::size_t w_h(int l, int h) const { return layers + l * per_layer + h * per_head; }
  std::size_t a_src(int l, int h) const { return w_h(l, h) + static_cast<std::size_t>(H) * d; }
  std::size_t a_dst(int l, int h) const { return a_src(l, h) + d; }
  std::size_t w_u(int l) const { return layers + l * per_layer + A * per_head; }
  std::size_t b_u(int l) const { return w_u(l) + static_cast<std::size_t>(H) * H; }
};

struct GnnParams {
  GnnConfig cfg;
  std::vector<double> w;
};

inline GnnParams gnn_zero(const GnnConfig& cfg) {
  cfg.validate();
  return {cfg, std::vector<double>(gnn_param_count(cfg), 0.0)};
}

// Seeded uniform +-1/sqrt(fan_in) for matrices and attention vectors; zero
// biases.
inline GnnParams gnn_init(const GnnConfig& cfg, std::uint64_t seed) {
  GnnParams p = gnn_zero(cfg);
  const GnnLayout L(cfg);
  Rng rng(derive_seed(seed, "gnn_init"));
  auto fill = [&](std::size_t off, std::size_t count, int fan_in) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    for (std::size_t i = 0; i < count; ++i) p.w[off + i] = rng.uniform(-bound, bound);
  };
  fill(L.w_in, static_cast<std::size_t>(cfg.in_dim) * cfg.hidden, cfg.in_dim);
  for (int l = 0; l < cfg.depth; ++l) {
    for (int h = 0; h < cfg.heads; ++h) {
      fill(L.w_h(l, h), static_cast<std::size_t>(L.H) * L.d, L.H);
      fill(L.a_src(l, h), L.d, L.d);
      fill(L.a_dst(l, h), L.d, L.d);
    }
    fill(L.w_u(l), static_cast<std::size_t>(L.H) * L.H, L.H);
  }
  fill(L.w_out, static_cast<std::size_t>(L.H) * cfg.out_dim, L.H);
  return p;
}

// flatten/unflatten are the population-side view of a genome; round trips
// are bit-exact by construction.
inline std::vector<double> flatten(const GnnParams& p) { return p.w; }

inline GnnParams unflatten(const GnnConfig& cfg, std::vector<double> w) {
  if (w.size() != gnn_param_count(cfg))
    throw std::invalid_argument("parameter vector length " + std::to_string(w.size()) +
                                " does not match layout size " +
                                std::to_string(gnn_param_count(cfg)));
  return {cfg, std::move(w)};
}

// ---------------------------------------------------------------------------
// Forward / backward
// ---------------------------------------------------------------------------

namespace mm {

// Non-owning const view into a flat buffer (parameter slices).
struct View {
  int rows, cols;
  const double* d;
  const double* row(int r) const { return d + static_cast<std::size_t>(r) * cols; }
};

// Mutable view (gradient slices).
struct MutView {
  int rows, cols;
  double* d;
  double* row(int r) { return d + static_cast<std::size_t>(r) * cols; }
};

// C += A * B   (A: n x k, B: k x m, C: n x m)
template <class C, class A, class B>
inline void addmm(C& c, const A& a, const B& b) {
  for (int i = 0; i < a.rows; ++i) {
    const double* ai = a.row(i);
    double* ci = c.row(i);
    for (int k = 0; k < a.cols; ++k) {
      const double v = ai[k];
      if (v == 0.0) continue;
      const double* bk = b.row(k);
      for (int j = 0; j < b.cols; ++j) ci[j] += v * bk[j];
    }
  }
}

// C += A^T * B  (A: n x k, B: n x m, C: k x m)
template <class C, class A, class B>
inline void addmm_at(C& c, const A& a, const B& b) {
  for (int i = 0; i < a.rows; ++i) {
    const double* ai = a.row(i);
    const double* bi = b.row(i);
    for (int k = 0; k < a.cols; ++k) {
      const double v = ai[k];
      if (v == 0.0) continue;
      double* ck = c.row(k);
      for (int j = 0; j < b.cols; ++j) ck[j] += v * bi[j];
    }
  }
}

// C += A * B^T  (A: n x k, B: m x k, C: n x m)
template <class C, class A, class B>
inline void addmm_bt(C& c, const A& a, const B& b) {
  for (int i = 0; i < a.rows; ++i) {
    const double* ai = a.row(i);
    double* ci = c.row(i);
    for (int j = 0; j < b.rows; ++j) {
      const double* bj = b.row(j);
      double s = 0.0;
      for (int k = 0; k < a.cols; ++k) s += ai[k] * bj[k];
      ci[j] += s;
    }
  }
}

}  // namespace mm

// Per-call caches; reusable across forwards of the same shape.
struct GnnWorkspace {
  Mat x0;        // N x in
  Mat h0;        // N x H (post-tanh)
  struct LayerWs {
    Mat xin;                    // layer input, N x H
    std::vector<Mat> z;         // per head, N x d
    std::vector<std::vector<double>> escore;  // per head, flattened over (v, nb idx)
    std::vector<std::vector<double>> alpha;   // same shape
    Mat msg;                    // N x H
    Mat t;                      // tanh(msg*W_u + b_u), N x H
    Mat xout;                   // xin + t
  };
  std::vector<LayerWs> layers;
  Mat logits;  // N x out
};

// Deterministic, pure in (params, features, graph). Permutation equivariant.
inline const Mat& gnn_forward(const GnnParams& p, const WorkloadGraph& g, const Mat& x0,
                              GnnWorkspace& ws) {
  const GnnConfig& c = p.cfg;
  const GnnLayout L(c);
  const int n = g.n();
  if (x0.rows != n || x0.cols != c.in_dim)
    throw std::invalid_argument("feature matrix shape mismatch");
  for (double v : x0.a)
    if (!std::isfinite(v)) throw std::invalid_argument("non-finite input feature");

  std::size_t nb_total = 0;
  for (const auto& nb : g.neighborhoods) nb_total += nb.size();

  ws.x0 = x0;
  const mm::View w_in{c.in_dim, c.hidden, p.w.data() + L.w_in};
  ws.h0 = Mat(n, c.hidden);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < c.hidden; ++j) ws.h0(i, j) = p.w[L.b_in + j];
  mm::addmm(ws.h0, x0, w_in);
  for (double& v : ws.h0.a) v = std::tanh(v);

  ws.layers.resize(c.depth);
  const Mat* x = &ws.h0;
  for (int l = 0; l < c.depth; ++l) {
    auto& lw = ws.layers[l];
    lw.xin = *x;
    lw.z.resize(c.heads);
    lw.escore.resize(c.heads);
    lw.alpha.resize(c.heads);
    lw.msg = Mat(n, c.hidden);
    for (int h = 0; h < c.heads; ++h) {
      const mm::View w_h{c.hidden, L.d, p.w.data() + L.w_h(l, h)};
      lw.z[h] = Mat(n, L.d);
      mm::addmm(lw.z[h], lw.xin, w_h);
      const double* asrc = p.w.data() + L.a_src(l, h);
      const double* adst = p.w.data() + L.a_dst(l, h);
      auto& escore = lw.escore[h];
      auto& alpha = lw.alpha[h];
      escore.assign(nb_total, 0.0);
      alpha.assign(nb_total, 0.0);
      std::size_t off = 0;
      for (int v = 0; v < n; ++v) {
        const auto& nb = g.neighborhoods[v];
        if (c.attention) {
          double dst_term = 0.0;
          const double* zv = lw.z[h].row(v);
          for (int k = 0; k < L.d; ++k) dst_term += adst[k] * zv[k];
          double emax = -2.0;  // tanh scores live in [-1, 1]
          for (std::size_t j = 0; j < nb.size(); ++j) {
            const double* zu = lw.z[h].row(nb[j]);
            double s = dst_term;
            for (int k = 0; k < L.d; ++k) s += asrc[k] * zu[k];
            const double e = std::tanh(s);
            escore[off + j] = e;
            if (e > emax) emax = e;
          }
          double denom = 0.0;
          for (std::size_t j = 0; j < nb.size(); ++j) {
            const double a = std::exp(escore[off + j] - emax);
            alpha[off + j] = a;
            denom += a;
          }
          for (std::size_t j = 0; j < nb.size(); ++j) alpha[off + j] /= denom;
        } else {
          const double u = 1.0 / static_cast<double>(nb.size());
          for (std::size_t j = 0; j < nb.size(); ++j) alpha[off + j] = u;
        }
        double* mv = lw.msg.row(v) + static_cast<std::size_t>(h) * L.d;
        for (std::size_t j = 0; j < nb.size(); ++j) {
          const double a = alpha[off + j];
          const double* zu = lw.z[h].row(nb[j]);
          for (int k = 0; k < L.d; ++k) mv[k] += a * zu[k];
        }
        off += nb.size();
      }
    }
    const mm::View w_u{c.hidden, c.hidden, p.w.data() + L.w_u(l)};
    lw.t = Mat(n, c.hidden);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < c.hidden; ++j) lw.t(i, j) = p.w[L.b_u(l) + j];
    mm::addmm(lw.t, lw.msg, w_u);
    for (double& v : lw.t.a) v = std::tanh(v);
    lw.xout = lw.xin;
    for (std::size_t i = 0; i < lw.xout.a.size(); ++i) lw.xout.a[i] += lw.t.a[i];
    x = &lw.xout;
  }

  const mm::View w_out{c.hidden, c.out_dim, p.w.data() + L.w_out};
  ws.logits = Mat(n, c.out_dim);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < c.out_dim; ++j) ws.logits(i, j) = p.w[L.b_out + j];
  mm::addmm(ws.logits, *x, w_out);
  return ws.logits;
}

// Reverse-mode gradient of any scalar loss expressed through the logits.
// `grad` accumulates (same layout as the flat parameter vector); pass
// `dx0` to also collect the adjoint of the input features.
inline void gnn_backward(const GnnParams& p, const WorkloadGraph& g, const GnnWorkspace& ws,
                         const Mat& dlogits, std::vector<double>& grad, Mat* dx0 = nullptr) {
  const GnnConfig& c = p.cfg;
  const GnnLayout L(c);
  const int n = g.n();
  if (grad.size() != p.w.size()) grad.assign(p.w.size(), 0.0);

  const Mat& xfinal = c.depth > 0 ? ws.layers.back().xout : ws.h0;
  {
    mm::MutView w_out_grad{c.hidden, c.out_dim, grad.data() + L.w_out};
    mm::addmm_at(w_out_grad, xfinal, dlogits);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < c.out_dim; ++j) grad[L.b_out + j] += dlogits(i, j);
  }
  Mat dx(n, c.hidden);
  mm::addmm_bt(dx, dlogits, mm::View{c.hidden, c.out_dim, p.w.data() + L.w_out});

  for (int l = c.depth - 1; l >= 0; --l) {
    const auto& lw = ws.layers[l];
    // Residual: dxin starts as dxout.
    Mat dt = dx;
    for (std::size_t i = 0; i < dt.a.size(); ++i) dt.a[i] *= 1.0 - lw.t.a[i] * lw.t.a[i];
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < c.hidden; ++j) grad[L.b_u(l) + j] += dt(i, j);
    {
      mm::MutView w_u_grad{c.hidden, c.hidden, grad.data() + L.w_u(l)};
      mm::addmm_at(w_u_grad, lw.msg, dt);
    }
    Mat dmsg(n, c.hidden);
    mm::addmm_bt(dmsg, dt, mm::View{c.hidden, c.hidden, p.w.data() + L.w_u(l)});

    for (int h = 0; h < c.heads; ++h) {
      const double* asrc = p.w.data() + L.a_src(l, h);
      const double* adst = p.w.data() + L.a_dst(l, h);
      double* dasrc = grad.data() + L.a_src(l, h);
      double* dadst = grad.data() + L.a_dst(l, h);
      Mat dz(n, L.d);
      const auto& alpha = lw.alpha[h];
      const auto& escore = lw.escore[h];
      std::size_t off = 0;
      std::vector<double> dalpha;
      for (int v = 0; v < n; ++v) {
        const auto& nb = g.neighborhoods[v];
        const double* dm = dmsg.row(v) + static_cast<std::size_t>(h) * L.d;
        if (c.attention) {
          dalpha.assign(nb.size(), 0.0);
          for (std::size_t j = 0; j < nb.size(); ++j) {
            const double* zu = lw.z[h].row(nb[j]);
            double s = 0.0;
            for (int k = 0; k < L.d; ++k) s += dm[k] * zu[k];
            dalpha[j] = s;
            double* dzu = dz.row(nb[j]);
            const double a = alpha[off + j];
            for (int k = 0; k < L.d; ++k) dzu[k] += a * dm[k];
          }
          double wsum = 0.0;
          for (std::size_t j = 0; j < nb.size(); ++j) wsum += alpha[off + j] * dalpha[j];
          for (std::size_t j = 0; j < nb.size(); ++j) {
            const double de = alpha[off + j] * (dalpha[j] - wsum);
            const double e = escore[off + j];
            const double ds = de * (1.0 - e * e);
            if (ds == 0.0) continue;
            const double* zu = lw.z[h].row(nb[j]);
            const double* zv = lw.z[h].row(v);
            double* dzu = dz.row(nb[j]);
            double* dzv = dz.row(v);
            for (int k = 0; k < L.d; ++k) {
              dasrc[k] += ds * zu[k];
              dadst[k] += ds * zv[k];
              dzu[k] += ds * asrc[k];
              dzv[k] += ds * adst[k];
            }
          }
        } else {
          const double u = 1.0 / static_cast<double>(nb.size());
          for (std::size_t j = 0; j < nb.size(); ++j) {
            double* dzu = dz.row(nb[j]);
            for (int k = 0; k < L.d; ++k) dzu[k] += u * dm[k];
          }
        }
        off += nb.size();
      }
      // dxin += dz * W_h^T (on top of the residual term already in dx)
      mm::addmm_bt(dx, dz, mm::View{c.hidden, L.d, p.w.data() + L.w_h(l, h)});
      mm::MutView w_h_grad{c.hidden, L.d, grad.data() + L.w_h(l, h)};
      mm::addmm_at(w_h_grad, lw.xin, dz);
    }
  }

  // Input projection.
  Mat dp = dx;
  for (std::size_t i = 0; i < dp.a.size(); ++i) dp.a[i] *= 1.0 - ws.h0.a[i] * ws.h0.a[i];
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < c.hidden; ++j) grad[L.b_in + j] += dp(i, j);
  {
    mm::MutView w_in_grad{c.in_dim, c.hidden, grad.data() + L.w_in};
    mm::addmm_at(w_in_grad, ws.x0, dp);
  }
  if (dx0 != nullptr) {
    *dx0 = Mat(n, c.in_dim);
    mm::addmm_bt(*dx0, dp, mm::View{c.in_dim, c.hidden, p.w.data() + L.w_in});
  }
}

// ---------------------------------------------------------------------------
// Policy head
// ---------------------------------------------------------------------------

struct PolicyOutput {
  Mat logits;  // N x 6
  Mat probs;   // N x 6; each 3-block sums to 1
};

inline PolicyOutput make_policy_output(Mat logits) {
  if (logits.cols != kPolicyOutDim) throw std::invalid_argument("policy output expects 6 logits per node");
  PolicyOutput out;
  out.probs = Mat(logits.rows, logits.cols);
  for (int i = 0; i < logits.rows; ++i) {
    for (int t = 0; t < 2; ++t) {
      const double* z = logits.row(i) + 3 * t;
      double* p = out.probs.row(i) + 3 * t;
      const double m = std::max(z[0], std::max(z[1], z[2]));
      double denom = 0.0;
      for (int k = 0; k < 3; ++k) {
        p[k] = std::exp(z[k] - m);
        denom += p[k];
      }
      for (int k = 0; k < 3; ++k) p[k] /= denom;
    }
  }
  out.logits = std::move(logits);
  return out;
}

inline PolicyOutput policy_forward(const GnnParams& p, const WorkloadGraph& g, const Mat& x0,
                                   GnnWorkspace& ws) {
  return make_policy_output(gnn_forward(p, g, x0, ws));
}

enum class SampleMode { kGreedy, kStochastic };

// Greedy: per-node-tensor argmax, ties to the lowest level index.
// Stochastic: independent categorical draws, deterministic under the seed.
inline MappingDecision sample_action(const PolicyOutput& out, SampleMode mode, std::uint64_t seed) {
  const int n = out.probs.rows;
  MappingDecision m;
  m.weight_mem.resize(n);
  m.act_mem.resize(n);
  Rng rng(derive_seed(seed, "sample_action"));
  for (int i = 0; i < n; ++i) {
    for (int t = 0; t < 2; ++t) {
      const double* p = out.probs.row(i) + 3 * t;
      int pick;
      if (mode == SampleMode::kGreedy) {
        pick = 0;
        for (int k = 1; k < 3; ++k)
          if (p[k] > p[pick]) pick = k;
      } else {
        pick = rng.categorical(p, 3);
      }
      (t == 0 ? m.weight_mem[i] : m.act_mem[i]) = static_cast<std::uint8_t>(pick);
    }
  }
  return m;
}

struct LogProbEntropy {
  double log_prob = 0.0;  // sum over node-tensors of the chosen category's log-prob
  double entropy = 0.0;   // mean entropy per node-tensor
};

inline LogProbEntropy log_prob_and_entropy(const PolicyOutput& out, const MappingDecision& a) {
  const int n = out.probs.rows;
  if (a.n() != n) throw std::invalid_argument("action length mismatch");
  LogProbEntropy r;
  for (int i = 0; i < n; ++i) {
    for (int t = 0; t < 2; ++t) {
      const double* p = out.probs.row(i) + 3 * t;
      const int chosen = t == 0 ? a.weight_mem[i] : a.act_mem[i];
      r.log_prob += std::log(std::max(p[chosen], kProbFloor));
      double h = 0.0;
      for (int k = 0; k < 3; ++k) {
        const double pk = std::max(p[k], kProbFloor);
        h -= p[k] * std::log(pk);
      }
      r.entropy += h;
    }
  }
  r.entropy /= 2.0 * n;
  return r;
}

// Mean entropy of a policy output without reference to an action.
inline double mean_entropy(const PolicyOutput& out) {
  double h = 0.0;
  for (int i = 0; i < out.probs.rows; ++i)
    for (int j = 0; j < out.probs.cols; ++j) {
      const double p = out.probs(i, j);
      h -= p * std::log(std::max(p, kProbFloor));
    }
  return h / (2.0 * out.probs.rows);
}

// ---------------------------------------------------------------------------
// Checkpoints: schema, H, D, A, parameter count, then raw little-endian
// float64s in layout order.
// ---------------------------------------------------------------------------

inline void save_checkpoint(const GnnParams& p, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot open '" + path + "' for writing");
  const std::uint32_t header[4] = {1u, static_cast<std::uint32_t>(p.cfg.hidden),
                                   static_cast<std::uint32_t>(p.cfg.depth),
                                   static_cast<std::uint32_t>(p.cfg.heads)};
  const std::uint64_t count = p.w.size();
  out.write(reinterpret_cast<const char*>(header), sizeof(header));
  out.write(reinterpret_cast<const char*>(&count), sizeof(count));
  out.write(reinterpret_cast<const char*>(p.w.data()), static_cast<std::streamsize>(count * sizeof(double)));
}

// Policy checkpoints fix in_dim=19 / out_dim=6; the aggregation mode is a
// run-config choice, not part of the file.
inline GnnParams load_checkpoint(const std::string& path, bool attention = true) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open checkpoint '" + path + "'");
  std::uint32_t header[4];
  std::uint64_t count = 0;
  in.read(reinterpret_cast<char*>(header), sizeof(header));
  in.read(reinterpret_cast<char*>(&count), sizeof(count));
  if (!in || header[0] != 1u) throw SchemaError("bad checkpoint header in '" + path + "'");
  GnnConfig cfg;
  cfg.hidden = static_cast<int>(header[1]);
  cfg.depth = static_cast<int>(header[2]);
  cfg.heads = static_cast<int>(header[3]);
  cfg.attention = attention;
  cfg.validate();
  if (count != gnn_param_count(cfg))
    throw SchemaError("checkpoint parameter count " + std::to_string(count) +
                      " does not match architecture (expected " +
                      std::to_string(gnn_param_count(cfg)) + ")");
  std::vector<double> w(count);
  in.read(reinterpret_cast<char*>(w.data()), static_cast<std::streamsize>(count * sizeof(double)));
  if (!in) throw SchemaError("truncated checkpoint '" + path + "'");
  return {cfg, std::move(w)};
}

}  // namespace egrl
