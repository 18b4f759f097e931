// SPDX-License-Identifier: Apache-2.0
//
// Discrete-action soft actor-critic over graph states. Twin critics share
// the policy's message-passing trunk but read [node features | 6-dim action]
// and mean-pool per-node scalars into one Q value. The actor update feeds
// the policy's probability tensor straight into the critic (exact
// expected-value form for discrete actions), so no sampling noise enters the
// actor gradient.
#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "egrl/boltzmann.hpp"
#include "egrl/gnn.hpp"
#include "egrl/hwsim.hpp"
#include "egrl/mat.hpp"
#include "egrl/replay.hpp"
#include "egrl/rng.hpp"
#include "egrl/workload.hpp"

namespace egrl {

inline constexpr int kActionDim = 6;

struct SacConfig {
  double critic_lr = 1e-3;
  double actor_lr = 1e-3;
  double alpha = 0.05;   // entropy coefficient
  double gamma = 0.99;   // discount
  double tau = 1e-3;     // target synchronization rate
  int batch_size = 24;
  double reward_scale = 5.0;  // applied at buffer-read time
  double noise_sigma = 0.1;   // critic-input action smoothing
  double noise_clip = 0.3;
  int grad_steps_per_env_step = 1;
};

inline GnnConfig critic_config(const GnnConfig& policy_cfg) {
  GnnConfig c = policy_cfg;
  c.in_dim = kNumNodeFeatures + kActionDim;
  c.out_dim = 1;
  return c;
}

// ---------------------------------------------------------------------------
// Adam
// ---------------------------------------------------------------------------

struct AdamState {
  std::vector<double> m, v;
  long t = 0;
};

inline void adam_step(std::vector<double>& w, const std::vector<double>& grad, AdamState& st,
                      double lr, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8) {
  if (st.m.size() != w.size()) {
    st.m.assign(w.size(), 0.0);
    st.v.assign(w.size(), 0.0);
    st.t = 0;
  }
  ++st.t;
  const double bc1 = 1.0 - std::pow(beta1, st.t);
  const double bc2 = 1.0 - std::pow(beta2, st.t);
  for (std::size_t i = 0; i < w.size(); ++i) {
    st.m[i] = beta1 * st.m[i] + (1 - beta1) * grad[i];
    st.v[i] = beta2 * st.v[i] + (1 - beta2) * grad[i] * grad[i];
    w[i] -= lr * (st.m[i] / bc1) / (std::sqrt(st.v[i] / bc2) + eps);
  }
}

// ---------------------------------------------------------------------------
// Actions as critic inputs
// ---------------------------------------------------------------------------

inline Mat one_hot_action(const MappingDecision& a) {
  Mat x(a.n(), kActionDim);
  for (int i = 0; i < a.n(); ++i) {
    x(i, a.weight_mem[i]) = 1.0;
    x(i, 3 + a.act_mem[i]) = 1.0;
  }
  return x;
}

// One-hot plus elementwise Gaussian noise clipped to [-c, c]; smooths the
// critic around the behavioral action.
inline Mat smooth_action(const MappingDecision& a, double sigma, double clip, std::uint64_t seed) {
  if (clip <= 0) throw std::invalid_argument("noise clip must be > 0");
  Mat x = one_hot_action(a);
  Rng rng(derive_seed(seed, "action_noise"));
  for (double& v : x.a) {
    const double e = rng.normal(0.0, sigma);
    v += std::min(clip, std::max(-clip, e));
  }
  return x;
}

// ---------------------------------------------------------------------------
// Critic evaluation
// ---------------------------------------------------------------------------

inline Mat concat_features_action(const Mat& feat, const Mat& action) {
  Mat x(feat.rows, feat.cols + action.cols);
  for (int i = 0; i < feat.rows; ++i) {
    for (int k = 0; k < feat.cols; ++k) x(i, k) = feat(i, k);
    for (int k = 0; k < action.cols; ++k) x(i, feat.cols + k) = action(i, k);
  }
  return x;
}

// Q(s, a) = mean over nodes of the trunk's per-node scalar.
inline double critic_value(const GnnParams& q, const WorkloadGraph& g, const Mat& feat,
                           const Mat& action, GnnWorkspace& ws) {
  const Mat& logits = gnn_forward(q, g, concat_features_action(feat, action), ws);
  double s = 0.0;
  for (int i = 0; i < logits.rows; ++i) s += logits(i, 0);
  return s / logits.rows;
}

// Adjoint of a scalar dQ through the mean-pool; optionally returns the
// adjoint of the 6 action input columns (the actor update path).
inline void critic_backward(const GnnParams& q, const WorkloadGraph& g, const GnnWorkspace& ws,
                            double dq, std::vector<double>& grad, Mat* daction = nullptr) {
  Mat dlogits(g.n(), 1);
  const double per_node = dq / g.n();
  for (double& v : dlogits.a) v = per_node;
  Mat dx0;
  gnn_backward(q, g, ws, dlogits, grad, daction != nullptr ? &dx0 : nullptr);
  if (daction != nullptr) {
    *daction = Mat(g.n(), kActionDim);
    for (int i = 0; i < g.n(); ++i)
      for (int k = 0; k < kActionDim; ++k) (*daction)(i, k) = dx0(i, kNumNodeFeatures + k);
  }
}

// ---------------------------------------------------------------------------
// Bellman target
// ---------------------------------------------------------------------------

// y = scaled r for terminal transitions (always the case with 1-step
// episodes); otherwise bootstraps with the min of the two target critics on
// a sampled next action plus the alpha-scaled policy entropy.
inline double critic_target(double reward, bool done, const PolicyOutput& next_out,
                            const GnnParams& target_q1, const GnnParams& target_q2,
                            const WorkloadGraph& g, const Mat& feat, const SacConfig& cfg,
                            std::uint64_t seed) {
  const double r = cfg.reward_scale * reward;
  if (done) return r;
  const MappingDecision next_a = sample_action(next_out, SampleMode::kStochastic, seed);
  const Mat a = one_hot_action(next_a);
  GnnWorkspace ws;
  const double q1 = critic_value(target_q1, g, feat, a, ws);
  const double q2 = critic_value(target_q2, g, feat, a, ws);
  const double entropy = mean_entropy(next_out);
  return r + cfg.gamma * std::min(q1, q2) + cfg.alpha * entropy;
}

// theta' <- tau * theta + (1 - tau) * theta'
inline void soft_update(GnnParams& target, const GnnParams& online, double tau) {
  if (target.w.size() != online.w.size())
    throw std::invalid_argument("soft_update: parameter layouts differ");
  for (std::size_t i = 0; i < target.w.size(); ++i)
    target.w[i] = tau * online.w[i] + (1.0 - tau) * target.w[i];
}

// ---------------------------------------------------------------------------
// Learner
// ---------------------------------------------------------------------------

class SacLearner {
 public:
  SacLearner(const GnnConfig& policy_cfg, const SacConfig& cfg, std::uint64_t seed)
      : cfg_(cfg),
        actor_(gnn_init(policy_cfg, derive_seed(seed, "sac_actor"))),
        q1_(gnn_init(critic_config(policy_cfg), derive_seed(seed, "sac_q1"))),
        q2_(gnn_init(critic_config(policy_cfg), derive_seed(seed, "sac_q2"))),
        tq1_(q1_),
        tq2_(q2_),
        seed_(seed) {}

  const GnnParams& actor() const { return actor_; }
  GnnParams& actor() { return actor_; }
  const GnnParams& q1() const { return q1_; }
  const GnnParams& q2() const { return q2_; }
  const GnnParams& target_q1() const { return tq1_; }
  const GnnParams& target_q2() const { return tq2_; }
  long updates_done() const { return updates_; }

  // Replaces both critics (targets follow, optimizer state resets).
  void set_critics(GnnParams q1, GnnParams q2) {
    q1_ = std::move(q1);
    q2_ = std::move(q2);
    tq1_ = q1_;
    tq2_ = q2_;
    opt_q1_ = {};
    opt_q2_ = {};
  }

  // One gradient step on the mean squared Bellman error of both heads.
  double update_critics(const WorkloadGraph& g, const Mat& feat,
                        const std::vector<Transition>& batch) {
    if (batch.empty()) throw std::invalid_argument("empty batch");
    const int T = static_cast<int>(batch.size());
    PolicyOutput next_out;
    bool need_next = false;
    for (const Transition& t : batch) need_next = need_next || !t.done;
    if (need_next) {
      GnnWorkspace ws;
      next_out = policy_forward(actor_, g, feat, ws);
    }
    std::vector<double> grad1(q1_.w.size(), 0.0), grad2(q2_.w.size(), 0.0);
    double loss = 0.0;
    GnnWorkspace ws;
    for (int i = 0; i < T; ++i) {
      const Transition& t = batch[i];
      const double y = critic_target(t.reward, t.done, next_out, tq1_, tq2_, g, feat, cfg_,
                                     derive_seed(seed_, "target_a", updates_, i));
      const Mat a = smooth_action(t.action, cfg_.noise_sigma, cfg_.noise_clip,
                                  derive_seed(seed_, "smooth", updates_, i));
      const double v1 = critic_value(q1_, g, feat, a, ws);
      critic_backward(q1_, g, ws, 2.0 * (v1 - y) / T, grad1);
      const double v2 = critic_value(q2_, g, feat, a, ws);
      critic_backward(q2_, g, ws, 2.0 * (v2 - y) / T, grad2);
      loss += ((v1 - y) * (v1 - y) + (v2 - y) * (v2 - y)) / T;
    }
    if (!std::isfinite(loss))
      throw std::runtime_error("critic update aborted: non-finite loss");
    adam_step(q1_.w, grad1, opt_q1_, cfg_.critic_lr);
    adam_step(q2_.w, grad2, opt_q2_, cfg_.critic_lr);
    return loss;
  }

  // One ascent step on E[min_j Q_j(s, pi_probs) + alpha * H(pi)]. The batch
  // fixes the states; with one workload per run they are all the same graph,
  // so the expectation collapses to a single evaluation.
  double update_actor(const WorkloadGraph& g, const Mat& feat,
                      const std::vector<Transition>& batch) {
    if (batch.empty()) throw std::invalid_argument("empty batch");
    GnnWorkspace actor_ws;
    PolicyOutput out = policy_forward(actor_, g, feat, actor_ws);

    GnnWorkspace ws1, ws2;
    const double v1 = critic_value(q1_, g, feat, out.probs, ws1);
    const double v2 = critic_value(q2_, g, feat, out.probs, ws2);
    const bool use1 = v1 <= v2;
    std::vector<double> scratch;
    Mat dprobs;
    critic_backward(use1 ? q1_ : q2_, g, use1 ? ws1 : ws2, 1.0, scratch, &dprobs);

    const double entropy = mean_entropy(out);
    const double objective = std::min(v1, v2) + cfg_.alpha * entropy;
    if (!std::isfinite(objective))
      throw std::runtime_error("actor update aborted: non-finite objective");

    // d(objective)/dlogits: softmax chain for the Q term plus the entropy
    // gradient -p*(log p + H_nt) averaged over node-tensors.
    const int n = g.n();
    Mat dlogits(n, kPolicyOutDim);
    for (int i = 0; i < n; ++i) {
      for (int t = 0; t < 2; ++t) {
        const double* p = out.probs.row(i) + 3 * t;
        const double* gq = dprobs.row(i) + 3 * t;
        double dot = 0.0, h_nt = 0.0;
        for (int k = 0; k < 3; ++k) {
          dot += p[k] * gq[k];
          h_nt -= p[k] * std::log(std::max(p[k], kProbFloor));
        }
        double* dz = dlogits.row(i) + 3 * t;
        for (int k = 0; k < 3; ++k) {
          const double dq_dz = p[k] * (gq[k] - dot);
          const double dh_dz = -p[k] * (std::log(std::max(p[k], kProbFloor)) + h_nt);
          dz[k] = dq_dz + cfg_.alpha * dh_dz / (2.0 * n);
        }
      }
    }
    std::vector<double> grad(actor_.w.size(), 0.0);
    gnn_backward(actor_, g, actor_ws, dlogits, grad);
    for (double& v : grad) v = -v;  // ascent
    adam_step(actor_.w, grad, opt_actor_, cfg_.actor_lr);
    return -objective;
  }

  void soft_update_targets() {
    soft_update(tq1_, q1_, cfg_.tau);
    soft_update(tq2_, q2_, cfg_.tau);
    ++updates_;
  }

  const SacConfig& config() const { return cfg_; }

 private:
  SacConfig cfg_;
  GnnParams actor_, q1_, q2_, tq1_, tq2_;
  AdamState opt_actor_, opt_q1_, opt_q2_;
  std::uint64_t seed_;
  long updates_ = 0;
};

}  // namespace egrl
