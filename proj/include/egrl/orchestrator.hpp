// SPDX-License-Identifier: Apache-2.0
//
// The training loop: population evaluation waves, SAC learner updates off
// the shared replay buffer, actor migration into the population, periodic
// Boltzmann reseeding from the actor's posterior, and deployment of the
// top-ranked member. Pure EA and pure PG are the same engine with parts
// switched off, which is what makes the ablation identity exact.
//
// RNG discipline: every stochastic decision draws from its own named
// substream derived from (master seed, tag, generation, slot), so disabling
// one component never shifts another's draws.
#pragma once

#include <chrono>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "egrl/baselines.hpp"
#include "egrl/config.hpp"
#include "egrl/evolution.hpp"
#include "egrl/hwsim.hpp"
#include "egrl/replay.hpp"
#include "egrl/sac.hpp"
#include "egrl/workload.hpp"

namespace egrl {

struct EvalRecord {
  long step = 0;  // cumulative iteration count; 0 is the compiler baseline
  long gen = 0;
  std::string policy;    // "compiler", "pop_<slot>", "pg", "greedy_dp"
  std::string encoding;  // "gnn", "boltzmann", "-"
  std::uint64_t uid = 0;
  double epsilon = 0.0;
  std::optional<double> latency;
  double reward = 0.0;
  double speedup = 0.0;  // 0 marks an invalid mapping
  MappingDecision executed;  // rectified map (equals the proposal when valid)
};

struct GenRecord {
  long gen = 0;
  double best = 0.0, mean = 0.0, worst = 0.0;
  int n_gnn = 0, n_boltzmann = 0;
  std::vector<std::uint64_t> elite_uids;
  std::size_t buffer_size = 0;
  std::optional<double> temp_min, temp_max;     // across Boltzmann members
  std::optional<double> critic_loss, actor_loss;  // last update this generation
};

struct DeploymentInfo {
  std::uint64_t uid = 0;
  std::string encoding;
  double fitness = 0.0;
};

struct RunResult {
  std::string workload_name;
  std::string algorithm;
  double baseline_latency = 0.0;
  long iterations = 0;
  long generations = 0;
  std::vector<EvalRecord> evals;
  std::vector<GenRecord> gens;

  double best_speedup = 0.0;  // max over all valid evaluations
  long best_step = 0;
  MappingDecision best_mapping;
  long migrations = 0;  // actor copies into the population
  long reseeds = 0;     // Boltzmann priors reseeded from the actor

  DeploymentInfo deployment;  // top-ranked population member at the end

  // Best greedy-acting GNN population member, for zero-shot transfer.
  std::optional<GnnParams> best_gnn;
  double best_gnn_speedup = 0.0;
  std::uint64_t best_gnn_uid = 0;

  double wall_time_s = 0.0;
};

struct RunHooks {
  // Invoked right after each population evaluation wave.
  std::function<void(long gen, const Population&)> on_generation;
};

namespace detail {

struct RunFlags {
  bool population = false;
  bool learner = false;
  bool migration = false;
  bool reseeding = false;
};

inline RunFlags flags_for(const RunConfig& cfg) {
  RunFlags f;
  switch (cfg.algorithm) {
    case Algorithm::kEgrl: f = {true, true, true, true}; break;
    case Algorithm::kEa: f = {true, false, false, false}; break;
    case Algorithm::kPg: f = {false, true, false, false}; break;
    case Algorithm::kGreedyDp: f = {false, false, false, false}; break;
  }
  f.learner = f.learner && cfg.learner_enabled;
  f.migration = f.migration && cfg.migration_enabled && f.learner;
  f.reseeding = f.reseeding && cfg.reseeding_enabled && f.learner;
  return f;
}

inline EvalRecord make_record(long step, long gen, std::string policy, std::string encoding,
                              std::uint64_t uid, const EvalResult& r, double omega_baseline) {
  EvalRecord rec;
  rec.step = step;
  rec.gen = gen;
  rec.policy = std::move(policy);
  rec.encoding = std::move(encoding);
  rec.uid = uid;
  rec.epsilon = r.epsilon;
  rec.latency = r.latency;
  rec.reward = r.reward;
  rec.speedup = speedup_of(r, omega_baseline);
  rec.executed = r.rectified;
  return rec;
}

}  // namespace detail

// Runs one seeded experiment of the configured algorithm. Deterministic:
// everything except wall_time_s is a pure function of (config, workload,
// hardware, seed).
inline RunResult run_single(const RunConfig& cfg, const WorkloadGraph& g,
                            const HardwareModel& hw, std::uint64_t seed,
                            const RunHooks& hooks = {}) {
  const auto t_start = std::chrono::steady_clock::now();
  const detail::RunFlags flags = detail::flags_for(cfg);

  RunResult res;
  res.workload_name = g.name;
  res.algorithm = to_string(cfg.algorithm);

  const MappingDecision compiler = compiler_map(g, hw);
  res.baseline_latency = simulate_latency(g, hw, compiler);
  const double omega_b = 1.0 / res.baseline_latency;
  {
    EvalResult base = compute_reward(g, hw, compiler, omega_b, cfg.invalid_penalty);
    res.evals.push_back(detail::make_record(0, -1, "compiler", "-", 0, base, omega_b));
  }

  const Mat feat = feature_matrix(g).first;
  long step = 0;

  auto track_best = [&](const EvalRecord& rec) {
    if (rec.speedup > res.best_speedup) {
      res.best_speedup = rec.speedup;
      res.best_step = rec.step;
      res.best_mapping = rec.executed;
    }
  };
  track_best(res.evals.front());

  if (cfg.algorithm == Algorithm::kGreedyDp) {
    GreedyDpResult dp = greedy_dp(g, hw, omega_b, cfg.greedy_passes, cfg.invalid_penalty);
    for (const GreedyDpTrial& t : dp.trajectory) {
      EvalRecord rec;
      rec.step = t.step;
      rec.gen = t.node;  // the node being swept
      rec.policy = "greedy_dp";
      rec.encoding = "-";
      rec.epsilon = t.epsilon;
      rec.reward = t.reward;
      rec.latency = t.latency;
      rec.speedup = t.latency ? res.baseline_latency / *t.latency : 0.0;
      rec.executed = t.executed;
      track_best(rec);
      res.evals.push_back(std::move(rec));
    }
    step = static_cast<long>(dp.trajectory.size());
    res.iterations = step;
    res.deployment = {0, "-", res.best_speedup * res.best_speedup};
    res.wall_time_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    return res;
  }

  ReplayBuffer buffer(cfg.replay_capacity);
  std::optional<Population> pop;
  if (flags.population)
    pop = init_population(cfg.evolution, cfg.gnn, g.n(), derive_seed(seed, "population"));
  std::optional<SacLearner> learner;
  if (flags.learner) learner.emplace(cfg.gnn, cfg.sac, derive_seed(seed, "sac"));

  long gen = 0;
  long update_idx = 0;

  auto learner_updates = [&](long ups, GenRecord* gr) {
    for (long u = 0; u < ups; ++u) {
      if (buffer.size() < static_cast<std::size_t>(cfg.sac.batch_size)) return;
      for (int s = 0; s < cfg.sac.grad_steps_per_env_step; ++s) {
        const auto batch =
            buffer.sample(cfg.sac.batch_size, derive_seed(seed, "batch", update_idx, s));
        const double closs = learner->update_critics(g, feat, batch);
        const double aloss = learner->update_actor(g, feat, batch);
        learner->soft_update_targets();
        if (gr != nullptr) {
          gr->critic_loss = closs;
          gr->actor_loss = aloss;
        }
      }
      ++update_idx;
    }
  };

  if (!flags.population) {
    // Pure PG: one stochastic rollout per environment step, one update each.
    while (step < cfg.total_env_steps) {
      GnnWorkspace ws;
      const PolicyOutput out = policy_forward(learner->actor(), g, feat, ws);
      const MappingDecision a =
          sample_action(out, SampleMode::kStochastic, derive_seed(seed, "rollout", step));
      const EvalResult r = compute_reward(g, hw, a, omega_b, cfg.invalid_penalty);
      buffer.push(Transition{g.name, a, r.reward, true});
      ++step;
      EvalRecord rec = detail::make_record(step, step - 1, "pg", "gnn", 0, r, omega_b);
      track_best(rec);
      res.evals.push_back(std::move(rec));
      learner_updates(1, nullptr);
    }
    res.iterations = step;
    res.generations = 0;
    res.deployment = {0, "gnn", res.evals.back().reward};
    res.wall_time_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    return res;
  }

  const long steps_per_gen =
      cfg.evolution.population_size + (flags.learner ? cfg.rollout_size : 0);
  while (step + steps_per_gen <= cfg.total_env_steps) {
    // 1. Evaluate the population (one rollout per member).
    auto member_evals = evaluate_population(*pop, cfg.gnn, g, feat, hw, omega_b, buffer,
                                            derive_seed(seed, "eval"), cfg.invalid_penalty);
    GenRecord gr;
    gr.gen = gen;
    double sum = 0.0;
    gr.best = -std::numeric_limits<double>::infinity();
    gr.worst = std::numeric_limits<double>::infinity();
    for (const MemberEval& ev : member_evals) {
      ++step;
      const PolicyGenome& m = pop->members[ev.slot];
      EvalRecord rec = detail::make_record(step, gen, "pop_" + std::to_string(ev.slot),
                                           to_string(m.encoding), m.uid, ev.result, omega_b);
      track_best(rec);
      if (m.encoding == Encoding::kGnn && ev.result.valid &&
          rec.speedup > res.best_gnn_speedup) {
        res.best_gnn_speedup = rec.speedup;
        res.best_gnn = GnnParams{cfg.gnn, m.gnn_w};
        res.best_gnn_uid = m.uid;
      }
      res.evals.push_back(std::move(rec));
      sum += m.fitness;
      gr.best = std::max(gr.best, m.fitness);
      gr.worst = std::min(gr.worst, m.fitness);
    }
    gr.mean = sum / pop->size();
    gr.n_gnn = pop->count(Encoding::kGnn);
    gr.n_boltzmann = pop->count(Encoding::kBoltzmann);
    for (const PolicyGenome& m : pop->members)
      if (m.encoding == Encoding::kBoltzmann)
        for (double t : m.boltzmann.temperatures.a) {
          gr.temp_min = std::min(gr.temp_min.value_or(t), t);
          gr.temp_max = std::max(gr.temp_max.value_or(t), t);
        }
    {
      const std::vector<int> order = rank_order(*pop);
      const int e = std::min(cfg.evolution.elites(), pop->size());
      for (int i = 0; i < e; ++i) gr.elite_uids.push_back(pop->members[order[i]].uid);
    }
    if (hooks.on_generation) hooks.on_generation(gen, *pop);

    // 2. PG rollouts (stochastic; exploration lives in the action space).
    if (flags.learner) {
      for (int r = 0; r < cfg.rollout_size; ++r) {
        GnnWorkspace ws;
        const PolicyOutput out = policy_forward(learner->actor(), g, feat, ws);
        const MappingDecision a = sample_action(
            out, SampleMode::kStochastic, derive_seed(seed, "rollout", gen, r));
        const EvalResult er = compute_reward(g, hw, a, omega_b, cfg.invalid_penalty);
        buffer.push(Transition{g.name, a, er.reward, true});
        ++step;
        EvalRecord rec = detail::make_record(step, gen, "pg", "gnn", 0, er, omega_b);
        track_best(rec);
        res.evals.push_back(std::move(rec));
      }
    }

    // 3. Evolve.
    *pop = next_generation(*pop, cfg.evolution, cfg.gnn, g, feat, derive_seed(seed, "evolve"),
                           gen, cfg.seed_one_hot);

    // 4. Learn: one critic+actor update per environment step this generation.
    if (flags.learner) learner_updates(steps_per_gen, &gr);

    // 5. Migrate the actor over the weakest member.
    if (flags.migration && cfg.migration_cadence > 0 && (gen + 1) % cfg.migration_cadence == 0) {
      migrate(*pop, learner->actor().w);
      ++res.migrations;
    }

    // 6. Periodically reseed the weakest Boltzmann member from the actor.
    if (flags.reseeding && cfg.reseed_cadence > 0 && (gen + 1) % cfg.reseed_cadence == 0) {
      GnnWorkspace ws;
      const PolicyOutput out = policy_forward(learner->actor(), g, feat, ws);
      if (reseed_weakest_boltzmann(*pop, out.probs) >= 0) ++res.reseeds;
    }

    gr.buffer_size = buffer.size();
    res.gens.push_back(std::move(gr));
    ++gen;
  }

  res.iterations = step;
  res.generations = gen;
  {
    const std::vector<int> order = rank_order(*pop);
    const PolicyGenome& top = pop->members[order.front()];
    res.deployment = {top.uid, to_string(top.encoding), top.fitness};
  }
  res.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  return res;
}

}  // namespace egrl
