// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <fstream>
#include <set>
#include <string>

#include <nlohmann/json.hpp>

#include "egrl/errors.hpp"
#include "egrl/evolution.hpp"
#include "egrl/gnn.hpp"
#include "egrl/hwsim.hpp"
#include "egrl/sac.hpp"
#include "egrl/workload.hpp"

namespace egrl {

enum class Algorithm { kEgrl, kEa, kPg, kGreedyDp };

inline const char* to_string(Algorithm a) {
  switch (a) {
    case Algorithm::kEgrl: return "egrl";
    case Algorithm::kEa: return "ea";
    case Algorithm::kPg: return "pg";
    case Algorithm::kGreedyDp: return "greedy_dp";
  }
  return "?";
}

inline Algorithm algorithm_from_string(const std::string& s) {
  if (s == "egrl") return Algorithm::kEgrl;
  if (s == "ea") return Algorithm::kEa;
  if (s == "pg") return Algorithm::kPg;
  if (s == "greedy_dp") return Algorithm::kGreedyDp;
  throw ConfigError("unknown algorithm '" + s + "' (expected egrl|ea|pg|greedy_dp)");
}

// A run is fully determined by (config, seed). Defaults follow the standard
// hyperparameter table; the desk presets shrink the networks for laptop-scale
// experiments.
struct RunConfig {
  // workload: either a file path or a synthetic preset
  std::string workload_path;
  SyntheticKind workload_kind = SyntheticKind::kResnetLike;
  int workload_nodes = 57;
  std::uint64_t workload_seed = 0;

  std::string hardware_preset = "desk";
  std::string hardware_path;

  Algorithm algorithm = Algorithm::kEgrl;
  long total_env_steps = 4000;
  int rollout_size = 1;          // PG rollouts per generation
  int migration_cadence = 1;     // generations between actor migrations
  int reseed_cadence = 10;       // generations between Boltzmann reseeds
  double invalid_penalty = 1.0;  // reward = -invalid_penalty * epsilon
  bool seed_one_hot = false;     // Boltzmann seeding: one-hot action vs posterior
  int greedy_passes = 3;
  // Ablation switches: egrl with all three off is bit-for-bit the EA baseline.
  bool learner_enabled = true;
  bool migration_enabled = true;
  bool reseeding_enabled = true;

  EvolutionConfig evolution;
  GnnConfig gnn = GnnConfig::paper_policy();
  SacConfig sac;
  std::size_t replay_capacity = 100000;

  std::uint64_t seed = 0;
  int n_seeds = 1;
  std::string out_dir = "out";

  WorkloadGraph resolve_workload() const {
    if (!workload_path.empty()) return load_workload(workload_path);
    return generate_synthetic(workload_kind, workload_nodes, workload_seed);
  }

  HardwareModel resolve_hardware() const {
    if (!hardware_path.empty()) return load_hardware(hardware_path);
    return HardwareModel::preset(hardware_preset);
  }
};

namespace detail {

inline void check_keys(const nlohmann::json& j, const std::set<std::string>& allowed,
                       const std::string& where) {
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!allowed.count(it.key()))
      throw ConfigError("unknown config key '" + it.key() + "' in " + where);
}

template <typename T>
void read_into(const nlohmann::json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace detail

inline RunConfig run_config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("run config must be a JSON object");
  detail::check_keys(j, {"schema", "workload", "hardware", "algorithm", "total_env_steps",
                         "rollout_size", "migration_cadence", "reseed_cadence",
                         "invalid_penalty", "seed_one_hot", "greedy_passes", "population",
                         "gnn", "sac", "seed", "n_seeds", "out_dir", "learner_enabled",
                         "migration_enabled", "reseeding_enabled"},
                     "run config");
  if (j.contains("schema") && j.at("schema").get<int>() != 1)
    throw ConfigError("run config schema version must be 1");
  RunConfig c;
  if (j.contains("workload")) {
    const auto& w = j.at("workload");
    detail::check_keys(w, {"path", "preset", "nodes", "seed"}, "workload");
    detail::read_into(w, "path", c.workload_path);
    if (w.contains("preset")) c.workload_kind = synthetic_kind_from_string(w.at("preset").get<std::string>());
    detail::read_into(w, "nodes", c.workload_nodes);
    detail::read_into(w, "seed", c.workload_seed);
    if (!c.workload_path.empty() && w.contains("preset"))
      throw ConfigError("workload: give either 'path' or 'preset', not both");
  }
  if (j.contains("hardware")) {
    const auto& h = j.at("hardware");
    detail::check_keys(h, {"preset", "path"}, "hardware");
    detail::read_into(h, "preset", c.hardware_preset);
    detail::read_into(h, "path", c.hardware_path);
  }
  if (j.contains("algorithm")) c.algorithm = algorithm_from_string(j.at("algorithm").get<std::string>());
  detail::read_into(j, "total_env_steps", c.total_env_steps);
  detail::read_into(j, "rollout_size", c.rollout_size);
  detail::read_into(j, "migration_cadence", c.migration_cadence);
  detail::read_into(j, "reseed_cadence", c.reseed_cadence);
  detail::read_into(j, "invalid_penalty", c.invalid_penalty);
  detail::read_into(j, "seed_one_hot", c.seed_one_hot);
  detail::read_into(j, "greedy_passes", c.greedy_passes);
  detail::read_into(j, "learner_enabled", c.learner_enabled);
  detail::read_into(j, "migration_enabled", c.migration_enabled);
  detail::read_into(j, "reseeding_enabled", c.reseeding_enabled);
  if (j.contains("population")) {
    const auto& p = j.at("population");
    detail::check_keys(p, {"size", "boltzmann_fraction", "tournament_size", "mutation_prob",
                           "gnn_sigma", "boltzmann_sigma", "elite_count"},
                       "population");
    detail::read_into(p, "size", c.evolution.population_size);
    detail::read_into(p, "boltzmann_fraction", c.evolution.boltzmann_fraction);
    detail::read_into(p, "tournament_size", c.evolution.tournament_size);
    detail::read_into(p, "mutation_prob", c.evolution.mutation_prob);
    detail::read_into(p, "gnn_sigma", c.evolution.gnn_sigma);
    detail::read_into(p, "boltzmann_sigma", c.evolution.boltzmann_sigma);
    detail::read_into(p, "elite_count", c.evolution.elite_count);
  }
  if (j.contains("gnn")) {
    const auto& gj = j.at("gnn");
    detail::check_keys(gj, {"preset", "hidden", "depth", "heads", "attention"}, "gnn");
    if (gj.contains("preset")) {
      const std::string preset = gj.at("preset").get<std::string>();
      if (preset == "paper")
        c.gnn = GnnConfig::paper_policy();
      else if (preset == "desk")
        c.gnn = GnnConfig::desk_policy();
      else
        throw ConfigError("unknown gnn preset '" + preset + "' (expected paper|desk)");
    }
    detail::read_into(gj, "hidden", c.gnn.hidden);
    detail::read_into(gj, "depth", c.gnn.depth);
    detail::read_into(gj, "heads", c.gnn.heads);
    detail::read_into(gj, "attention", c.gnn.attention);
  }
  if (j.contains("sac")) {
    const auto& s = j.at("sac");
    detail::check_keys(s, {"critic_lr", "actor_lr", "alpha", "gamma", "tau", "batch_size",
                           "replay_capacity", "reward_scale", "noise_sigma", "noise_clip",
                           "grad_steps_per_env_step"},
                       "sac");
    detail::read_into(s, "critic_lr", c.sac.critic_lr);
    detail::read_into(s, "actor_lr", c.sac.actor_lr);
    detail::read_into(s, "alpha", c.sac.alpha);
    detail::read_into(s, "gamma", c.sac.gamma);
    detail::read_into(s, "tau", c.sac.tau);
    detail::read_into(s, "batch_size", c.sac.batch_size);
    detail::read_into(s, "replay_capacity", c.replay_capacity);
    detail::read_into(s, "reward_scale", c.sac.reward_scale);
    detail::read_into(s, "noise_sigma", c.sac.noise_sigma);
    detail::read_into(s, "noise_clip", c.sac.noise_clip);
    detail::read_into(s, "grad_steps_per_env_step", c.sac.grad_steps_per_env_step);
  }
  detail::read_into(j, "seed", c.seed);
  detail::read_into(j, "n_seeds", c.n_seeds);
  detail::read_into(j, "out_dir", c.out_dir);
  c.evolution.validate();
  c.gnn.validate();
  if (c.total_env_steps < 0) throw ConfigError("total_env_steps must be >= 0");
  if (c.n_seeds < 1) throw ConfigError("n_seeds must be >= 1");
  if (c.rollout_size < 0) throw ConfigError("rollout_size must be >= 0");
  return c;
}

inline RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config file is not valid JSON: ") + e.what());
  }
  return run_config_from_json(j);
}

}  // namespace egrl
