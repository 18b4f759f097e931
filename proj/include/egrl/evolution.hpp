// SPDX-License-Identifier: Apache-2.0
//
// Population machinery: mixed GNN/Boltzmann genomes, fitness ranking with
// elitism, tournament selection, single-point crossover, cross-encoding
// seeding, and Gaussian mutation. Evolution operators build new genomes;
// nothing mutates a shared member in place during an evaluation wave.
#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "egrl/boltzmann.hpp"
#include "egrl/gnn.hpp"
#include "egrl/hwsim.hpp"
#include "egrl/replay.hpp"
#include "egrl/rng.hpp"
#include "egrl/workload.hpp"

namespace egrl {

enum class Encoding { kGnn, kBoltzmann };

inline const char* to_string(Encoding e) { return e == Encoding::kGnn ? "gnn" : "boltzmann"; }

inline constexpr double kUnevaluated = -std::numeric_limits<double>::infinity();

struct PolicyGenome {
  Encoding encoding = Encoding::kGnn;
  std::vector<double> gnn_w;   // flat parameters when encoding == kGnn
  BoltzmannGenome boltzmann;   // when encoding == kBoltzmann
  double fitness = kUnevaluated;  // from the most recent evaluation
  int age = 0;                    // generations survived
  std::uint64_t uid = 0;

  bool evaluated() const { return fitness != kUnevaluated; }
};

struct EvolutionConfig {
  int population_size = 20;
  double boltzmann_fraction = 0.2;
  int tournament_size = 3;
  double mutation_prob = 0.9;
  double gnn_sigma = 0.1;
  double boltzmann_sigma = 0.3;
  int elite_count = 0;  // 0 = max(1, ceil(0.1 * k))

  int elites() const {
    if (elite_count > 0) return elite_count;
    return std::max(1, static_cast<int>(std::ceil(0.1 * population_size)));
  }

  void validate() const {
    if (population_size < 1) throw ConfigError("population size must be >= 1");
    if (boltzmann_fraction < 0 || boltzmann_fraction > 1)
      throw ConfigError("boltzmann_fraction must be in [0,1]");
    if (tournament_size < 1) throw ConfigError("tournament_size must be >= 1");
    if (elites() > population_size) throw ConfigError("elite count exceeds population size");
    if (gnn_sigma < 0 || boltzmann_sigma < 0) throw ConfigError("mutation sigma must be >= 0");
  }
};

struct Population {
  std::vector<PolicyGenome> members;
  std::uint64_t next_uid = 0;

  int size() const { return static_cast<int>(members.size()); }

  int count(Encoding e) const {
    int c = 0;
    for (const auto& m : members) c += m.encoding == e ? 1 : 0;
    return c;
  }
};

// GNN members first, then the Boltzmann tail (round(k * fraction) of them).
inline Population init_population(const EvolutionConfig& cfg, const GnnConfig& gnn_cfg,
                                  int n_nodes, std::uint64_t seed) {
  cfg.validate();
  const int k = cfg.population_size;
  const int n_boltz = static_cast<int>(std::llround(cfg.boltzmann_fraction * k));
  Population pop;
  pop.members.resize(k);
  for (int i = 0; i < k; ++i) {
    PolicyGenome& m = pop.members[i];
    m.uid = pop.next_uid++;
    if (i < k - n_boltz) {
      m.encoding = Encoding::kGnn;
      m.gnn_w = gnn_init(gnn_cfg, derive_seed(seed, "pop_init", i)).w;
    } else {
      m.encoding = Encoding::kBoltzmann;
      m.boltzmann = random_boltzmann(n_nodes, derive_seed(seed, "pop_init", i));
    }
  }
  return pop;
}

// Rank order: fitness descending, ties by lower age (newer first), then
// lower index. Unevaluated members sort last.
inline bool ranks_before(const PolicyGenome& a, const PolicyGenome& b, int ia, int ib) {
  if (a.fitness != b.fitness) return a.fitness > b.fitness;
  if (a.age != b.age) return a.age < b.age;
  return ia < ib;
}

inline std::vector<int> rank_order(const Population& pop) {
  std::vector<int> order(pop.size());
  for (int i = 0; i < pop.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](int x, int y) {
    return ranks_before(pop.members[x], pop.members[y], x, y);
  });
  return order;
}

// Weakest = last in rank order; unevaluated members are weakest of all.
inline int weakest_index(const Population& pop) {
  int w = 0;
  for (int i = 1; i < pop.size(); ++i)
    if (!ranks_before(pop.members[i], pop.members[w], i, w)) w = i;
  return w;
}

struct Selection {
  std::vector<int> elites;    // indices, best first
  std::vector<int> selected;  // k - e tournament winners (with replacement)
};

inline Selection rank_and_select(const Population& pop, const EvolutionConfig& cfg,
                                 std::uint64_t seed) {
  for (int i = 0; i < pop.size(); ++i)
    if (!pop.members[i].evaluated())
      throw std::logic_error("rank_and_select: member " + std::to_string(i) +
                             " has no fitness this generation");
  Selection s;
  const std::vector<int> order = rank_order(pop);
  const int e = std::min(cfg.elites(), pop.size());
  s.elites.assign(order.begin(), order.begin() + e);
  Rng rng(derive_seed(seed, "tournament"));
  const int want = pop.size() - e;
  for (int j = 0; j < want; ++j) {
    int best = static_cast<int>(rng.below(pop.size()));
    for (int t = 1; t < cfg.tournament_size; ++t) {
      const int cand = static_cast<int>(rng.below(pop.size()));
      if (ranks_before(pop.members[cand], pop.members[best], cand, best)) best = cand;
    }
    s.selected.push_back(best);
  }
  return s;
}

namespace detail {

inline std::vector<double> genome_flat(const PolicyGenome& g) {
  return g.encoding == Encoding::kGnn ? g.gnn_w : boltzmann_flatten(g.boltzmann);
}

}  // namespace detail

// Single-point crossover over the flat vector (GNN) or the concatenated
// priors-and-temperatures vector (Boltzmann). Parents must share an
// encoding; mixed pairs are handled by Boltzmann seeding, never here.
inline PolicyGenome crossover(const PolicyGenome& a, const PolicyGenome& b, std::uint64_t seed) {
  if (a.encoding != b.encoding)
    throw std::invalid_argument("crossover requires parents of the same encoding");
  const std::vector<double> fa = detail::genome_flat(a);
  const std::vector<double> fb = detail::genome_flat(b);
  if (fa.size() != fb.size()) throw std::invalid_argument("parent genomes differ in length");
  Rng rng(derive_seed(seed, "crossover"));
  const std::size_t cut = 1 + rng.below(fa.size() - 1);  // [1, L-1]
  std::vector<double> child(fa.begin(), fa.begin() + cut);
  child.insert(child.end(), fb.begin() + cut, fb.end());
  PolicyGenome out;
  out.encoding = a.encoding;
  if (a.encoding == Encoding::kGnn)
    out.gnn_w = std::move(child);
  else
    out.boltzmann = boltzmann_unflatten(a.boltzmann.n(), child);
  return out;
}

// With probability mutation_prob, add elementwise N(0, sigma^2) noise: to
// the flat vector for GNN genomes; to priors and log-temperatures (then
// clamp) for Boltzmann ones. Elites are never passed here.
inline PolicyGenome mutate(const PolicyGenome& g, const EvolutionConfig& cfg, std::uint64_t seed) {
  Rng rng(derive_seed(seed, "mutate"));
  PolicyGenome out = g;
  if (rng.uniform() >= cfg.mutation_prob) return out;
  if (g.encoding == Encoding::kGnn) {
    for (double& v : out.gnn_w) v += rng.normal(0.0, cfg.gnn_sigma);
  } else {
    for (double& v : out.boltzmann.priors.a) v += rng.normal(0.0, cfg.boltzmann_sigma);
    for (double& t : out.boltzmann.temperatures.a)
      t = std::exp(std::log(t) + rng.normal(0.0, cfg.boltzmann_sigma));
    clamp_temperatures(out.boltzmann);
  }
  return out;
}

// One member's proposal for the workload. GNN members act greedily (they
// explore through weight noise); Boltzmann members sample.
inline MappingDecision genome_action(const PolicyGenome& m, const GnnConfig& gnn_cfg,
                                     const WorkloadGraph& g, const Mat& feat,
                                     std::uint64_t act_seed) {
  if (m.encoding == Encoding::kGnn) {
    GnnWorkspace ws;
    const PolicyOutput out = policy_forward(GnnParams{gnn_cfg, m.gnn_w}, g, feat, ws);
    return sample_action(out, SampleMode::kGreedy, act_seed);
  }
  return boltzmann_act(m.boltzmann, act_seed);
}

struct MemberEval {
  int slot = 0;
  MappingDecision action;
  EvalResult result;
};

// One rollout per member (1-step episodes); fitness = reward; every
// interaction lands in the shared buffer. The action seed is derived from
// the genome's uid, not the generation: re-evaluating the same individual
// reproduces its action exactly (deterministic evaluation; elites keep their
// fitness), while every bred/migrated/reseeded genome gets a fresh draw.
inline std::vector<MemberEval> evaluate_population(Population& pop, const GnnConfig& gnn_cfg,
                                                   const WorkloadGraph& g, const Mat& feat,
                                                   const HardwareModel& hw, double omega_baseline,
                                                   ReplayBuffer& buffer, std::uint64_t seed,
                                                   double invalid_penalty = 1.0) {
  std::vector<MemberEval> out;
  out.reserve(pop.size());
  for (int i = 0; i < pop.size(); ++i) {
    PolicyGenome& m = pop.members[i];
    MemberEval ev;
    ev.slot = i;
    ev.action = genome_action(m, gnn_cfg, g, feat, derive_seed(seed, "act", m.uid));
    ev.result = compute_reward(g, hw, ev.action, omega_baseline, invalid_penalty);
    m.fitness = ev.result.reward;
    buffer.push(Transition{g.name, ev.action, ev.result.reward, true});
    out.push_back(std::move(ev));
  }
  return out;
}

// Breeds the next generation: elites are copied unmodified; each remaining
// slot is bred from two tournament winners (same encoding: single-point
// crossover; mixed: a Boltzmann child seeded from the GNN parent's
// posterior), then mutated with mutation_prob.
inline Population next_generation(const Population& pop, const EvolutionConfig& cfg,
                                  const GnnConfig& gnn_cfg, const WorkloadGraph& g,
                                  const Mat& feat, std::uint64_t seed, long generation,
                                  bool seed_one_hot = false) {
  const Selection sel = rank_and_select(pop, cfg, derive_seed(seed, "select_gen",
                                                              static_cast<std::uint64_t>(generation)));
  Population next;
  next.next_uid = pop.next_uid;
  for (int idx : sel.elites) {
    PolicyGenome elite = pop.members[idx];  // shielded from mutation
    elite.age += 1;
    next.members.push_back(std::move(elite));
  }
  Rng pair_rng(derive_seed(seed, "pairing", static_cast<std::uint64_t>(generation)));
  for (std::size_t j = 0; j < sel.selected.size(); ++j) {
    const std::uint64_t slot_seed =
        derive_seed(seed, "breed", static_cast<std::uint64_t>(generation), j);
    const PolicyGenome& pa = pop.members[sel.elites[pair_rng.below(sel.elites.size())]];
    const PolicyGenome& pb = pop.members[sel.selected[j]];
    PolicyGenome child;
    if (pa.encoding == pb.encoding) {
      child = crossover(pa, pb, slot_seed);
    } else {
      // Alg-style cross-encoding transfer: the GNN parent's posterior (or a
      // sampled action, behind seed_one_hot) becomes the Boltzmann prior.
      const PolicyGenome& gnn_parent = pa.encoding == Encoding::kGnn ? pa : pb;
      const PolicyGenome& boltz_parent = pa.encoding == Encoding::kGnn ? pb : pa;
      GnnWorkspace ws;
      const PolicyOutput out =
          policy_forward(GnnParams{gnn_cfg, gnn_parent.gnn_w}, g, feat, ws);
      child.encoding = Encoding::kBoltzmann;
      if (seed_one_hot)
        child.boltzmann = seed_from_action(
            boltz_parent.boltzmann,
            sample_action(out, SampleMode::kStochastic, slot_seed));
      else
        child.boltzmann = seed_from_gnn(boltz_parent.boltzmann, out.probs);
    }
    child = mutate(child, cfg, derive_seed(seed, "mutate_slot",
                                           static_cast<std::uint64_t>(generation), j));
    child.fitness = kUnevaluated;
    child.age = 0;
    child.uid = next.next_uid++;
    next.members.push_back(std::move(child));
  }
  return next;
}

// Copies the PG actor over the weakest member (any encoding may be the
// victim). The copy is a regular member: it is evaluated next wave and wins
// survival only on merit.
inline int migrate(Population& pop, const std::vector<double>& pg_actor_flat) {
  const int victim = weakest_index(pop);
  PolicyGenome& m = pop.members[victim];
  m.encoding = Encoding::kGnn;
  m.gnn_w = pg_actor_flat;
  m.boltzmann = BoltzmannGenome{};
  m.fitness = kUnevaluated;
  m.age = 0;
  m.uid = pop.next_uid++;
  return victim;
}

// Re-seeds the weakest Boltzmann member from the PG actor's posterior on
// the workload. No-op when the population holds no Boltzmann member.
inline int reseed_weakest_boltzmann(Population& pop, const Mat& actor_probs) {
  int victim = -1;
  for (int i = 0; i < pop.size(); ++i) {
    if (pop.members[i].encoding != Encoding::kBoltzmann) continue;
    if (victim < 0 || !ranks_before(pop.members[i], pop.members[victim], i, victim)) victim = i;
  }
  if (victim < 0) return -1;
  PolicyGenome& m = pop.members[victim];
  m.boltzmann = seed_from_gnn(m.boltzmann, actor_probs);
  m.fitness = kUnevaluated;
  m.age = 0;
  m.uid = pop.next_uid++;
  return victim;
}

}  // namespace egrl
