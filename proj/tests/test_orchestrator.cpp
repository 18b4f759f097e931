// SPDX-License-Identifier: Apache-2.0
#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "egrl/orchestrator.hpp"
#include "egrl/report.hpp"

using namespace egrl;

namespace {

WorkloadGraph doc_example() {
  return load_workload(std::string(EGRL_TEST_DATA_DIR) + "/doc_example.json");
}

RunConfig small_config(Algorithm algo, long budget) {
  RunConfig c;
  c.algorithm = algo;
  c.total_env_steps = budget;
  c.evolution.population_size = 10;
  c.evolution.boltzmann_fraction = 0.3;
  c.gnn.hidden = 8;
  c.gnn.depth = 1;
  c.gnn.heads = 2;
  c.sac.batch_size = 8;
  return c;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string fresh_dir(const std::string& stem) {
  auto dir = std::filesystem::temp_directory_path() / "egrl_tests" / stem;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir.string();
}

}  // namespace

TEST_CASE("budget bookkeeping: whole generations only, every eval counted") {
  WorkloadGraph g = doc_example();
  HardwareModel hw = HardwareModel::preset("desk");
  RunConfig cfg = small_config(Algorithm::kEgrl, 430);  // 10+1 per generation
  RunResult res = run_single(cfg, g, hw, 3);
  REQUIRE(res.generations == 39);  // floor(430 / 11)
  REQUIRE(res.iterations == 39 * 11);
  REQUIRE(res.evals.size() == static_cast<std::size_t>(res.iterations) + 1);  // + compiler
  REQUIRE(res.evals.front().policy == "compiler");
  REQUIRE(res.evals.front().speedup == Catch::Approx(1.0).epsilon(1e-12));
  // buffer grows by k + rollout every generation until capacity
  for (std::size_t i = 0; i < res.gens.size(); ++i)
    REQUIRE(res.gens[i].buffer_size == 11 * (i + 1));
}

TEST_CASE("same seed, same trajectory; different seed, different one") {
  WorkloadGraph g = doc_example();
  HardwareModel hw = HardwareModel::preset("desk");
  RunConfig cfg = small_config(Algorithm::kEgrl, 120);
  RunResult a = run_single(cfg, g, hw, 42);
  RunResult b = run_single(cfg, g, hw, 42);
  REQUIRE(a.evals.size() == b.evals.size());
  for (std::size_t i = 0; i < a.evals.size(); ++i) {
    REQUIRE(a.evals[i].reward == b.evals[i].reward);
    REQUIRE(a.evals[i].executed == b.evals[i].executed);
    REQUIRE(a.evals[i].uid == b.evals[i].uid);
  }
  RunResult c = run_single(cfg, g, hw, 43);
  bool any_diff = false;
  for (std::size_t i = 0; i < std::min(a.evals.size(), c.evals.size()); ++i)
    any_diff = any_diff || a.evals[i].reward != c.evals[i].reward;
  REQUIRE(any_diff);
}

TEST_CASE("reruns write byte-identical result logs") {
  WorkloadGraph g = doc_example();
  HardwareModel hw = HardwareModel::preset("desk");
  RunConfig cfg = small_config(Algorithm::kEgrl, 120);
  const std::string d1 = fresh_dir("det1"), d2 = fresh_dir("det2");
  write_run_result(run_single(cfg, g, hw, 7), 7, d1);
  write_run_result(run_single(cfg, g, hw, 7), 7, d2);
  for (const char* f : {"results.jsonl", "generations.jsonl", "mappings.jsonl", "series.csv",
                        "best_mapping.json"}) {
    CAPTURE(f);
    REQUIRE(slurp(d1 + "/" + f) == slurp(d2 + "/" + f));
    REQUIRE_FALSE(slurp(d1 + "/" + f).empty());
  }
}

TEST_CASE("pure EA is bit-exact EGRL with learner, migration, reseeding off") {
  WorkloadGraph g = doc_example();
  HardwareModel hw = HardwareModel::preset("desk");
  RunConfig ea = small_config(Algorithm::kEa, 100);  // 10 generations
  RunConfig ablated = small_config(Algorithm::kEgrl, 100);
  ablated.learner_enabled = false;
  ablated.migration_enabled = false;
  ablated.reseeding_enabled = false;
  ablated.rollout_size = 0;
  RunResult a = run_single(ea, g, hw, 5);
  RunResult b = run_single(ablated, g, hw, 5);
  REQUIRE(a.iterations == b.iterations);
  REQUIRE(a.evals.size() == b.evals.size());
  for (std::size_t i = 0; i < a.evals.size(); ++i) {
    REQUIRE(a.evals[i].reward == b.evals[i].reward);
    REQUIRE(a.evals[i].uid == b.evals[i].uid);
    REQUIRE(a.evals[i].executed == b.evals[i].executed);
  }
  REQUIRE(a.deployment.uid == b.deployment.uid);
  REQUIRE(a.deployment.fitness == b.deployment.fitness);
}

TEST_CASE("egrl finds at least the compiler's speedup on the doc example") {
  WorkloadGraph g = doc_example();
  HardwareModel hw = HardwareModel::preset("desk");
  RunConfig cfg = small_config(Algorithm::kEgrl, 550);
  RunResult res = run_single(cfg, g, hw, 1);
  REQUIRE(res.best_speedup >= 1.0);
  // best-so-far trajectory is non-decreasing by construction; check it
  double best = 0.0;
  for (const EvalRecord& e : res.evals) {
    if (e.policy == "compiler") continue;
    best = std::max(best, e.speedup);
  }
  REQUIRE(best == res.best_speedup);
}

TEST_CASE("per-generation hooks observe constant size and clamped temperatures") {
  WorkloadGraph g = doc_example();
  HardwareModel hw = HardwareModel::preset("desk");
  RunConfig cfg = small_config(Algorithm::kEa, 200);
  RunHooks hooks;
  int calls = 0;
  hooks.on_generation = [&](long gen, const Population& pop) {
    REQUIRE(pop.size() == cfg.evolution.population_size);
    for (const PolicyGenome& m : pop.members) {
      REQUIRE(m.evaluated());
      if (m.encoding == Encoding::kBoltzmann)
        for (double t : m.boltzmann.temperatures.a) {
          REQUIRE(t >= kTempMin);
          REQUIRE(t <= kTempMax);
        }
    }
    ++calls;
    (void)gen;
  };
  RunResult res = run_single(cfg, g, hw, 9, hooks);
  REQUIRE(calls == res.generations);
}

TEST_CASE("elite fitness never decreases across generations") {
  WorkloadGraph g = doc_example();
  HardwareModel hw = HardwareModel::preset("desk");
  RunConfig cfg = small_config(Algorithm::kEa, 300);
  RunResult res = run_single(cfg, g, hw, 17);
  double prev = -std::numeric_limits<double>::infinity();
  for (const GenRecord& gr : res.gens) {
    REQUIRE(gr.best >= prev - 1e-15);
    prev = gr.best;
  }
}

TEST_CASE("pure PG emits exactly budget transitions") {
  WorkloadGraph g = doc_example();
  HardwareModel hw = HardwareModel::preset("desk");
  RunConfig cfg = small_config(Algorithm::kPg, 60);
  RunResult res = run_single(cfg, g, hw, 2);
  REQUIRE(res.iterations == 60);
  long pg_records = 0;
  for (const EvalRecord& e : res.evals) pg_records += e.policy == "pg" ? 1 : 0;
  REQUIRE(pg_records == 60);
  REQUIRE(res.gens.empty());
}

TEST_CASE("greedy-dp run records 9N evaluations per pass") {
  WorkloadGraph g = doc_example();
  HardwareModel hw = HardwareModel::preset("desk");
  RunConfig cfg = small_config(Algorithm::kGreedyDp, 0);
  cfg.greedy_passes = 2;
  RunResult res = run_single(cfg, g, hw, 0);
  REQUIRE(res.iterations % (9 * g.n()) == 0);
  REQUIRE(res.best_speedup > 1.0);  // finds the activation-cycling map
}

TEST_CASE("the exported best GNN reproduces its recorded speedup") {
  WorkloadGraph g = doc_example();
  HardwareModel hw = HardwareModel::preset("desk");
  RunConfig cfg = small_config(Algorithm::kEgrl, 550);
  RunResult res = run_single(cfg, g, hw, 21);
  REQUIRE(res.best_gnn.has_value());
  const double omega_b = 1.0 / res.baseline_latency;
  GnnWorkspace ws;
  const PolicyOutput out = policy_forward(*res.best_gnn, g, feature_matrix(g).first, ws);
  const MappingDecision a = sample_action(out, SampleMode::kGreedy, 0);
  const EvalResult r = compute_reward(g, hw, a, omega_b);
  REQUIRE(speedup_of(r, omega_b) == Catch::Approx(res.best_gnn_speedup).epsilon(1e-12));
}

TEST_CASE("migration and reseeding follow their cadences exactly") {
  WorkloadGraph g = doc_example();
  HardwareModel hw = HardwareModel::preset("desk");
  RunConfig cfg = small_config(Algorithm::kEgrl, 25 * 11);  // 25 generations
  cfg.reseed_cadence = 10;
  cfg.migration_cadence = 4;
  RunResult res = run_single(cfg, g, hw, 13);
  REQUIRE(res.generations == 25);
  REQUIRE(res.reseeds == 2);     // floor(25 / 10); boltzmann members always present
  REQUIRE(res.migrations == 6);  // floor(25 / 4)
}

TEST_CASE("an untrained policy transfers as the all-DRAM map") {
  // zero parameters -> uniform probabilities -> greedy ties resolve to DRAM
  WorkloadGraph target = generate_synthetic(SyntheticKind::kResnetLike, 9, 4);
  HardwareModel hw = HardwareModel::preset("desk");
  GnnParams zero = gnn_zero(GnnConfig::desk_policy());
  GnnWorkspace ws;
  const PolicyOutput out = policy_forward(zero, target, feature_matrix(target).first, ws);
  const MappingDecision a = sample_action(out, SampleMode::kGreedy, 0);
  REQUIRE(a == MappingDecision::uniform(target.n(), kDram));
  const double omega_b = 1.0 / simulate_latency(target, hw, compiler_map(target, hw));
  const EvalResult r = compute_reward(target, hw, a, omega_b);
  const double all_dram_speedup =
      omega_b > 0 ? (1.0 / simulate_latency(target, hw, MappingDecision::uniform(target.n(), kDram))) / omega_b
                  : 0.0;
  REQUIRE(speedup_of(r, omega_b) == Catch::Approx(all_dram_speedup).epsilon(1e-12));
}

TEST_CASE("mapping-shift matrix: identity is diagonal, rows normalize") {
  WorkloadGraph g = doc_example();
  MappingDecision base = MappingDecision::uniform(3, kDram);
  auto m = mapshift_matrix(base, base, g);
  // total mappable bytes = 4000+8000 weights + 4000+4000+128 activations
  REQUIRE(m[kDram][kDram] == Catch::Approx(20128.0));
  REQUIRE(m[kDram][kLlc] == 0.0);
  REQUIRE(m[kLlc][kLlc] == 0.0);

  MappingDecision other = base;
  other.act_mem[0] = kSram;  // 4000-byte activation DRAM -> SRAM
  auto shift = mapshift_matrix(base, other, g);
  REQUIRE(shift[kDram][kSram] == Catch::Approx(4000.0));
  REQUIRE(shift[kDram][kDram] == Catch::Approx(16128.0));

  auto norm = mapshift_matrix(base, other, g, true);
  for (int i = 0; i < 3; ++i) {
    const double row = norm[i][0] + norm[i][1] + norm[i][2];
    REQUIRE((row == Catch::Approx(1.0).margin(1e-12) || row == 0.0));
  }
}

TEST_CASE("aggregation: median and cross-seed series") {
  WorkloadGraph g = doc_example();
  HardwareModel hw = HardwareModel::preset("desk");
  RunConfig cfg = small_config(Algorithm::kEa, 100);
  std::vector<RunResult> runs;
  for (std::uint64_t s = 0; s < 3; ++s) runs.push_back(run_single(cfg, g, hw, s));
  auto series = aggregate_series(runs, 10);
  REQUIRE_FALSE(series.empty());
  for (std::size_t i = 1; i < series.size(); ++i)
    REQUIRE(series[i].mean >= series[i - 1].mean - 1e-12);  // best-so-far means grow
  REQUIRE(median({1.0, 3.0, 2.0}) == 2.0);
  REQUIRE(median({1.0, 2.0, 3.0, 4.0}) == 2.5);
}
