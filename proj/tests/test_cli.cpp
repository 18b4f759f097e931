// SPDX-License-Identifier: Apache-2.0
//
// Drives the installed CLI binary end to end: file formats, determinism of
// result logs, exit codes. argv[1] = path to the binary.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <sys/wait.h>

#define CHECK(expr)                                                              \
  do {                                                                           \
    if (!(expr)) {                                                               \
      std::fprintf(stderr, "CHECK FAILED: %s (%s:%d)\n", #expr, __FILE__, __LINE__); \
      std::exit(1);                                                              \
    }                                                                            \
  } while (0)

namespace {

std::string g_cli;
std::filesystem::path g_dir;

int run(const std::string& args) {
  const std::string cmd = g_cli + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& p, const std::string& body) {
  std::ofstream out(p);
  out << body;
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    std::fprintf(stderr, "usage: test_cli <path-to-egrl-binary>\n");
    return 1;
  }
  g_cli = argv[1];
  g_dir = std::filesystem::temp_directory_path() / "egrl_cli_test";
  std::filesystem::remove_all(g_dir);
  std::filesystem::create_directories(g_dir);
  const std::string d = g_dir.string();

  // gen: deterministic workload files
  CHECK(run("gen --kind resnet_like --nodes 12 --workload-seed 4 --out-file " + d + "/w1.json") == 0);
  CHECK(run("gen --kind resnet_like --nodes 12 --workload-seed 4 --out-file " + d + "/w2.json") == 0);
  CHECK(slurp(d + "/w1.json") == slurp(d + "/w2.json"));
  CHECK(!slurp(d + "/w1.json").empty());

  // baseline artifacts
  CHECK(run("baseline --workload " + d + "/w1.json --hw desk --out-dir " + d + "/base") == 0);
  CHECK(std::filesystem::exists(d + "/base/compiler_mapping.json"));
  CHECK(std::filesystem::exists(d + "/base/baseline.json"));

  // run: same seed twice -> byte-identical result logs
  write_file(g_dir / "cfg.json", R"({
    "workload": {"path": ")" + d + R"(/w1.json"},
    "hardware": {"preset": "desk"},
    "algorithm": "egrl",
    "total_env_steps": 150,
    "population": {"size": 10, "boltzmann_fraction": 0.3},
    "gnn": {"hidden": 8, "depth": 1, "heads": 2},
    "sac": {"batch_size": 8},
    "seed": 3,
    "n_seeds": 1,
    "out_dir": ")" + d + R"(/runA"}
  )");
  CHECK(run("run --config-file " + d + "/cfg.json") == 0);
  CHECK(run("run --config-file " + d + "/cfg.json --out " + d + "/runB") == 0);
  for (const char* f :
       {"results.jsonl", "generations.jsonl", "mappings.jsonl", "series.csv", "best_mapping.json"}) {
    CHECK(slurp(d + "/runA/seed_3/" + f) == slurp(d + "/runB/seed_3/" + f));
    CHECK(!slurp(d + "/runA/seed_3/" + f).empty());
  }

  // export includes the compiler map and tags rows
  CHECK(run("export --run-dir " + d + "/runA/seed_3 --out-file " + d + "/exp.jsonl") == 0);
  {
    const std::string exp = slurp(d + "/exp.jsonl");
    CHECK(exp.find("\"compiler\"") != std::string::npos);
    CHECK(exp.find("\"tag\"") != std::string::npos);
  }

  // mapshift accepts the produced files
  CHECK(run("mapshift --workload " + d + "/w1.json --base " + d +
            "/base/compiler_mapping.json --other " + d +
            "/runA/seed_3/best_mapping.json --normalize --out-file " + d + "/shift.json") == 0);
  CHECK(!slurp(d + "/shift.json").empty());

  // transfer: the checkpointed policy evaluates on another workload, and
  // back again (two finite logged speedups)
  CHECK(std::filesystem::exists(d + "/runA/seed_3/best_gnn.ckpt"));
  CHECK(run("gen --kind bert_like --nodes 9 --workload-seed 1 --out-file " + d + "/wt.json") == 0);
  CHECK(run("transfer --checkpoint " + d + "/runA/seed_3/best_gnn.ckpt --trained-on " + d +
            "/w1.json --target " + d + "/wt.json --hw desk --out-file " + d + "/tr.json") == 0);
  CHECK(slurp(d + "/tr.json").find("\"speedup\"") != std::string::npos);
  CHECK(run("transfer --checkpoint " + d + "/runA/seed_3/best_gnn.ckpt --trained-on " + d +
            "/wt.json --target " + d + "/w1.json --hw desk --out-file " + d + "/tr2.json") == 0);
  CHECK(slurp(d + "/tr2.json").find("\"speedup\"") != std::string::npos);

  // multi-seed runs produce per-seed reports plus cross-seed aggregates
  write_file(g_dir / "cfg2.json", R"({
    "workload": {"path": ")" + d + R"(/w1.json"},
    "hardware": {"preset": "desk"},
    "algorithm": "ea",
    "total_env_steps": 100,
    "population": {"size": 10, "boltzmann_fraction": 0.3},
    "gnn": {"hidden": 8, "depth": 1, "heads": 2},
    "seed": 0, "n_seeds": 2,
    "out_dir": ")" + d + R"(/multi"}
  )");
  CHECK(run("run --config-file " + d + "/cfg2.json") == 0);
  CHECK(std::filesystem::exists(d + "/multi/seed_0/summary.json"));
  CHECK(std::filesystem::exists(d + "/multi/seed_1/summary.json"));
  CHECK(slurp(d + "/multi/aggregate.json").find("median_best_speedup") != std::string::npos);
  CHECK(slurp(d + "/multi/aggregate_series.csv").find("iteration,mean_best_speedup,std_best_speedup") !=
        std::string::npos);

  // oracle runs on tiny graphs and refuses big ones
  CHECK(run("gen --kind chain --nodes 3 --workload-seed 2 --out-file " + d + "/w3.json") == 0);
  CHECK(run("oracle --workload " + d + "/w3.json --hw desk --out-file " + d + "/oracle.json") == 0);
  CHECK(run("oracle --workload " + d + "/w1.json --hw desk") == 1);  // N=12 too large

  // exit codes: bad usage / bad config = 1
  CHECK(run("run --config-file " + d + "/does_not_exist.json") == 1);
  write_file(g_dir / "bad.json", "{\"no_such_key\": 1}");
  CHECK(run("run --config-file " + d + "/bad.json") == 1);
  write_file(g_dir / "cycle.json",
             R"({"schema":1,"name":"x","nodes":[[6,0,1,1,1,1,1,1,1,1,1,0,0,0,0,0,0,0,1],)"
             R"([6,0,1,1,1,1,1,1,1,1,0,0,0,0,0,0,0,0,1]],"edges":[[0,1],[1,0]]})");
  CHECK(run("baseline --workload " + d + "/cycle.json") == 1);
  CHECK(run("frobnicate") == 1);

  std::printf("test_cli: all checks passed\n");
  return 0;
}
