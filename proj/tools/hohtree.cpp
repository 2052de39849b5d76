// Command-line driver: `bench` runs the throughput workloads and writes CSV
// reports; `verify` runs a bounded concurrent stress and checks every result
// against the sequential oracle replayed in timestamp order.

#include <cstdio>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "hohtree/bench.hpp"

namespace {

using namespace hohtree;
using namespace hohtree::bench;

int run_bench(const std::string& workload_name_arg, std::vector<unsigned> threads,
              double duration, Key key_min, Key key_max, double prefill, std::uint64_t seed,
              unsigned runs, double rebuild_k, const std::string& root_mode,
              const std::string& csv_path, bool paper_scale, bool key_range_given,
              bool duration_given, bool runs_given) {
  Workload w;
  if (!parse_workload(workload_name_arg, w)) {
    std::fprintf(stderr, "unknown workload: %s\n", workload_name_arg.c_str());
    return 2;
  }
  WorkloadConfig cfg;
  cfg.workload = w;
  cfg.duration_secs = duration;
  cfg.key_min = key_min;
  cfg.key_max = key_max;
  cfg.prefill_prob = prefill;
  cfg.seed = seed;
  cfg.runs = runs;
  cfg.rebuild_k = rebuild_k;
  cfg.root_mode = (root_mode == "announce") ? RootMode::Announce : RootMode::LockFree;
  cfg.paper_scale = paper_scale;
  if (paper_scale) {
    if (!key_range_given) {
      cfg.key_min = 1;
      cfg.key_max = 2000000;
    }
    if (!duration_given) cfg.duration_secs = 10.0;
    if (!runs_given) cfg.runs = 5;
  }
  if (cfg.key_min > cfg.key_max) {
    std::fprintf(stderr, "key-min must be <= key-max\n");
    return 2;
  }

  std::vector<BenchReport> reports;
  for (unsigned t : threads) {
    cfg.threads = t;
    std::printf("workload=%s threads=%u duration=%.1fs runs=%u ...\n",
                workload_name(cfg.workload), t, cfg.duration_secs, cfg.runs);
    std::fflush(stdout);
    BenchReport rep = run_benchmark(cfg);
    for (std::size_t i = 0; i < rep.runs.size(); ++i) {
      std::printf("  run %zu: %llu ops, %.2f ops/s\n", i + 1,
                  static_cast<unsigned long long>(rep.runs[i].ops_total),
                  rep.runs[i].throughput);
    }
    std::printf("  mean: %.2f ops/s\n", rep.mean_throughput());
    reports.push_back(std::move(rep));
  }
  if (!csv_path.empty()) {
    if (!emit_csv_file(reports, csv_path)) {
      std::fprintf(stderr, "failed to write %s\n", csv_path.c_str());
      return 1;
    }
    std::printf("csv written to %s\n", csv_path.c_str());
  }
  return 0;
}

int run_verify(const std::string& workload_name_arg, unsigned threads,
               std::uint64_t ops_per_thread, std::uint64_t seed, Key key_min, Key key_max,
               double rebuild_k, const std::string& root_mode) {
  Workload w;
  if (!parse_workload(workload_name_arg, w)) {
    std::fprintf(stderr, "unknown workload: %s\n", workload_name_arg.c_str());
    return 2;
  }
  VerifyConfig cfg;
  cfg.workload = w;
  cfg.threads = threads;
  cfg.ops_per_thread = ops_per_thread;
  cfg.seed = seed;
  cfg.key_min = key_min;
  cfg.key_max = key_max;
  cfg.rebuild_k = rebuild_k;
  cfg.root_mode = (root_mode == "announce") ? RootMode::Announce : RootMode::LockFree;
  if (cfg.key_min > cfg.key_max) {
    std::fprintf(stderr, "key-min must be <= key-max\n");
    return 2;
  }

  const VerifyOutcome out = stress_replay_check(cfg);
  if (out.pass) {
    std::printf("PASS: %llu operations replayed in timestamp order with no divergence\n",
                static_cast<unsigned long long>(out.total_ops));
    return 0;
  }
  std::printf("FAIL: %s\n", out.detail.c_str());
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Concurrent balanced search tree with aggregate range counts"};
  app.require_subcommand(1);

  std::string workload = "insert-delete";
  std::vector<unsigned> threads{4};
  double duration = 1.0;
  Key key_min = 1;
  Key key_max = 20000;
  double prefill = 0.5;
  std::uint64_t seed = 42;
  unsigned runs = 1;
  double rebuild_k = 1.0;
  std::string root_mode = "lockfree";
  std::string csv_path;
  bool paper_scale = false;
  std::uint64_t ops_per_thread = 10000;

  CLI::App* bench_cmd = app.add_subcommand("bench", "run a throughput workload");
  bench_cmd->add_option("--workload", workload,
                        "contains | insert-delete | successful-insert | mixed-count");
  bench_cmd->add_option("--threads", threads, "worker thread counts (comma separated)")
      ->delimiter(',');
  auto* duration_opt = bench_cmd->add_option("--duration-secs", duration, "seconds per run");
  auto* keymin_opt = bench_cmd->add_option("--key-min", key_min, "key range lower bound");
  auto* keymax_opt = bench_cmd->add_option("--key-max", key_max, "key range upper bound");
  bench_cmd->add_option("--prefill-prob", prefill, "prefill probability per key in range");
  bench_cmd->add_option("--seed", seed, "base seed for the deterministic op streams");
  auto* runs_opt = bench_cmd->add_option("--runs", runs, "runs per configuration");
  bench_cmd->add_option("--rebuild-k", rebuild_k, "rebuild threshold constant K");
  bench_cmd->add_option("--root-mode", root_mode, "lockfree | announce");
  bench_cmd->add_option("--csv", csv_path, "write per-run results to this CSV file");
  bench_cmd->add_flag("--paper-scale", paper_scale,
                      "use the published experiment scale (range 2e6, 10 s, 5 runs)");

  CLI::App* verify_cmd =
      app.add_subcommand("verify", "stress the tree and replay the log against the oracle");
  verify_cmd->add_option("--workload", workload,
                         "contains | insert-delete | successful-insert | mixed-count");
  verify_cmd->add_option("--threads", threads, "worker thread count")->delimiter(',');
  verify_cmd->add_option("--ops-per-thread", ops_per_thread, "operations per worker");
  verify_cmd->add_option("--seed", seed, "base seed for the deterministic op streams");
  verify_cmd->add_option("--key-min", key_min, "key range lower bound");
  verify_cmd->add_option("--key-max", key_max, "key range upper bound");
  verify_cmd->add_option("--rebuild-k", rebuild_k, "rebuild threshold constant K");
  verify_cmd->add_option("--root-mode", root_mode, "lockfree | announce");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  if (root_mode != "lockfree" && root_mode != "announce") {
    std::fprintf(stderr, "unknown root mode: %s\n", root_mode.c_str());
    return 2;
  }
  for (unsigned t : threads) {
    if (t == 0) {
      std::fprintf(stderr, "thread count must be positive\n");
      return 2;
    }
  }

  if (bench_cmd->parsed()) {
    return run_bench(workload, threads, duration, key_min, key_max, prefill, seed, runs,
                     rebuild_k, root_mode, csv_path, paper_scale,
                     keymin_opt->count() > 0 || keymax_opt->count() > 0,
                     duration_opt->count() > 0, runs_opt->count() > 0);
  }
  return run_verify(workload, threads.front(), ops_per_thread, seed, key_min, key_max,
                    rebuild_k, root_mode);
}
