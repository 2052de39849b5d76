#ifndef HOHTREE_BENCH_HPP
#define HOHTREE_BENCH_HPP

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "hohtree/tree.hpp"
#include "hohtree/types.hpp"

// Benchmark workloads, CSV reporting, and the concurrent stress/replay
// verification driver.

namespace hohtree::bench {

// splitmix64: state advances by 0x9E3779B97F4A7C15; the output mixes the new
// state with (x ^= x >> 30) * 0xBF58476D1CE4E5B9, (x ^= x >> 27) *
// 0x94D049BB133111EB, x ^= x >> 31. Identical streams across platforms for
// the same seed, which makes per-thread operation sequences reproducible.
struct SplitMix64 {
  std::uint64_t state;

  explicit SplitMix64(std::uint64_t seed) : state(seed) {}

  std::uint64_t next() {
    std::uint64_t x = (state += 0x9E3779B97F4A7C15ULL);
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
  }

  // Uniform in [0, bound), bound > 0.
  std::uint64_t below(std::uint64_t bound) { return next() % bound; }
};

// Stream for worker `tid` under `seed`; defined so that identical
// (seed, config) produce identical per-thread operation sequences.
inline SplitMix64 thread_stream(std::uint64_t seed, unsigned tid) {
  SplitMix64 mix(seed ^ (0x9E3779B97F4A7C15ULL * (tid + 1)));
  return SplitMix64(mix.next());
}

enum class Workload : std::uint8_t { Contains, InsertDelete, SuccessfulInsert, MixedCount };

const char* workload_name(Workload w);
bool parse_workload(const std::string& name, Workload& out);

// Percentages; must sum to 100.
struct OpMix {
  unsigned insert;
  unsigned remove;
  unsigned contains;
  unsigned count;
};

OpMix mix_for(Workload w);

struct WorkloadConfig {
  Workload workload = Workload::InsertDelete;
  unsigned threads = 4;
  double duration_secs = 1.0;
  Key key_min = 1;
  Key key_max = 20000;
  double prefill_prob = 0.5;
  std::uint64_t seed = 42;
  unsigned runs = 1;
  double rebuild_k = 1.0;
  RootMode root_mode = RootMode::LockFree;
  // Restores the published experiment parameters: key range [1, 2e6] and a
  // one-million-element prefill for the successful-insert workload.
  bool paper_scale = false;
};

struct RunResult {
  std::uint64_t ops_total;
  double throughput;  // operations per second
};

struct BenchReport {
  Workload workload;
  unsigned threads;
  std::vector<RunResult> runs;

  double mean_throughput() const;
};

BenchReport run_benchmark(const WorkloadConfig& cfg);

// Header plus one row per run: workload,threads,run,ops_total,throughput.
void emit_csv(const std::vector<BenchReport>& reports, std::ostream& os);
bool emit_csv_file(const std::vector<BenchReport>& reports, const std::string& path);

struct VerifyConfig {
  Workload workload = Workload::MixedCount;
  unsigned threads = 4;
  std::uint64_t ops_per_thread = 10000;
  std::uint64_t seed = 42;
  Key key_min = 1;
  Key key_max = 20000;
  double prefill_prob = 0.5;
  double rebuild_k = 1.0;
  RootMode root_mode = RootMode::LockFree;
  // When set, overrides the workload's operation mix (used by the
  // verification suites to pin exact ratios).
  bool use_custom_mix = false;
  OpMix custom_mix{0, 0, 0, 0};
};

struct VerifyOutcome {
  bool pass = false;
  std::uint64_t total_ops = 0;
  std::string detail;  // first divergence, if any
};

// Records every operation's (timestamp, kind, args, result), merges the
// per-thread logs by timestamp after quiescence, replays them through the
// sequential oracle, and compares every result plus the final key set.
VerifyOutcome stress_replay_check(const VerifyConfig& cfg);

}  // namespace hohtree::bench

#endif  // HOHTREE_BENCH_HPP
