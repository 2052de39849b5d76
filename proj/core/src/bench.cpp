#include "hohtree/bench.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <latch>
#include <limits>
#include <ostream>
#include <sstream>
#include <thread>

#include "hohtree/reclaim.hpp"
#include "hohtree/seq_tree.hpp"

namespace hohtree::bench {

const char* workload_name(Workload w) {
  switch (w) {
    case Workload::Contains:
      return "contains";
    case Workload::InsertDelete:
      return "insert-delete";
    case Workload::SuccessfulInsert:
      return "successful-insert";
    case Workload::MixedCount:
      return "mixed-count";
  }
  return "?";
}

bool parse_workload(const std::string& name, Workload& out) {
  if (name == "contains") {
    out = Workload::Contains;
  } else if (name == "insert-delete") {
    out = Workload::InsertDelete;
  } else if (name == "successful-insert") {
    out = Workload::SuccessfulInsert;
  } else if (name == "mixed-count") {
    out = Workload::MixedCount;
  } else {
    return false;
  }
  return true;
}

OpMix mix_for(Workload w) {
  switch (w) {
    case Workload::Contains:
      return {0, 0, 100, 0};
    case Workload::InsertDelete:
      return {50, 50, 0, 0};
    case Workload::SuccessfulInsert:
      return {100, 0, 0, 0};
    case Workload::MixedCount:
      return {40, 40, 0, 20};
  }
  return {0, 0, 100, 0};
}

namespace {

struct GenOp {
  OpKind kind;
  Key a;
  Key b;
};

Key key_in_span(SplitMix64& rng, Key key_min, Key key_max) {
  const std::uint64_t span =
      static_cast<std::uint64_t>(key_max) - static_cast<std::uint64_t>(key_min) + 1;
  const std::uint64_t off = span == 0 ? rng.next() : rng.below(span);
  return static_cast<Key>(static_cast<std::uint64_t>(key_min) + off);
}

GenOp generate_op(SplitMix64& rng, const OpMix& mix, Key key_min, Key key_max,
                  bool full_range_insert) {
  const std::uint64_t roll = rng.below(100);
  OpKind kind;
  if (roll < mix.insert) {
    kind = OpKind::Insert;
  } else if (roll < mix.insert + mix.remove) {
    kind = OpKind::Remove;
  } else if (roll < mix.insert + mix.remove + mix.contains) {
    kind = OpKind::Contains;
  } else {
    kind = OpKind::Count;
  }
  if (kind == OpKind::Count) {
    Key a = key_in_span(rng, key_min, key_max);
    Key b = key_in_span(rng, key_min, key_max);
    if (a > b) std::swap(a, b);
    return {kind, a, b};
  }
  if (kind == OpKind::Insert && full_range_insert) {
    const Key k = static_cast<Key>(rng.next());
    return {kind, k, k};
  }
  const Key k = key_in_span(rng, key_min, key_max);
  return {kind, k, k};
}

OpRecord apply_op(ConcurrentTree& tree, const GenOp& op) {
  switch (op.kind) {
    case OpKind::Insert:
      return tree.insert_traced(op.a);
    case OpKind::Remove:
      return tree.remove_traced(op.a);
    case OpKind::Contains:
      return tree.contains_traced(op.a);
    case OpKind::Count:
      return tree.count_traced(op.a, op.b);
  }
  return {0, 0};
}

// Prefill; when `log` is non-null every operation is recorded for replay.
void prefill_tree(ConcurrentTree& tree, Workload w, Key key_min, Key key_max,
                  double prefill_prob, std::uint64_t seed, bool paper_scale,
                  std::vector<OpLogEntry>* log) {
  SplitMix64 rng(seed ^ 0xC0FFEE123456789AULL);
  auto record = [&](OpKind kind, Key a, Key b, const OpRecord& r) {
    if (log != nullptr) {
      log->push_back({r.timestamp, static_cast<std::uint8_t>(kind), a, b, r.value});
    }
  };
  if (w == Workload::SuccessfulInsert) {
    const std::uint64_t n = paper_scale ? 1000000 : 20000;
    for (std::uint64_t i = 0; i < n; ++i) {
      const Key k = static_cast<Key>(rng.next());
      record(OpKind::Insert, k, k, tree.insert_traced(k));
    }
    return;
  }
  // Each element of the range enters with probability prefill_prob.
  auto coin = [&] {
    if (prefill_prob >= 1.0) return true;
    if (prefill_prob <= 0.0) return false;
    return static_cast<double>(rng.next() >> 11) <
           prefill_prob * 9007199254740992.0;  // 2^53
  };
  for (Key k = key_min;; ++k) {
    if (coin()) record(OpKind::Insert, k, k, tree.insert_traced(k));
    if (k == key_max) break;
  }
}

}  // namespace

double BenchReport::mean_throughput() const {
  if (runs.empty()) return 0.0;
  double sum = 0.0;
  for (const RunResult& r : runs) sum += r.throughput;
  return sum / static_cast<double>(runs.size());
}

BenchReport run_benchmark(const WorkloadConfig& cfg) {
  BenchReport report{cfg.workload, cfg.threads, {}};
  const OpMix mix = mix_for(cfg.workload);
  const bool full_range = cfg.workload == Workload::SuccessfulInsert;

  for (unsigned run = 0; run < cfg.runs; ++run) {
    {
      ConcurrentTree tree(TreeConfig{cfg.rebuild_k, cfg.root_mode, reclaim::kMaxThreads});
      prefill_tree(tree, cfg.workload, cfg.key_min, cfg.key_max, cfg.prefill_prob,
                   cfg.seed + run, cfg.paper_scale, nullptr);

      std::atomic<std::uint64_t> total_ops{0};
      std::latch start(cfg.threads + 1);
      std::vector<std::thread> workers;
      workers.reserve(cfg.threads);
      const auto duration = std::chrono::duration<double>(cfg.duration_secs);

      for (unsigned tid = 0; tid < cfg.threads; ++tid) {
        workers.emplace_back([&, tid] {
          SplitMix64 rng = thread_stream(cfg.seed + run, tid);
          start.arrive_and_wait();
          const auto deadline = std::chrono::steady_clock::now() + duration;
          std::uint64_t ops = 0;
          for (;;) {
            for (int burst = 0; burst < 32; ++burst) {
              const GenOp op = generate_op(rng, mix, cfg.key_min, cfg.key_max, full_range);
              apply_op(tree, op);
              ++ops;
            }
            if (std::chrono::steady_clock::now() >= deadline) break;
          }
          total_ops.fetch_add(ops, std::memory_order_relaxed);
        });
      }
      start.arrive_and_wait();
      for (auto& t : workers) t.join();

      const std::uint64_t ops = total_ops.load();
      report.runs.push_back({ops, static_cast<double>(ops) / cfg.duration_secs});
    }
    reclaim::quiesce();
  }
  return report;
}

void emit_csv(const std::vector<BenchReport>& reports, std::ostream& os) {
  os << "workload,threads,run,ops_total,throughput_ops_per_sec\n";
  for (const BenchReport& rep : reports) {
    for (std::size_t i = 0; i < rep.runs.size(); ++i) {
      char buf[64];
      std::snprintf(buf, sizeof(buf), "%.2f", rep.runs[i].throughput);
      os << workload_name(rep.workload) << ',' << rep.threads << ',' << (i + 1) << ','
         << rep.runs[i].ops_total << ',' << buf << '\n';
    }
  }
}

bool emit_csv_file(const std::vector<BenchReport>& reports, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) return false;
  emit_csv(reports, out);
  return static_cast<bool>(out);
}

VerifyOutcome stress_replay_check(const VerifyConfig& cfg) {
  VerifyOutcome outcome;
  const OpMix mix = cfg.use_custom_mix ? cfg.custom_mix : mix_for(cfg.workload);
  const bool full_range = cfg.workload == Workload::SuccessfulInsert;

  std::vector<Key> tree_keys;
  std::uint64_t tree_full_count = 0;
  std::vector<OpLogEntry> log;
  {
    ConcurrentTree tree(TreeConfig{cfg.rebuild_k, cfg.root_mode, reclaim::kMaxThreads});
    prefill_tree(tree, cfg.workload, cfg.key_min, cfg.key_max, cfg.prefill_prob, cfg.seed,
                 /*paper_scale=*/false, &log);

    std::vector<std::vector<OpLogEntry>> thread_logs(cfg.threads);
    std::latch start(cfg.threads + 1);
    std::vector<std::thread> workers;
    workers.reserve(cfg.threads);
    for (unsigned tid = 0; tid < cfg.threads; ++tid) {
      workers.emplace_back([&, tid] {
        std::vector<OpLogEntry>& mylog = thread_logs[tid];
        mylog.reserve(cfg.ops_per_thread);
        SplitMix64 rng = thread_stream(cfg.seed, tid);
        start.arrive_and_wait();
        for (std::uint64_t i = 0; i < cfg.ops_per_thread; ++i) {
          const GenOp op = generate_op(rng, mix, cfg.key_min, cfg.key_max, full_range);
          const OpRecord r = apply_op(tree, op);
          mylog.push_back({r.timestamp, static_cast<std::uint8_t>(op.kind), op.a, op.b,
                           r.value});
        }
      });
    }
    start.arrive_and_wait();
    for (auto& t : workers) t.join();

    for (auto& tl : thread_logs) log.insert(log.end(), tl.begin(), tl.end());
    tree_keys = tree.keys();
    tree_full_count = tree.count(std::numeric_limits<Key>::min(),
                                 std::numeric_limits<Key>::max());
  }
  reclaim::quiesce();

  outcome.total_ops = log.size();
  std::sort(log.begin(), log.end(),
            [](const OpLogEntry& a, const OpLogEntry& b) { return a.timestamp < b.timestamp; });
  for (std::size_t i = 1; i < log.size(); ++i) {
    if (log[i].timestamp == log[i - 1].timestamp) {
      std::ostringstream os;
      os << "duplicate timestamp " << log[i].timestamp;
      outcome.detail = os.str();
      return outcome;
    }
  }

  const ReplayResult replayed = replay(log);
  for (std::size_t i = 0; i < log.size(); ++i) {
    if (replayed.results[i] != log[i].result) {
      std::ostringstream os;
      os << "divergence at timestamp " << log[i].timestamp << ": op kind "
         << unsigned(log[i].kind) << " args (" << log[i].key_a << ", " << log[i].key_b
         << ") returned " << log[i].result << " but the oracle expects "
         << replayed.results[i];
      outcome.detail = os.str();
      return outcome;
    }
  }
  if (tree_keys != replayed.final_keys) {
    outcome.detail = "final key set differs from the oracle's";
    return outcome;
  }
  if (tree_full_count != replayed.final_keys.size()) {
    outcome.detail = "full-range count differs from the final key set size";
    return outcome;
  }
  outcome.pass = true;
  return outcome;
}

}  // namespace hohtree::bench
