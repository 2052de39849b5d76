#ifndef HOHTREE_STATS_HPP
#define HOHTREE_STATS_HPP

#include <atomic>
#include <cstdint>

// Always-on invariant instrumentation. Every queue transition (push or pop)
// and every state-cell advance is counted; ordering violations are counted
// separately and must stay at zero. The counters are relaxed atomics, cheap
// next to the CAS traffic they observe.

namespace hohtree {

struct InvariantCounters {
  std::atomic<std::uint64_t> queue_pushes{0};
  std::atomic<std::uint64_t> queue_pops{0};
  std::atomic<std::uint64_t> queue_order_violations{0};
  std::atomic<std::uint64_t> state_advances{0};
  std::atomic<std::uint64_t> state_order_violations{0};
  std::atomic<std::uint64_t> rebuilds{0};
  std::atomic<std::uint64_t> rebuilt_leaves{0};

  std::uint64_t queue_transitions() const {
    return queue_pushes.load(std::memory_order_relaxed) +
           queue_pops.load(std::memory_order_relaxed);
  }

  void reset() {
    queue_pushes.store(0);
    queue_pops.store(0);
    queue_order_violations.store(0);
    state_advances.store(0);
    state_order_violations.store(0);
    rebuilds.store(0);
    rebuilt_leaves.store(0);
  }
};

InvariantCounters& counters();

}  // namespace hohtree

#endif  // HOHTREE_STATS_HPP
