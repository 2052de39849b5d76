#include <doctest.h>

#include <atomic>
#include <set>
#include <thread>
#include <vector>

#include "hohtree/node.hpp"
#include "hohtree/reclaim.hpp"
#include "hohtree/stats.hpp"

using namespace hohtree;

TEST_CASE("node ids count up from one") {
  IdSource ids;
  CHECK(ids.generate() == 1);
  CHECK(ids.generate() == 2);
  CHECK(ids.generate() == 3);
}

TEST_CASE("concurrent id generation yields distinct values") {
  IdSource ids;
  constexpr int kThreads = 8;
  constexpr int kPerThread = 125;
  std::vector<std::vector<NodeId>> got(kThreads);
  std::vector<std::thread> ts;
  for (int i = 0; i < kThreads; ++i) {
    ts.emplace_back([&, i] {
      for (int j = 0; j < kPerThread; ++j) got[i].push_back(ids.generate());
    });
  }
  for (auto& t : ts) t.join();
  std::set<NodeId> uniq;
  for (auto& v : got) uniq.insert(v.begin(), v.end());
  CHECK(uniq.size() == kThreads * kPerThread);
}

TEST_CASE("read_state returns the installed record") {
  reclaim::Guard g;
  InnerNode n(1, 10, empty_node(), empty_node(), NodeState{4, 0, 3}, 3);
  const NodeState* s = read_state(n);
  CHECK(s->size == 4);
  CHECK(s->mod_cnt == 0);
  CHECK(s->ts_mod == 3);

  CHECK(try_advance_state(n, s, NodeState{5, 1, 7}));
  CHECK(read_state(n)->ts_mod == 7);
  CHECK(read_state(n)->size == 5);
}

TEST_CASE("a stale observation cannot advance the state") {
  reclaim::Guard g;
  InnerNode n(1, 10, empty_node(), empty_node(), NodeState{4, 0, 0}, 0);
  const NodeState* old = read_state(n);
  REQUIRE(try_advance_state(n, old, NodeState{5, 1, 5}));
  // A helper holding the superseded record fails; the state is unchanged.
  CHECK_FALSE(try_advance_state(n, old, NodeState{6, 2, 6}));
  CHECK(read_state(n)->ts_mod == 5);
  CHECK(read_state(n)->size == 5);
}

TEST_CASE("non-increasing ts_mod replacements are refused") {
  reclaim::Guard g;
  InnerNode n(1, 10, empty_node(), empty_node(), NodeState{4, 0, 9}, 9);
  const NodeState* s = read_state(n);
  const auto violations_before =
      counters().state_order_violations.load(std::memory_order_relaxed);
  CHECK_FALSE(try_advance_state(n, s, NodeState{5, 1, 9}));
  CHECK(read_state(n) == s);
  CHECK(counters().state_order_violations.load(std::memory_order_relaxed) ==
        violations_before + 1);
}

// States are immutable records swapped whole, so concurrent readers must
// never observe a mixture of two states. Writers publish records whose
// fields satisfy a checksum; readers verify it.
TEST_CASE("state reads are never torn") {
  InnerNode n(1, 10, empty_node(), empty_node(), NodeState{1, 3 * 1 + 1, 1}, 0);
  std::atomic<bool> stop{false};
  std::atomic<std::uint64_t> bad{0};

  std::vector<std::thread> readers;
  for (int i = 0; i < 3; ++i) {
    readers.emplace_back([&] {
      while (!stop.load(std::memory_order_acquire)) {
        reclaim::Guard g;
        const NodeState* s = read_state(n);
        if (s->mod_cnt != 3 * s->size + 1 || s->ts_mod != s->size) bad.fetch_add(1);
      }
    });
  }
  {
    reclaim::Guard g;
    for (std::uint64_t v = 2; v < 20000; ++v) {
      const NodeState* cur = read_state(n);
      try_advance_state(n, cur, NodeState{v, 3 * v + 1, v});
    }
  }
  stop = true;
  for (auto& t : readers) t.join();
  CHECK(bad.load() == 0);
  reclaim::quiesce();
}
