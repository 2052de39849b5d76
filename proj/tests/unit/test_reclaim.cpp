#include <doctest.h>

#include <atomic>
#include <set>
#include <thread>
#include <vector>

#include "hohtree/reclaim.hpp"

using namespace hohtree;

namespace {
std::atomic<int> g_freed{0};

struct Tracked {
  ~Tracked() { g_freed.fetch_add(1); }
};
}  // namespace

TEST_CASE("retired memory is freed after quiescence") {
  g_freed = 0;
  for (int i = 0; i < 100; ++i) {
    reclaim::Guard g;
    reclaim::retire(new Tracked);
  }
  reclaim::quiesce();
  CHECK(g_freed.load() == 100);
}

TEST_CASE("guards keep retirees alive until released") {
  g_freed = 0;
  auto* t = new Tracked;
  {
    reclaim::Guard g;
    reclaim::retire(t);
    reclaim::flush();  // cannot free: we are pinned in the retire epoch
    CHECK(g_freed.load() == 0);
  }
  reclaim::quiesce();
  CHECK(g_freed.load() == 1);
}

TEST_CASE("thread slots are distinct across live threads") {
  constexpr int kThreads = 8;
  std::vector<std::size_t> slots(kThreads);
  std::atomic<int> ready{0};
  std::atomic<bool> go{false};
  std::vector<std::thread> ts;
  for (int i = 0; i < kThreads; ++i) {
    ts.emplace_back([&, i] {
      slots[i] = reclaim::thread_slot();
      ready.fetch_add(1);
      while (!go.load()) std::this_thread::yield();  // hold the slot
    });
  }
  while (ready.load() < kThreads) std::this_thread::yield();
  go = true;
  for (auto& t : ts) t.join();
  std::set<std::size_t> uniq(slots.begin(), slots.end());
  CHECK(uniq.size() == kThreads);
}

TEST_CASE("concurrent retire churn stays balanced") {
  g_freed = 0;
  constexpr int kThreads = 4;
  constexpr int kPerThread = 5000;
  std::vector<std::thread> ts;
  for (int i = 0; i < kThreads; ++i) {
    ts.emplace_back([] {
      for (int j = 0; j < kPerThread; ++j) {
        reclaim::Guard g;
        reclaim::retire(new Tracked);
      }
    });
  }
  for (auto& t : ts) t.join();
  reclaim::quiesce();
  CHECK(g_freed.load() == kThreads * kPerThread);
  CHECK(reclaim::pending() == 0);
}
