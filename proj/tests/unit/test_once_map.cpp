#include <doctest.h>

#include <atomic>
#include <thread>
#include <vector>

#include "hohtree/once_map.hpp"

using namespace hohtree;

TEST_CASE("first insertion wins, later ones are discarded") {
  OnceMap<int> m;
  CHECK(m.find(7) == nullptr);
  CHECK(m.insert_once(7, 100) == 100);
  CHECK(m.insert_once(7, 200) == 100);
  REQUIRE(m.find(7) != nullptr);
  CHECK(*m.find(7) == 100);
  CHECK(m.size() == 1);
}

TEST_CASE("distinct keys coexist") {
  OnceMap<int> m;
  for (int i = 0; i < 50; ++i) m.insert_once(i, i * 3);
  for (int i = 0; i < 50; ++i) {
    REQUIRE(m.find(i) != nullptr);
    CHECK(*m.find(i) == i * 3);
  }
  CHECK(m.size() == 50);
}

TEST_CASE("concurrent same-key insertions agree on one winner") {
  for (int round = 0; round < 50; ++round) {
    OnceMap<int> m;
    constexpr int kThreads = 8;
    std::vector<int> seen(kThreads);
    std::atomic<bool> go{false};
    std::vector<std::thread> ts;
    for (int i = 0; i < kThreads; ++i) {
      ts.emplace_back([&, i] {
        while (!go.load()) {
        }
        seen[i] = m.insert_once(42, i);
      });
    }
    go = true;
    for (auto& t : ts) t.join();
    const int winner = *m.find(42);
    for (int i = 0; i < kThreads; ++i) CHECK(seen[i] == winner);
    CHECK(m.size() == 1);
  }
}
