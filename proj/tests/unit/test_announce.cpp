#include <doctest.h>

#include <algorithm>
#include <atomic>
#include <memory>
#include <thread>
#include <vector>

#include "hohtree/descriptor.hpp"
#include "hohtree/queue.hpp"
#include "hohtree/reclaim.hpp"

using namespace hohtree;

namespace {

std::atomic<bool> g_stall_armed{false};
std::atomic<bool> g_stalled{false};
std::atomic<bool> g_release{false};

void stall_first_publisher(std::size_t) {
  if (g_stall_armed.exchange(false)) {
    g_stalled.store(true);
    while (!g_release.load()) std::this_thread::yield();
  }
}

struct HookReset {
  ~HookReset() { TimestampAllocator::publish_hook.store(nullptr); }
};

}  // namespace

TEST_CASE("announce mode alone behaves like the lock-free root push") {
  reclaim::Guard g;
  NodeQueue q;
  TimestampAllocator alloc(16);
  auto a = std::make_unique<Descriptor>(OpKind::Contains, 0, 0);
  auto b = std::make_unique<Descriptor>(OpKind::Contains, 0, 0);
  auto c = std::make_unique<Descriptor>(OpKind::Contains, 0, 0);
  CHECK(alloc.announce_enqueue(q, a.get(), 0) == 1);
  CHECK(alloc.announce_enqueue(q, b.get(), 0) == 2);
  CHECK(alloc.announce_enqueue(q, c.get(), 0) == 3);
  CHECK(q.timestamps() == std::vector<Timestamp>{1, 2, 3});
}

TEST_CASE("a stalled publisher is timestamped and enqueued by a peer") {
  HookReset reset;
  NodeQueue q;
  TimestampAllocator alloc(16);
  auto stalled = std::make_unique<Descriptor>(OpKind::Insert, 1, 1);
  auto helper = std::make_unique<Descriptor>(OpKind::Insert, 2, 2);

  g_stall_armed = true;
  g_stalled = false;
  g_release = false;
  TimestampAllocator::publish_hook.store(&stall_first_publisher);

  Timestamp stalled_ts = 0;
  std::thread owner([&] {
    reclaim::Guard g;
    stalled_ts = alloc.announce_enqueue(q, stalled.get(), 0);
  });
  while (!g_stalled.load()) std::this_thread::yield();

  {
    reclaim::Guard g;
    alloc.announce_enqueue(q, helper.get(), 1);
    // The peer assigned the stalled descriptor a timestamp; a subsequent
    // operation picks it up and enqueues it.
    CHECK(stalled->timestamp.load() != kNoTimestamp);
    auto late = std::make_unique<Descriptor>(OpKind::Insert, 3, 3);
    alloc.announce_enqueue(q, late.get(), 1);
    const auto ts = q.timestamps();
    CHECK(std::count(ts.begin(), ts.end(), stalled->timestamp.load()) == 1);

    g_release = true;
    owner.join();
    CHECK(stalled_ts == stalled->timestamp.load());
    late.reset();
  }
  reclaim::quiesce();
}

TEST_CASE("announced timestamps enter the root queue strictly increasing") {
  constexpr unsigned kThreads = 8;
  constexpr unsigned kPerThread = 100;
  NodeQueue q;
  TimestampAllocator alloc(kThreads);
  std::vector<std::vector<std::unique_ptr<Descriptor>>> descs(kThreads);
  std::atomic<bool> go{false};
  std::vector<std::thread> ts;
  for (unsigned i = 0; i < kThreads; ++i) {
    for (unsigned j = 0; j < kPerThread; ++j) {
      descs[i].push_back(std::make_unique<Descriptor>(OpKind::Contains, 0, 0));
    }
    ts.emplace_back([&, i] {
      reclaim::Guard g;
      while (!go.load()) {
      }
      for (auto& d : descs[i]) alloc.announce_enqueue(q, d.get(), i);
    });
  }
  go = true;
  for (auto& t : ts) t.join();

  const auto in_queue = q.timestamps();
  CHECK(in_queue.size() == kThreads * kPerThread);
  for (std::size_t i = 1; i < in_queue.size(); ++i) CHECK(in_queue[i - 1] < in_queue[i]);
  reclaim::quiesce();
}
