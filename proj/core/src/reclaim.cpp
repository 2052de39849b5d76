#include "hohtree/reclaim.hpp"

#include <atomic>
#include <mutex>
#include <stdexcept>
#include <vector>

namespace hohtree::reclaim {
namespace {

constexpr std::uint64_t kIdle = UINT64_MAX;

struct alignas(64) Slot {
  std::atomic<std::uint64_t> reservation{kIdle};
  std::atomic<bool> in_use{false};
};

struct Retired {
  void* ptr;
  void (*deleter)(void*);
  std::uint64_t epoch;
};

std::atomic<std::uint64_t> g_epoch{1};
Slot g_slots[kMaxThreads];
std::atomic<std::size_t> g_slot_high{0};  // one past the highest slot ever used
std::atomic<std::size_t> g_pending{0};

std::mutex g_orphan_mu;
std::vector<Retired> g_orphans;

// Advance only when every pinned thread has reached the current epoch.
void try_advance() {
  std::uint64_t e = g_epoch.load(std::memory_order_acquire);
  const std::size_t high = g_slot_high.load(std::memory_order_acquire);
  for (std::size_t i = 0; i < high; ++i) {
    const std::uint64_t r = g_slots[i].reservation.load(std::memory_order_acquire);
    if (r != kIdle && r < e) return;
  }
  g_epoch.compare_exchange_strong(e, e + 1, std::memory_order_acq_rel);
}

struct ThreadCtx {
  std::size_t slot = kMaxThreads;
  std::size_t depth = 0;
  std::vector<Retired> retired;

  ThreadCtx() {
    for (std::size_t i = 0; i < kMaxThreads; ++i) {
      bool expected = false;
      if (g_slots[i].in_use.compare_exchange_strong(expected, true,
                                                    std::memory_order_acq_rel)) {
        slot = i;
        break;
      }
    }
    if (slot == kMaxThreads) throw std::runtime_error("reclaim: out of thread slots");
    std::size_t high = g_slot_high.load(std::memory_order_relaxed);
    while (high < slot + 1 &&
           !g_slot_high.compare_exchange_weak(high, slot + 1, std::memory_order_acq_rel)) {
    }
  }

  ~ThreadCtx() {
    if (!retired.empty()) {
      std::lock_guard<std::mutex> lk(g_orphan_mu);
      g_orphans.insert(g_orphans.end(), retired.begin(), retired.end());
    }
    g_slots[slot].reservation.store(kIdle, std::memory_order_release);
    g_slots[slot].in_use.store(false, std::memory_order_release);
  }

  void collect() {
    try_advance();
    const std::uint64_t e = g_epoch.load(std::memory_order_acquire);
    if (e < 3) return;
    const std::uint64_t safe = e - 2;
    std::size_t kept = 0;
    for (auto& r : retired) {
      if (r.epoch <= safe) {
        r.deleter(r.ptr);
        g_pending.fetch_sub(1, std::memory_order_relaxed);
      } else {
        retired[kept++] = r;
      }
    }
    retired.resize(kept);
    if (std::unique_lock<std::mutex> lk(g_orphan_mu, std::try_to_lock); lk.owns_lock()) {
      kept = 0;
      for (auto& r : g_orphans) {
        if (r.epoch <= safe) {
          r.deleter(r.ptr);
          g_pending.fetch_sub(1, std::memory_order_relaxed);
        } else {
          g_orphans[kept++] = r;
        }
      }
      g_orphans.resize(kept);
    }
  }
};

ThreadCtx& ctx() {
  thread_local ThreadCtx tc;
  return tc;
}

constexpr std::size_t kCollectThreshold = 512;

}  // namespace

std::size_t thread_slot() { return ctx().slot; }

Guard::Guard() {
  ThreadCtx& tc = ctx();
  if (tc.depth++ == 0) {
    Slot& s = g_slots[tc.slot];
    for (;;) {
      const std::uint64_t e = g_epoch.load(std::memory_order_acquire);
      s.reservation.store(e, std::memory_order_seq_cst);
      std::atomic_thread_fence(std::memory_order_seq_cst);
      if (g_epoch.load(std::memory_order_acquire) == e) break;
    }
  }
}

Guard::~Guard() {
  ThreadCtx& tc = ctx();
  if (--tc.depth == 0) {
    g_slots[tc.slot].reservation.store(kIdle, std::memory_order_release);
    if (tc.retired.size() >= kCollectThreshold) tc.collect();
  }
}

void retire(void* p, void (*deleter)(void*)) {
  ThreadCtx& tc = ctx();
  tc.retired.push_back({p, deleter, g_epoch.load(std::memory_order_acquire)});
  g_pending.fetch_add(1, std::memory_order_relaxed);
}

void flush() { ctx().collect(); }

void quiesce() {
  ThreadCtx& tc = ctx();
  for (int i = 0; i < 4; ++i) try_advance();
  auto free_all = [](std::vector<Retired>& v) {
    for (auto& r : v) {
      r.deleter(r.ptr);
      g_pending.fetch_sub(1, std::memory_order_relaxed);
    }
    v.clear();
  };
  free_all(tc.retired);
  std::lock_guard<std::mutex> lk(g_orphan_mu);
  free_all(g_orphans);
}

std::size_t pending() { return g_pending.load(std::memory_order_relaxed); }

}  // namespace hohtree::reclaim
