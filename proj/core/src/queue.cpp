#include "hohtree/queue.hpp"

#include <algorithm>
#include <cassert>
#include <utility>

#include "hohtree/descriptor.hpp"
#include "hohtree/reclaim.hpp"
#include "hohtree/stats.hpp"

namespace hohtree {

NodeQueue::NodeQueue(Timestamp dummy_ts) {
  auto* dummy = new QueueCell{nullptr, dummy_ts};
  head_.store(dummy, std::memory_order_relaxed);
  tail_.store(dummy, std::memory_order_relaxed);
}

NodeQueue::~NodeQueue() {
  QueueCell* c = head_.load(std::memory_order_relaxed);
  while (c != nullptr) {
    QueueCell* next = c->next.load(std::memory_order_relaxed);
    delete c;
    c = next;
  }
}

NodeQueue::Head NodeQueue::peek() const {
  for (;;) {
    QueueCell* h = head_.load(std::memory_order_acquire);
    QueueCell* n = h->next.load(std::memory_order_acquire);
    if (h != head_.load(std::memory_order_acquire)) continue;
    if (n == nullptr) return {nullptr, kNoTimestamp};
    return {n->data, n->ts};
  }
}

Timestamp NodeQueue::push_acquire_timestamp(Descriptor* d) {
  assert(d->timestamp.load(std::memory_order_relaxed) == kNoTimestamp);
  auto* cell = new QueueCell{d, kNoTimestamp};
  for (;;) {
    QueueCell* t = tail_.load(std::memory_order_acquire);
    QueueCell* n = t->next.load(std::memory_order_acquire);
    if (t != tail_.load(std::memory_order_acquire)) continue;
    if (n != nullptr) {
      tail_.compare_exchange_weak(t, n, std::memory_order_acq_rel);
      continue;
    }
    const Timestamp ts = t->ts + 1;
    cell->ts = ts;
    // The descriptor is not yet visible to anyone else in this mode; the
    // linking CAS below publishes the final value.
    d->timestamp.store(ts, std::memory_order_relaxed);
    QueueCell* expected = nullptr;
    if (t->next.compare_exchange_strong(expected, cell, std::memory_order_acq_rel,
                                        std::memory_order_acquire)) {
      tail_.compare_exchange_strong(t, cell, std::memory_order_acq_rel);
      counters().queue_pushes.fetch_add(1, std::memory_order_relaxed);
      return ts;
    }
  }
}

void NodeQueue::push_if(Descriptor* d) {
  const Timestamp ts = d->timestamp.load(std::memory_order_acquire);
  assert(ts != kNoTimestamp);
  QueueCell* cell = nullptr;
  for (;;) {
    QueueCell* t = tail_.load(std::memory_order_acquire);
    QueueCell* n = t->next.load(std::memory_order_acquire);
    if (t != tail_.load(std::memory_order_acquire)) continue;
    if (n != nullptr) {
      tail_.compare_exchange_weak(t, n, std::memory_order_acq_rel);
      continue;
    }
    if (t->ts >= ts) {
      // The queue has already seen this timestamp: the descriptor was
      // inserted (and possibly already removed) by another helper.
      delete cell;
      return;
    }
    if (cell == nullptr) cell = new QueueCell{d, ts};
    QueueCell* expected = nullptr;
    if (t->next.compare_exchange_strong(expected, cell, std::memory_order_acq_rel,
                                        std::memory_order_acquire)) {
      tail_.compare_exchange_strong(t, cell, std::memory_order_acq_rel);
      counters().queue_pushes.fetch_add(1, std::memory_order_relaxed);
      if (ts <= t->ts) counters().queue_order_violations.fetch_add(1, std::memory_order_relaxed);
      return;
    }
  }
}

void NodeQueue::pop_if(const Descriptor* d) {
  const Timestamp ts = d->timestamp.load(std::memory_order_acquire);
  for (;;) {
    QueueCell* h = head_.load(std::memory_order_acquire);
    QueueCell* t = tail_.load(std::memory_order_acquire);
    QueueCell* n = h->next.load(std::memory_order_acquire);
    if (h != head_.load(std::memory_order_acquire)) continue;
    if (n == nullptr) return;
    if (h == t) {
      tail_.compare_exchange_weak(t, n, std::memory_order_acq_rel);
      continue;
    }
#ifndef HOHTREE_MUTATE_POP_IF
    if (n->ts != ts) return;  // someone already removed it
#endif
    if (head_.compare_exchange_strong(h, n, std::memory_order_acq_rel,
                                      std::memory_order_acquire)) {
      counters().queue_pops.fetch_add(1, std::memory_order_relaxed);
      reclaim::retire(h);
      return;
    }
  }
}

Timestamp NodeQueue::tail_timestamp() const {
  QueueCell* t = tail_.load(std::memory_order_acquire);
  for (QueueCell* n = t->next.load(std::memory_order_acquire); n != nullptr;
       n = t->next.load(std::memory_order_acquire)) {
    t = n;
  }
  return t->ts;
}

std::vector<Timestamp> NodeQueue::timestamps() const {
  std::vector<Timestamp> out;
  QueueCell* h = head_.load(std::memory_order_acquire);
  for (QueueCell* c = h->next.load(std::memory_order_acquire); c != nullptr;
       c = c->next.load(std::memory_order_acquire)) {
    out.push_back(c->ts);
  }
  return out;
}

std::atomic<void (*)(std::size_t)> TimestampAllocator::publish_hook{nullptr};

TimestampAllocator::TimestampAllocator(std::size_t slot_count) : slots_(slot_count) {
  for (auto& s : slots_) s.store(nullptr, std::memory_order_relaxed);
}

Timestamp TimestampAllocator::announce_enqueue(NodeQueue& root_queue, Descriptor* d,
                                               std::size_t slot) {
  assert(slot < slots_.size());
  assert(d->timestamp.load(std::memory_order_relaxed) == kNoTimestamp);
  slots_[slot].store(d, std::memory_order_release);
  if (auto hook = publish_hook.load(std::memory_order_acquire)) hook(slot);

  const std::uint64_t version = version_.fetch_add(1, std::memory_order_acq_rel) + 1;
  Timestamp expected = kNoTimestamp;
  d->timestamp.compare_exchange_strong(expected, version, std::memory_order_acq_rel,
                                       std::memory_order_acquire);

  // Give every announced-but-unassigned peer a fresh version. Fresh (rather
  // than reused) versions keep timestamps unique; a late assignment is then
  // larger than every version fetched so far, so it can never be fenced out
  // of the root queue by an already-pushed larger timestamp.
  for (auto& s : slots_) {
    Descriptor* peer = s.load(std::memory_order_acquire);
    if (peer == nullptr) continue;
    if (peer->timestamp.load(std::memory_order_acquire) == kNoTimestamp) {
      const std::uint64_t fresh = version_.fetch_add(1, std::memory_order_acq_rel) + 1;
      Timestamp zero = kNoTimestamp;
      peer->timestamp.compare_exchange_strong(zero, fresh, std::memory_order_acq_rel,
                                              std::memory_order_acquire);
    }
  }

  const Timestamp mine = d->timestamp.load(std::memory_order_acquire);

  // Enqueue, in timestamp order, every announced descriptor that must enter
  // the root queue no later than ours.
  std::vector<std::pair<Timestamp, Descriptor*>> batch;
  batch.reserve(slots_.size());
  for (auto& s : slots_) {
    Descriptor* peer = s.load(std::memory_order_acquire);
    if (peer == nullptr) continue;
    const Timestamp ts = peer->timestamp.load(std::memory_order_acquire);
    if (ts != kNoTimestamp && ts <= mine) batch.emplace_back(ts, peer);
  }
  std::sort(batch.begin(), batch.end());
  for (auto& [ts, peer] : batch) {
    (void)ts;
    root_queue.push_if(peer);
  }

  slots_[slot].store(nullptr, std::memory_order_release);
  return mine;
}

}  // namespace hohtree
