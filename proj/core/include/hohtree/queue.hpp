#ifndef HOHTREE_QUEUE_HPP
#define HOHTREE_QUEUE_HPP

#include <atomic>
#include <cstddef>
#include <vector>

#include "hohtree/types.hpp"

// Per-node descriptor queues. Michael-Scott layout: `head` points at a dummy
// cell, the first real descriptor lives at head->next, `tail` may lag by one
// cell and is fixed forward by any passerby. A popped cell becomes the new
// dummy and keeps its timestamp, so the dummy always remembers the last
// timestamp that went through the queue; push_if relies on that to reject
// re-insertion of descriptors the queue has already seen.

namespace hohtree {

struct Descriptor;

struct QueueCell {
  Descriptor* data;  // null only in the initial dummy
  Timestamp ts;
  std::atomic<QueueCell*> next{nullptr};
};

class NodeQueue {
 public:
  // `dummy_ts` is the timestamp barrier at creation: 0 for the root queue
  // and freshly split nodes created by operation t use t; rebuilt nodes use
  // t-1 (mirroring their state's Ts_Mod).
  explicit NodeQueue(Timestamp dummy_ts = kNoTimestamp);
  ~NodeQueue();
  NodeQueue(const NodeQueue&) = delete;
  NodeQueue& operator=(const NodeQueue&) = delete;

  struct Head {
    Descriptor* desc;  // null if the queue is empty
    Timestamp ts;
  };

  // First descriptor in FIFO order; never removes. Caller must hold a
  // reclaim::Guard.
  Head peek() const;

  // Root-queue push: assigns the descriptor the incremented timestamp of the
  // tail at the linearization point and appends it. Lock-free.
  Timestamp push_acquire_timestamp(Descriptor* d);

  // Appends `d` (timestamp already assigned) unless the queue has already
  // seen a timestamp >= d's, in which case the queue is left unmodified.
  void push_if(Descriptor* d);

  // Removes `d` from the head if it is still there; no-op otherwise. `d`
  // must have been at the head at some point (never removed from the
  // middle).
  void pop_if(const Descriptor* d);

  Timestamp tail_timestamp() const;

  // Debug hook: snapshot of the timestamps currently in the queue,
  // head-to-tail. Safe only at quiescence or under a guard with tolerance
  // for concurrent pops.
  std::vector<Timestamp> timestamps() const;

 private:
  std::atomic<QueueCell*> head_;
  std::atomic<QueueCell*> tail_;
};

// Wait-free timestamp distribution (announce array). Each participating
// thread owns one slot, publishes its descriptor there, and timestamps plus
// enqueues every announced descriptor it is responsible for, so a stalled
// owner cannot block its own descriptor from entering the root queue.
class TimestampAllocator {
 public:
  explicit TimestampAllocator(std::size_t slot_count);

  // Wait-free variant of push_acquire_timestamp. `slot` must be owned by the
  // calling thread for the duration of the call.
  Timestamp announce_enqueue(NodeQueue& root_queue, Descriptor* d, std::size_t slot);

  std::size_t slot_count() const { return slots_.size(); }

  // Test hook: invoked right after the descriptor is published in its slot,
  // before any timestamp work. Used to simulate a thread stalling at the
  // worst moment.
  static std::atomic<void (*)(std::size_t slot)> publish_hook;

 private:
  std::atomic<std::uint64_t> version_{0};
  std::vector<std::atomic<Descriptor*>> slots_;
};

}  // namespace hohtree

#endif  // HOHTREE_QUEUE_HPP
