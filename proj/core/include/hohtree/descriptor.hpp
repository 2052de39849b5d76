#ifndef HOHTREE_DESCRIPTOR_HPP
#define HOHTREE_DESCRIPTOR_HPP

#include <atomic>
#include <cstdint>

#include "hohtree/once_map.hpp"
#include "hohtree/types.hpp"

// One in-flight operation, shared by reference between its initiator and any
// helpers. All cross-thread coordination goes through insert-once maps and
// CAS-once slots, so replaying any step is harmless.

namespace hohtree {

struct TreeNode;
struct InnerNode;

enum class OpKind : std::uint8_t { Insert, Remove, Contains, Count };

enum class CountMode : std::uint8_t { Both, LeftBorder, RightBorder };

struct PartialResult {
  std::uint64_t value;
};

struct DescendStep {
  InnerNode* child = nullptr;  // post-rebuild target if a rebuild triggered
  CountMode mode = CountMode::Both;
};

// What executing the operation in one node does. Computed once, while the
// descriptor is at the head of that node's queue, and recorded insert-once;
// every helper (including arbitrarily stale ones) then replays the recorded
// plan instead of re-deriving it from links that may have moved on. The
// edit fields generalize the structural slot: all helpers race the same
// compare-and-exchange with identical expected/replacement references.
struct NodePlan {
  std::uint32_t n_descend = 0;
  DescendStep descend[2];

  bool edit = false;
  std::atomic<TreeNode*>* edit_cell = nullptr;
  TreeNode* edit_expected = nullptr;
  TreeNode* edit_replacement = nullptr;
  TreeNode* edit_retire[2] = {nullptr, nullptr};

  bool record = false;
  std::uint64_t partial = 0;
};

// Nodes still to be visited by the initiator. Multi-producer (helpers append
// children), single-consumer (only the initiator peeks/pops). Duplicate
// entries are permitted; a revisit is a no-op. Cells are kept linked until
// the descriptor dies, so producers never touch freed memory.
class TraverseQueue {
 public:
  TraverseQueue() {
    first_ = new Cell{nullptr};
    head_ = first_;
    tail_.store(first_, std::memory_order_relaxed);
  }

  ~TraverseQueue() {
    Cell* c = first_;
    while (c != nullptr) {
      Cell* next = c->next.load(std::memory_order_relaxed);
      delete c;
      c = next;
    }
  }

  TraverseQueue(const TraverseQueue&) = delete;
  TraverseQueue& operator=(const TraverseQueue&) = delete;

  void push(InnerNode* n) {
    Cell* cell = new Cell{n};
    Cell* t = tail_.load(std::memory_order_acquire);
    for (;;) {
      Cell* expected = nullptr;
      if (t->next.compare_exchange_strong(expected, cell, std::memory_order_acq_rel,
                                          std::memory_order_acquire)) {
        tail_.compare_exchange_strong(t, cell, std::memory_order_acq_rel);
        return;
      }
      t = expected;  // chase the real tail
    }
  }

  // Initiator only.
  InnerNode* peek() const {
    Cell* n = head_->next.load(std::memory_order_acquire);
    return n != nullptr ? n->node : nullptr;
  }

  // Initiator only; drops the current head entry.
  void pop() {
    Cell* n = head_->next.load(std::memory_order_acquire);
    if (n != nullptr) head_ = n;
  }

 private:
  struct Cell {
    InnerNode* node;
    std::atomic<Cell*> next{nullptr};
  };

  Cell* first_;  // original dummy; owns the chain
  Cell* head_;   // consumer cursor (cell before the next entry)
  std::atomic<Cell*> tail_;
};

struct Descriptor {
  const OpKind kind;
  const Key key_a;  // scalar key, or range min
  const Key key_b;  // range max (unused for scalar ops)

  std::atomic<Timestamp> timestamp{kNoTimestamp};

  // For insert/remove: 1 if the operation modifies the tree at its
  // linearization point, 0 if it is a duplicate insert / absent remove.
  // Set exactly once while the descriptor heads the root queue.
  std::atomic<int> decision{-1};

  TraverseQueue traverse;
  OnceMap<NodePlan> plans;
  OnceMap<CountMode> modes;  // count: mode assigned by the parent
  OnceMap<PartialResult> processed;

  // Assembled by the initiator after traverse drains.
  std::uint64_t result = 0;

  Descriptor(OpKind k, Key a, Key b) : kind(k), key_a(a), key_b(b) {}

  bool is_update() const { return kind == OpKind::Insert || kind == OpKind::Remove; }
};

}  // namespace hohtree

#endif  // HOHTREE_DESCRIPTOR_HPP
