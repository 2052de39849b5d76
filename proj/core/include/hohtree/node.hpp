#ifndef HOHTREE_NODE_HPP
#define HOHTREE_NODE_HPP

#include <atomic>
#include <cassert>
#include <cstdint>

#include "hohtree/queue.hpp"
#include "hohtree/types.hpp"

// External search tree records. Keys live only in leaves; inner nodes route
// by right_subtree_min (every key reachable to the left is strictly smaller,
// everything to the right is >=). Leaf and Empty nodes are immutable; all
// structural change replaces a child link with a freshly allocated record,
// which also rules out ABA on the link cells.

namespace hohtree {

// Subtree metadata, published as a whole through an atomic pointer so reads
// are never torn. A record is immutable once installed; "modifying" a state
// means installing a replacement with a strictly larger ts_mod.
struct NodeState {
  std::uint64_t size;     // keys in this subtree
  std::uint64_t mod_cnt;  // modifications applied since node creation
  Timestamp ts_mod;       // timestamp of the last modifying operation
};

enum class NodeTag : std::uint8_t { Empty, Leaf, Inner };

struct TreeNode {
  const NodeTag tag;

 protected:
  explicit constexpr TreeNode(NodeTag t) : tag(t) {}
};

struct EmptyNode final : TreeNode {
  constexpr EmptyNode() : TreeNode(NodeTag::Empty) {}
};

// The empty subtree; a process-wide immutable singleton, never reclaimed.
TreeNode* empty_node();

struct LeafNode final : TreeNode {
  const Key key;
  explicit LeafNode(Key k) : TreeNode(NodeTag::Leaf), key(k) {}
};

struct InnerNode final : TreeNode {
  const NodeId id;
  const Key right_subtree_min;
  const std::uint64_t init_sz;  // subtree size at node creation
  std::atomic<TreeNode*> left;
  std::atomic<TreeNode*> right;
  std::atomic<NodeState*> state_cell;
  NodeQueue queue;

  InnerNode(NodeId node_id, Key rsm, TreeNode* l, TreeNode* r, NodeState initial,
            Timestamp queue_ts)
      : TreeNode(NodeTag::Inner),
        id(node_id),
        right_subtree_min(rsm),
        init_sz(initial.size),
        left(l),
        right(r),
        state_cell(new NodeState(initial)),
        queue(queue_ts) {
    assert(init_sz >= 1);
  }

  ~InnerNode() { delete state_cell.load(std::memory_order_relaxed); }
};

// Stateless pseudo-parent of the real root; exists so operations executing
// "in" it can modify the real root. Its queue is the timestamp allocator.
struct FictiveRoot {
  std::atomic<TreeNode*> child;
  NodeQueue queue;

  FictiveRoot() : child(empty_node()), queue(kNoTimestamp) {}
};

// Monotone node-id source; ids are never reused within its lifetime.
class IdSource {
 public:
  NodeId generate() { return next_.fetch_add(1, std::memory_order_relaxed); }

 private:
  std::atomic<NodeId> next_{1};
};

inline const LeafNode* as_leaf(const TreeNode* n) {
  assert(n->tag == NodeTag::Leaf);
  return static_cast<const LeafNode*>(n);
}

inline InnerNode* as_inner(TreeNode* n) {
  assert(n->tag == NodeTag::Inner);
  return static_cast<InnerNode*>(n);
}

// One complete, internally consistent state record. Caller must hold a
// reclaim::Guard; the record stays readable for the guard's lifetime.
inline const NodeState* read_state(const InnerNode& n) {
  return n.state_cell.load(std::memory_order_acquire);
}

// Installs `replacement` iff the cell still holds `observed`. Failure means
// another helper of the same (or a later) operation already advanced the
// state; callers proceed without retrying. Requires
// replacement.ts_mod > observed->ts_mod.
bool try_advance_state(InnerNode& n, const NodeState* observed, NodeState replacement);

}  // namespace hohtree

#endif  // HOHTREE_NODE_HPP
