#include "hohtree/rebuild.hpp"

#include <cassert>

#include "hohtree/reclaim.hpp"

namespace hohtree {
namespace {

void collect_rec(const TreeNode* n, std::vector<Key>& out) {
  switch (n->tag) {
    case NodeTag::Empty:
      return;
    case NodeTag::Leaf:
      out.push_back(static_cast<const LeafNode*>(n)->key);
      return;
    case NodeTag::Inner: {
      const auto* in = static_cast<const InnerNode*>(n);
      collect_rec(in->left.load(std::memory_order_acquire), out);
      collect_rec(in->right.load(std::memory_order_acquire), out);
      return;
    }
  }
}

TreeNode* build_range(const std::vector<Key>& keys, std::size_t lo, std::size_t hi,
                      Timestamp state_ts, IdSource& ids) {
  const std::size_t n = hi - lo;
  if (n == 1) return new LeafNode(keys[lo]);
  const std::size_t mid = lo + n / 2;
  TreeNode* l = build_range(keys, lo, mid, state_ts, ids);
  TreeNode* r = build_range(keys, mid, hi, state_ts, ids);
  return new InnerNode(ids.generate(), keys[mid], l, r,
                       NodeState{n, 0, state_ts}, state_ts);
}

}  // namespace

std::vector<Key> collect_keys(const TreeNode* subtree) {
  std::vector<Key> out;
  collect_rec(subtree, out);
  for (std::size_t i = 1; i < out.size(); ++i) assert(out[i - 1] < out[i]);
  return out;
}

TreeNode* build_ideal(const std::vector<Key>& keys, Timestamp trigger_ts, IdSource& ids) {
  if (keys.empty()) return empty_node();
  assert(trigger_ts >= 1);
  return build_range(keys, 0, keys.size(), trigger_ts - 1, ids);
}

void destroy_subtree(TreeNode* n) {
  switch (n->tag) {
    case NodeTag::Empty:
      return;
    case NodeTag::Leaf:
      delete static_cast<LeafNode*>(n);
      return;
    case NodeTag::Inner: {
      auto* in = static_cast<InnerNode*>(n);
      destroy_subtree(in->left.load(std::memory_order_relaxed));
      destroy_subtree(in->right.load(std::memory_order_relaxed));
      delete in;
      return;
    }
  }
}

void retire_node(TreeNode* n) {
  switch (n->tag) {
    case NodeTag::Empty:
      return;
    case NodeTag::Leaf:
      reclaim::retire(static_cast<LeafNode*>(n));
      return;
    case NodeTag::Inner:
      reclaim::retire(static_cast<InnerNode*>(n));
      return;
  }
}

void retire_subtree(TreeNode* n) {
  if (n->tag == NodeTag::Inner) {
    auto* in = static_cast<InnerNode*>(n);
    retire_subtree(in->left.load(std::memory_order_acquire));
    retire_subtree(in->right.load(std::memory_order_acquire));
  }
  retire_node(n);
}

std::uint64_t subtree_height(const TreeNode* n) {
  if (n->tag != NodeTag::Inner) return 0;
  const auto* in = static_cast<const InnerNode*>(n);
  const std::uint64_t l = subtree_height(in->left.load(std::memory_order_acquire));
  const std::uint64_t r = subtree_height(in->right.load(std::memory_order_acquire));
  return 1 + (l > r ? l : r);
}

}  // namespace hohtree
