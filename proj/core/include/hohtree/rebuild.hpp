#ifndef HOHTREE_REBUILD_HPP
#define HOHTREE_REBUILD_HPP

#include <cstdint>
#include <vector>

#include "hohtree/node.hpp"
#include "hohtree/types.hpp"

// Threshold-triggered subtree rebuilding. The trigger test and the balanced
// construction are pure; draining a subtree's pending descriptors and the
// parent-link swap live in the execution engine (they need helping).

namespace hohtree {

// True iff applying one more modification pushes mod_cnt past k * init_sz.
inline bool needs_rebuild(const NodeState& s, std::uint64_t init_sz, double k) {
  return static_cast<double>(s.mod_cnt + 1) > k * static_cast<double>(init_sz);
}

// In-order leaf keys of a drained subtree (no pending descriptors anywhere
// beneath).
std::vector<Key> collect_keys(const TreeNode* subtree);

// Perfectly balanced external tree over strictly increasing keys. Every
// inner node gets mod_cnt = 0, init_sz equal to the leaves beneath it, and
// ts_mod = trigger_ts - 1, so the triggering operation and everything after
// it can modify the new subtree while anything earlier cannot. The queue
// dummies carry trigger_ts - 1 for the same reason. Empty input yields the
// empty node.
TreeNode* build_ideal(const std::vector<Key>& keys, Timestamp trigger_ts, IdSource& ids);

// Immediate teardown of a never-published subtree (a losing helper's build).
void destroy_subtree(TreeNode* n);

// Deferred teardown of an unlinked subtree that other threads may still be
// reading.
void retire_subtree(TreeNode* n);

void retire_node(TreeNode* n);

// Edges on the longest root-to-leaf path; 0 for Leaf and Empty.
std::uint64_t subtree_height(const TreeNode* n);

}  // namespace hohtree

#endif  // HOHTREE_REBUILD_HPP
