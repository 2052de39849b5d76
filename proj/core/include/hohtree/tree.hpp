#ifndef HOHTREE_TREE_HPP
#define HOHTREE_TREE_HPP

#include <atomic>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "hohtree/descriptor.hpp"
#include "hohtree/node.hpp"
#include "hohtree/queue.hpp"
#include "hohtree/reclaim.hpp"
#include "hohtree/types.hpp"

// Concurrent, linearizable, balanced external BST with scalar operations and
// an aggregate range count that runs in amortized logarithmic time.
//
// Every operation enters the root queue, which assigns it a timestamp; the
// timestamp order is the linearization order. Descriptors then flow down
// per-node FIFO queues, and any thread arriving at a node first completes
// every earlier-timestamped descriptor queued there before its own
// (hand-over-hand helping). All shared effects — state advances, queue
// insertion/removal, structural edits, partial-result recording — happen
// exactly once per (descriptor, node) regardless of how many threads replay
// them.

namespace hohtree {

enum class RootMode : std::uint8_t { LockFree, Announce };

struct TreeConfig {
  double rebuild_k = 1.0;  // rebuild a subtree when mod_cnt would exceed k * init_sz
  RootMode root_mode = RootMode::LockFree;
  std::size_t announce_slots = reclaim::kMaxThreads;
};

struct OpRecord {
  Timestamp timestamp;
  std::uint64_t value;  // 0/1 for scalar operations, the count otherwise
};

struct AuditReport {
  bool ok = true;
  std::string detail;
  std::uint64_t size = 0;
  std::uint64_t height = 0;
};

class ConcurrentTree {
 public:
  explicit ConcurrentTree(TreeConfig cfg = {});
  ~ConcurrentTree();
  ConcurrentTree(const ConcurrentTree&) = delete;
  ConcurrentTree& operator=(const ConcurrentTree&) = delete;

  // Scalar operations; linearize at their root-queue timestamp.
  bool insert(Key k);
  bool remove(Key k);
  bool contains(Key k);

  // Keys in [min, max] at the operation's timestamp. Throws
  // std::invalid_argument if min > max (rejected before enqueue).
  std::uint64_t count(Key min, Key max);

  // Same operations, also reporting the assigned timestamp so a harness can
  // replay the run in linearization order.
  OpRecord insert_traced(Key k);
  OpRecord remove_traced(Key k);
  OpRecord contains_traced(Key k);
  OpRecord count_traced(Key min, Key max);

  const TreeConfig& config() const { return cfg_; }

  // --- Debug hooks. Quiescent callers only, except root_queue_timestamps.
  std::vector<Key> keys() const;
  std::uint64_t size() const;
  std::uint64_t height() const;
  AuditReport audit() const;
  std::vector<Timestamp> root_queue_timestamps() const;

  // Linear collect-then-measure walk over [min, max]; the baseline an
  // unaugmented tree would use to answer count.
  std::vector<Key> collect_range(Key min, Key max) const;

 private:
  struct Site {
    InnerNode* node;  // nullptr means the fictive root
  };

  NodeId site_id(Site v) const { return v.node != nullptr ? v.node->id : kFictiveId; }
  NodeQueue& site_queue(Site v) { return v.node != nullptr ? v.node->queue : root_.queue; }

  OpRecord run(OpKind kind, Key a, Key b);
  void execute_operation(Descriptor& d);
  void execute_until_timestamp(Descriptor& d, Site v);
  void execute_in_node(Descriptor& d, Site v);
  void decide_update(Descriptor& d);
  bool compute_plan(Descriptor& d, Site v, NodePlan& out);
  bool compute_count_plan(Descriptor& d, Site v, NodePlan& out);
  void run_plan_actions(Descriptor& d, Site v, const NodePlan& plan);
  InnerNode* rebuild_child(Descriptor& d, std::atomic<TreeNode*>& cell, InnerNode* old_child);
  void finish_pending(Descriptor& d, InnerNode& n);
  std::uint64_t assemble_result(Descriptor& d);

  TreeConfig cfg_;
  IdSource ids_;
  FictiveRoot root_;
  std::unique_ptr<TimestampAllocator> alloc_;
};

}  // namespace hohtree

#endif  // HOHTREE_TREE_HPP
