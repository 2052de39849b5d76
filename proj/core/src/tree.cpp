#include "hohtree/tree.hpp"

#include <cassert>
#include <stdexcept>

#include "hohtree/rebuild.hpp"
#include "hohtree/stats.hpp"

namespace hohtree {

TreeNode* empty_node() {
  static EmptyNode e;
  return &e;
}

bool try_advance_state(InnerNode& n, const NodeState* observed, NodeState replacement) {
#ifndef HOHTREE_MUTATE_TS_GUARD
  if (replacement.ts_mod <= observed->ts_mod) {
    counters().state_order_violations.fetch_add(1, std::memory_order_relaxed);
    return false;
  }
#endif
  auto* fresh = new NodeState(replacement);
  auto* expected = const_cast<NodeState*>(observed);
  if (n.state_cell.compare_exchange_strong(expected, fresh, std::memory_order_acq_rel,
                                           std::memory_order_acquire)) {
    counters().state_advances.fetch_add(1, std::memory_order_relaxed);
    reclaim::retire(const_cast<NodeState*>(observed));
    return true;
  }
  delete fresh;
  return false;
}

namespace {

// New inner node splitting an existing leaf to admit `k`. The old leaf is
// reused as one child, so nothing is retired when the split is installed.
InnerNode* make_split(TreeNode* leaf, Key k, Timestamp ts, IdSource& ids) {
  const Key lk = static_cast<LeafNode*>(leaf)->key;
  assert(lk != k);
  TreeNode* l = leaf;
  TreeNode* r = new LeafNode(k);
  Key rsm = k;
  if (k < lk) {
    l = r;
    r = leaf;
    rsm = lk;
  }
  return new InnerNode(ids.generate(), rsm, l, r, NodeState{2, 0, ts}, ts);
}

std::uint64_t leaf_in_range(const TreeNode* n, Key lo, Key hi) {
  if (n->tag != NodeTag::Leaf) return 0;
  const Key k = static_cast<const LeafNode*>(n)->key;
  return (lo <= k && k <= hi) ? 1 : 0;
}

std::uint64_t leaf_at_least(const TreeNode* n, Key lo) {
  if (n->tag != NodeTag::Leaf) return 0;
  return static_cast<const LeafNode*>(n)->key >= lo ? 1 : 0;
}

std::uint64_t leaf_at_most(const TreeNode* n, Key hi) {
  if (n->tag != NodeTag::Leaf) return 0;
  return static_cast<const LeafNode*>(n)->key <= hi ? 1 : 0;
}

}  // namespace

ConcurrentTree::ConcurrentTree(TreeConfig cfg) : cfg_(cfg) {
  if (cfg_.rebuild_k <= 0.0) throw std::invalid_argument("rebuild_k must be positive");
  if (cfg_.root_mode == RootMode::Announce) {
    alloc_ = std::make_unique<TimestampAllocator>(cfg_.announce_slots);
  }
}

ConcurrentTree::~ConcurrentTree() {
  reclaim::flush();
  destroy_subtree(root_.child.load(std::memory_order_relaxed));
}

bool ConcurrentTree::insert(Key k) { return run(OpKind::Insert, k, k).value != 0; }
bool ConcurrentTree::remove(Key k) { return run(OpKind::Remove, k, k).value != 0; }
bool ConcurrentTree::contains(Key k) { return run(OpKind::Contains, k, k).value != 0; }

std::uint64_t ConcurrentTree::count(Key min, Key max) {
  return count_traced(min, max).value;
}

OpRecord ConcurrentTree::insert_traced(Key k) { return run(OpKind::Insert, k, k); }
OpRecord ConcurrentTree::remove_traced(Key k) { return run(OpKind::Remove, k, k); }
OpRecord ConcurrentTree::contains_traced(Key k) { return run(OpKind::Contains, k, k); }

OpRecord ConcurrentTree::count_traced(Key min, Key max) {
  if (min > max) throw std::invalid_argument("count: min > max");
  return run(OpKind::Count, min, max);
}

OpRecord ConcurrentTree::run(OpKind kind, Key a, Key b) {
  reclaim::Guard guard;
  auto* d = new Descriptor(kind, a, b);
  execute_operation(*d);
  OpRecord rec{d->timestamp.load(std::memory_order_relaxed), d->result};
  reclaim::retire(d);
  return rec;
}

void ConcurrentTree::execute_operation(Descriptor& d) {
  if (cfg_.root_mode == RootMode::Announce) {
    const std::size_t slot = reclaim::thread_slot();
    assert(slot < alloc_->slot_count());
    alloc_->announce_enqueue(root_.queue, &d, slot);
  } else {
    root_.queue.push_acquire_timestamp(&d);
  }

  execute_until_timestamp(d, Site{nullptr});
  for (;;) {
    InnerNode* n = d.traverse.peek();
    if (n == nullptr) break;  // operation complete
    execute_until_timestamp(d, Site{n});
    d.traverse.pop();
  }
  d.result = assemble_result(d);
}

void ConcurrentTree::execute_until_timestamp(Descriptor& d, Site v) {
  const Timestamp ts = d.timestamp.load(std::memory_order_acquire);
  for (;;) {
    const NodeQueue::Head head = site_queue(v).peek();
    if (head.desc == nullptr || head.ts > ts) return;
    execute_in_node(*head.desc, v);
  }
}

void ConcurrentTree::execute_in_node(Descriptor& d, Site v) {
  if (v.node == nullptr && d.is_update() &&
      d.decision.load(std::memory_order_acquire) < 0) {
    decide_update(d);
  }

  const NodePlan* plan = d.plans.find(site_id(v));
  if (plan == nullptr) {
    NodePlan fresh;
    if (compute_plan(d, v, fresh)) {
      plan = &d.plans.insert_once(site_id(v), fresh);
    } else {
      // The observation was stale, which can only happen after the plan was
      // recorded and the descriptor popped by the completing helper.
      plan = d.plans.find(site_id(v));
      if (plan == nullptr) return;
    }
  }
  run_plan_actions(d, v, *plan);
}

// Decides, while the descriptor heads the root queue, whether the update
// will modify the tree at its timestamp. Every pending descriptor anywhere
// in the tree is earlier than ours at this moment, so draining the routing
// path makes the membership of the key exact for our linearization point.
void ConcurrentTree::decide_update(Descriptor& d) {
  const Key k = d.key_a;
  bool present = false;
  TreeNode* n = root_.child.load(std::memory_order_acquire);
  for (;;) {
    if (n->tag == NodeTag::Empty) break;
    if (n->tag == NodeTag::Leaf) {
      present = static_cast<LeafNode*>(n)->key == k;
      break;
    }
    InnerNode* in = as_inner(n);
    execute_until_timestamp(d, Site{in});
    n = (k < in->right_subtree_min ? in->left : in->right).load(std::memory_order_acquire);
  }
  const int will_modify = (d.kind == OpKind::Insert) ? (present ? 0 : 1) : (present ? 1 : 0);
  int expected = -1;
  d.decision.compare_exchange_strong(expected, will_modify, std::memory_order_acq_rel,
                                     std::memory_order_acquire);
}

bool ConcurrentTree::compute_plan(Descriptor& d, Site v, NodePlan& out) {
  if (d.kind == OpKind::Count) return compute_count_plan(d, v, out);

  const Timestamp ts = d.timestamp.load(std::memory_order_acquire);
  const Key k = d.key_a;
  const int decision = d.is_update() ? d.decision.load(std::memory_order_acquire) : 0;
  assert(!d.is_update() || decision >= 0);

  std::atomic<TreeNode*>* cell;
  if (v.node == nullptr) {
    cell = &root_.child;
  } else {
    cell = (k < v.node->right_subtree_min) ? &v.node->left : &v.node->right;
  }
  TreeNode* c = cell->load(std::memory_order_acquire);

  switch (c->tag) {
    case NodeTag::Empty: {
      // Only the fictive root can hold the empty node.
      if (d.kind == OpKind::Insert && decision == 1) {
        out.edit = true;
        out.edit_cell = cell;
        out.edit_expected = c;
        out.edit_replacement = new LeafNode(k);
        out.record = true;
        out.partial = 1;
      } else {
        out.record = true;
        out.partial = 0;
      }
      return true;
    }
    case NodeTag::Leaf: {
      const Key ck = static_cast<LeafNode*>(c)->key;
      if (d.kind == OpKind::Contains) {
        out.record = true;
        out.partial = (ck == k) ? 1 : 0;
        return true;
      }
      if (d.kind == OpKind::Insert) {
        if (ck == k) {
          out.record = true;
          out.partial = 0;  // duplicate insert leaves the tree unmodified
        } else if (decision == 1) {
          out.edit = true;
          out.edit_cell = cell;
          out.edit_expected = c;
          out.edit_replacement = make_split(c, k, ts, ids_);
          out.record = true;
          out.partial = 1;
        } else {
          assert(false && "insert decided false but key is absent here");
          out.record = true;
          out.partial = 0;
        }
        return true;
      }
      // Remove with a direct leaf child: a one-key tree at the fictive root.
      if (ck == k && decision == 1) {
        out.edit = true;
        out.edit_cell = cell;
        out.edit_expected = c;
        out.edit_replacement = empty_node();
        out.edit_retire[0] = c;
        out.record = true;
        out.partial = 1;
      } else {
        assert(ck != k);
        out.record = true;
        out.partial = 0;
      }
      return true;
    }
    case NodeTag::Inner:
      break;
  }

  InnerNode* c_in = as_inner(c);
  if (d.is_update() && decision == 1) {
    const NodeState* s = read_state(*c_in);
    if (s->ts_mod >= ts) return false;  // stale observation

    if (d.kind == OpKind::Remove) {
      // Look one level ahead: if the child's own child is our leaf, the
      // child collapses into the sibling, and the edit happens here.
      execute_until_timestamp(d, Site{c_in});
      const bool go_left = k < c_in->right_subtree_min;
      TreeNode* g = (go_left ? c_in->left : c_in->right).load(std::memory_order_acquire);
      if (g->tag == NodeTag::Leaf && static_cast<LeafNode*>(g)->key == k) {
        TreeNode* sibling =
            (go_left ? c_in->right : c_in->left).load(std::memory_order_acquire);
        out.edit = true;
        out.edit_cell = cell;
        out.edit_expected = c;
        out.edit_replacement = sibling;
        out.edit_retire[0] = c;
        out.edit_retire[1] = g;
        out.record = true;
        out.partial = 1;
        return true;
      }
    }

    if (needs_rebuild(*s, c_in->init_sz, cfg_.rebuild_k)) {
      c_in = rebuild_child(d, *cell, c_in);
      if (d.kind == OpKind::Remove) {
        // The balanced replacement may hold our leaf directly under its root.
        const bool go_left = k < c_in->right_subtree_min;
        TreeNode* g = (go_left ? c_in->left : c_in->right).load(std::memory_order_acquire);
        if (g->tag == NodeTag::Leaf && static_cast<LeafNode*>(g)->key == k) {
          TreeNode* sibling =
              (go_left ? c_in->right : c_in->left).load(std::memory_order_acquire);
          out.edit = true;
          out.edit_cell = cell;
          out.edit_expected = c_in;
          out.edit_replacement = sibling;
          out.edit_retire[0] = c_in;
          out.edit_retire[1] = g;
          out.record = true;
          out.partial = 1;
          return true;
        }
      }
    }
  }

  out.n_descend = 1;
  out.descend[0] = DescendStep{c_in, CountMode::Both};
  return true;
}

bool ConcurrentTree::compute_count_plan(Descriptor& d, Site v, NodePlan& out) {
  const Timestamp ts = d.timestamp.load(std::memory_order_acquire);
  const Key lo = d.key_a;
  const Key hi = d.key_b;
  bool sound = true;

  auto descend = [&](TreeNode* child, CountMode m) {
    out.descend[out.n_descend++] = DescendStep{as_inner(child), m};
  };
  // get_size against the child's state; a contribution is sound only if the
  // state it came from predates our timestamp.
  auto subtree_size = [&](TreeNode* n) -> std::uint64_t {
    switch (n->tag) {
      case NodeTag::Empty:
        return 0;
      case NodeTag::Leaf:
        return 1;
      case NodeTag::Inner: {
        const NodeState* s = read_state(*as_inner(n));
        if (s->ts_mod >= ts) sound = false;
        return s->size;
      }
    }
    return 0;
  };

  std::uint64_t contribution = 0;

  if (v.node == nullptr) {
    TreeNode* c = root_.child.load(std::memory_order_acquire);
    if (c->tag == NodeTag::Inner) {
      descend(c, CountMode::Both);
    } else {
      out.record = true;
      out.partial = leaf_in_range(c, lo, hi);
    }
    return true;
  }

  InnerNode* n = v.node;
  const CountMode* mp = d.modes.find(n->id);
  assert(mp != nullptr && "mode must be recorded by the parent before push");
  if (mp == nullptr) return false;
  const CountMode mode = *mp;
  const Key rsm = n->right_subtree_min;
  TreeNode* l = n->left.load(std::memory_order_acquire);
  TreeNode* r = n->right.load(std::memory_order_acquire);

  switch (mode) {
    case CountMode::Both:
      if (lo >= rsm) {
        if (r->tag == NodeTag::Inner) descend(r, CountMode::Both);
        else contribution += leaf_in_range(r, lo, hi);
      } else if (hi < rsm) {
        if (l->tag == NodeTag::Inner) descend(l, CountMode::Both);
        else contribution += leaf_in_range(l, lo, hi);
      } else {
        // Fork node: the routing keys bound each side, one border remains
        // per subtree.
        if (l->tag == NodeTag::Inner) descend(l, CountMode::LeftBorder);
        else contribution += leaf_at_least(l, lo);
        if (r->tag == NodeTag::Inner) descend(r, CountMode::RightBorder);
        else contribution += leaf_at_most(r, hi);
      }
      break;
    case CountMode::LeftBorder:
      if (lo >= rsm) {
        if (r->tag == NodeTag::Inner) descend(r, CountMode::LeftBorder);
        else contribution += leaf_at_least(r, lo);
      } else {
        contribution += subtree_size(r);
        if (l->tag == NodeTag::Inner) descend(l, CountMode::LeftBorder);
        else contribution += leaf_at_least(l, lo);
      }
      break;
    case CountMode::RightBorder:
      if (hi < rsm) {
        if (l->tag == NodeTag::Inner) descend(l, CountMode::RightBorder);
        else contribution += leaf_at_most(l, hi);
      } else {
        contribution += subtree_size(l);
        if (r->tag == NodeTag::Inner) descend(r, CountMode::RightBorder);
        else contribution += leaf_at_most(r, hi);
      }
      break;
  }

  out.partial = contribution;
  out.record = contribution > 0 || out.n_descend == 0;
  return sound;
}

void ConcurrentTree::run_plan_actions(Descriptor& d, Site v, const NodePlan& plan) {
  const Timestamp ts = d.timestamp.load(std::memory_order_acquire);

  for (std::uint32_t i = 0; i < plan.n_descend; ++i) {
    const DescendStep& step = plan.descend[i];
    InnerNode* child = step.child;
    if (d.kind == OpKind::Count) d.modes.insert_once(child->id, step.mode);
    d.traverse.push(child);
    if (d.is_update() && d.decision.load(std::memory_order_acquire) == 1) {
      const NodeState* s = read_state(*child);
      bool not_yet_applied;
#ifdef HOHTREE_MUTATE_TS_GUARD
      not_yet_applied = true;
#else
      not_yet_applied = s->ts_mod < ts;
#endif
      if (not_yet_applied) {
        const std::uint64_t new_size =
            (d.kind == OpKind::Insert) ? s->size + 1 : s->size - 1;
        try_advance_state(*child, s, NodeState{new_size, s->mod_cnt + 1, ts});
      }
    }
    child->queue.push_if(&d);
  }

  if (plan.edit) {
    TreeNode* expected = plan.edit_expected;
    if (plan.edit_cell->compare_exchange_strong(expected, plan.edit_replacement,
                                                std::memory_order_acq_rel,
                                                std::memory_order_acquire)) {
      for (TreeNode* dead : plan.edit_retire) {
        if (dead != nullptr) retire_node(dead);
      }
    }
  }

  if (plan.record) d.processed.insert_once(site_id(v), PartialResult{plan.partial});

  site_queue(v).pop_if(&d);
}

InnerNode* ConcurrentTree::rebuild_child(Descriptor& d, std::atomic<TreeNode*>& cell,
                                         InnerNode* old_child) {
  finish_pending(d, *old_child);
  const Timestamp ts = d.timestamp.load(std::memory_order_acquire);
  const std::vector<Key> keys = collect_keys(old_child);
  TreeNode* mine = build_ideal(keys, ts, ids_);
  TreeNode* expected = old_child;
  if (cell.compare_exchange_strong(expected, mine, std::memory_order_acq_rel,
                                   std::memory_order_acquire)) {
    counters().rebuilds.fetch_add(1, std::memory_order_relaxed);
    counters().rebuilt_leaves.fetch_add(keys.size(), std::memory_order_relaxed);
    retire_subtree(old_child);
  } else {
    // Another helper completed the rebuilding before us.
    destroy_subtree(mine);
  }
  // Re-read the subtree root: it may have been built by a different helper.
  // Stable while our descriptor heads the parent queue.
  return as_inner(cell.load(std::memory_order_acquire));
}

// Executes every operation still pending in the subtree, top-down. All of
// them are earlier than the triggering descriptor, which blocks the parent
// queue, so no new work can arrive while we drain.
void ConcurrentTree::finish_pending(Descriptor& d, InnerNode& n) {
  execute_until_timestamp(d, Site{&n});
  TreeNode* l = n.left.load(std::memory_order_acquire);
  TreeNode* r = n.right.load(std::memory_order_acquire);
  if (l->tag == NodeTag::Inner) finish_pending(d, *as_inner(l));
  if (r->tag == NodeTag::Inner) finish_pending(d, *as_inner(r));
}

std::uint64_t ConcurrentTree::assemble_result(Descriptor& d) {
  if (d.kind == OpKind::Count) {
    std::uint64_t sum = 0;
    d.processed.for_each(
        [&](NodeId, const PartialResult& p) { sum += p.value; });
    return sum;
  }
  std::uint64_t value = 0;
  std::size_t entries = 0;
  d.processed.for_each([&](NodeId, const PartialResult& p) {
    value = p.value;
    ++entries;
  });
  assert(entries == 1 && "scalar operations terminate at exactly one node");
  return value;
}

// --- Quiescent walks and audits ---------------------------------------------

namespace {

void collect_in_order(const TreeNode* n, std::vector<Key>& out) {
  switch (n->tag) {
    case NodeTag::Empty:
      return;
    case NodeTag::Leaf:
      out.push_back(static_cast<const LeafNode*>(n)->key);
      return;
    case NodeTag::Inner: {
      const auto* in = static_cast<const InnerNode*>(n);
      collect_in_order(in->left.load(std::memory_order_acquire), out);
      collect_in_order(in->right.load(std::memory_order_acquire), out);
      return;
    }
  }
}

struct AuditInfo {
  bool ok;
  std::uint64_t size;
  Key min;
  Key max;
};

AuditInfo audit_rec(const TreeNode* n, AuditReport& report) {
  auto fail = [&](const char* why) {
    report.ok = false;
    if (report.detail.empty()) report.detail = why;
    return AuditInfo{false, 0, 0, 0};
  };
  switch (n->tag) {
    case NodeTag::Empty:
      return {true, 0, 0, 0};
    case NodeTag::Leaf: {
      const Key k = static_cast<const LeafNode*>(n)->key;
      return {true, 1, k, k};
    }
    case NodeTag::Inner: {
      const auto* in = static_cast<const InnerNode*>(n);
      if (in->init_sz < 1) return fail("inner node with init_sz < 1");
      if (!in->queue.timestamps().empty()) return fail("non-empty queue at quiescence");
      TreeNode* l = in->left.load(std::memory_order_acquire);
      TreeNode* r = in->right.load(std::memory_order_acquire);
      if (l->tag == NodeTag::Empty || r->tag == NodeTag::Empty) {
        return fail("inner node with empty child");
      }
      AuditInfo li = audit_rec(l, report);
      AuditInfo ri = audit_rec(r, report);
      if (!li.ok || !ri.ok) return {false, 0, 0, 0};
      if (li.max >= in->right_subtree_min) {
        return fail("left subtree reaches right_subtree_min");
      }
      if (ri.min != in->right_subtree_min) {
        return fail("right_subtree_min is not the right subtree minimum");
      }
      const NodeState* s = in->state_cell.load(std::memory_order_acquire);
      if (s->size != li.size + ri.size) return fail("state size does not match leaf count");
      return {true, li.size + ri.size, li.min, ri.max};
    }
  }
  return {false, 0, 0, 0};
}

void collect_range_rec(const TreeNode* n, Key lo, Key hi, std::vector<Key>& out) {
  switch (n->tag) {
    case NodeTag::Empty:
      return;
    case NodeTag::Leaf: {
      const Key k = static_cast<const LeafNode*>(n)->key;
      if (lo <= k && k <= hi) out.push_back(k);
      return;
    }
    case NodeTag::Inner: {
      const auto* in = static_cast<const InnerNode*>(n);
      if (lo < in->right_subtree_min) {
        collect_range_rec(in->left.load(std::memory_order_acquire), lo, hi, out);
      }
      if (hi >= in->right_subtree_min) {
        collect_range_rec(in->right.load(std::memory_order_acquire), lo, hi, out);
      }
      return;
    }
  }
}

}  // namespace

std::vector<Key> ConcurrentTree::keys() const {
  std::vector<Key> out;
  collect_in_order(root_.child.load(std::memory_order_acquire), out);
  return out;
}

std::uint64_t ConcurrentTree::size() const {
  const TreeNode* c = root_.child.load(std::memory_order_acquire);
  switch (c->tag) {
    case NodeTag::Empty:
      return 0;
    case NodeTag::Leaf:
      return 1;
    case NodeTag::Inner:
      return read_state(*static_cast<const InnerNode*>(c))->size;
  }
  return 0;
}

std::uint64_t ConcurrentTree::height() const {
  return subtree_height(root_.child.load(std::memory_order_acquire));
}

AuditReport ConcurrentTree::audit() const {
  AuditReport report;
  if (!root_.queue.timestamps().empty()) {
    report.ok = false;
    report.detail = "non-empty root queue at quiescence";
    return report;
  }
  const TreeNode* c = root_.child.load(std::memory_order_acquire);
  AuditInfo info = audit_rec(c, report);
  report.size = info.size;
  report.height = subtree_height(c);
  return report;
}

std::vector<Timestamp> ConcurrentTree::root_queue_timestamps() const {
  return root_.queue.timestamps();
}

std::vector<Key> ConcurrentTree::collect_range(Key min, Key max) const {
  std::vector<Key> out;
  collect_range_rec(root_.child.load(std::memory_order_acquire), min, max, out);
  return out;
}

}  // namespace hohtree
