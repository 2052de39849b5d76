#include "hohtree/seq_tree.hpp"

#include <cassert>

#include "hohtree/descriptor.hpp"

namespace hohtree {
namespace {

using Node = SeqTree::Node;
using Tag = SeqTree::Node::Tag;

Node* empty_singleton() {
  static Node e{Tag::Empty, 0, 0, 0, nullptr, nullptr};
  return &e;
}

Node* make_leaf(Key k) { return new Node{Tag::Leaf, k, 0, 0, nullptr, nullptr}; }

Node* make_inner(Key rsm, std::uint64_t size, Node* l, Node* r) {
  return new Node{Tag::Inner, 0, rsm, size, l, r};
}

void destroy(Node* n) {
  if (n == nullptr || n->tag == Tag::Empty) return;
  if (n->tag == Tag::Inner) {
    destroy(n->left);
    destroy(n->right);
  }
  delete n;
}

// get_size: O(1), reads the stored subtree size.
std::uint64_t node_size(const Node* n) {
  switch (n->tag) {
    case Tag::Empty:
      return 0;
    case Tag::Leaf:
      return 1;
    case Tag::Inner:
      return n->size;
  }
  return 0;
}

std::uint64_t node_height(const Node* n) {
  if (n->tag != Tag::Inner) return 0;
  const std::uint64_t l = node_height(n->left);
  const std::uint64_t r = node_height(n->right);
  return 1 + (l > r ? l : r);
}

void collect(const Node* n, std::vector<Key>& out) {
  switch (n->tag) {
    case Tag::Empty:
      return;
    case Tag::Leaf:
      out.push_back(n->key);
      return;
    case Tag::Inner:
      collect(n->left, out);
      collect(n->right, out);
      return;
  }
}

struct AuditInfo {
  bool ok;
  std::uint64_t size;
  Key min;
  Key max;
};

AuditInfo audit_rec(const Node* n, std::string* detail) {
  switch (n->tag) {
    case Tag::Empty:
      return {true, 0, 0, 0};
    case Tag::Leaf:
      return {true, 1, n->key, n->key};
    case Tag::Inner: {
      if (n->left->tag == Tag::Empty || n->right->tag == Tag::Empty) {
        if (detail) *detail = "inner node with empty child";
        return {false, 0, 0, 0};
      }
      AuditInfo l = audit_rec(n->left, detail);
      AuditInfo r = audit_rec(n->right, detail);
      if (!l.ok || !r.ok) return {false, 0, 0, 0};
      bool ok = true;
      if (l.max >= n->rsm) {
        if (detail) *detail = "left subtree reaches right_subtree_min";
        ok = false;
      }
      if (r.min != n->rsm) {
        if (detail) *detail = "right_subtree_min is not the right subtree minimum";
        ok = false;
      }
      if (n->size != l.size + r.size) {
        if (detail) *detail = "stored size does not match leaf count";
        ok = false;
      }
      return {ok, l.size + r.size, l.min, r.max};
    }
  }
  return {false, 0, 0, 0};
}

Node* build_range(const std::vector<Key>& keys, std::size_t lo, std::size_t hi) {
  const std::size_t n = hi - lo;
  if (n == 1) return make_leaf(keys[lo]);
  const std::size_t mid = lo + n / 2;
  return make_inner(keys[mid], n, build_range(keys, lo, mid), build_range(keys, mid, hi));
}

}  // namespace

SeqTree::SeqTree() : root_(empty_singleton()) {}

SeqTree::~SeqTree() { destroy(root_); }

SeqTree::SeqTree(SeqTree&& other) noexcept : root_(other.root_) {
  other.root_ = empty_singleton();
}

SeqTree SeqTree::from_sorted(const std::vector<Key>& keys) {
  for (std::size_t i = 1; i < keys.size(); ++i) assert(keys[i - 1] < keys[i]);
  SeqTree t;
  if (!keys.empty()) t.root_ = build_range(keys, 0, keys.size());
  return t;
}

bool SeqTree::insert(Key k) {
  if (root_->tag == Tag::Empty) {
    root_ = make_leaf(k);
    return true;
  }
  std::vector<Node*> path;
  Node* n = root_;
  while (n->tag == Tag::Inner) {
    path.push_back(n);
    n = (k < n->rsm) ? n->left : n->right;
  }
  if (n->key == k) return false;
  Node* split = (k < n->key) ? make_inner(n->key, 2, make_leaf(k), n)
                             : make_inner(k, 2, n, make_leaf(k));
  if (path.empty()) {
    root_ = split;
  } else {
    Node* p = path.back();
    (n == p->left ? p->left : p->right) = split;
  }
  for (Node* q : path) q->size += 1;
  return true;
}

bool SeqTree::remove(Key k) {
  if (root_->tag == Tag::Empty) return false;
  if (root_->tag == Tag::Leaf) {
    if (root_->key != k) return false;
    delete root_;
    root_ = empty_singleton();
    return true;
  }
  std::vector<Node*> path;
  Node* n = root_;
  while (n->tag == Tag::Inner) {
    path.push_back(n);
    n = (k < n->rsm) ? n->left : n->right;
  }
  if (n->key != k) return false;
  // The leaf's parent collapses into the sibling.
  Node* parent = path.back();
  path.pop_back();
  Node* sibling = (n == parent->left) ? parent->right : parent->left;
  if (path.empty()) {
    root_ = sibling;
  } else {
    Node* g = path.back();
    (parent == g->left ? g->left : g->right) = sibling;
  }
  delete parent;
  delete n;
  for (Node* q : path) q->size -= 1;
  return true;
}

bool SeqTree::contains(Key k) const {
  const Node* n = root_;
  while (n->tag == Tag::Inner) n = (k < n->rsm) ? n->left : n->right;
  return n->tag == Tag::Leaf && n->key == k;
}

std::uint64_t SeqTree::count_both_borders(const Node* n, Key min, Key max) const {
  ++visits_;
  switch (n->tag) {
    case Tag::Empty:
      return 0;
    case Tag::Leaf:
      return (min <= n->key && n->key <= max) ? 1 : 0;
    case Tag::Inner:
      if (min >= n->rsm) return count_both_borders(n->right, min, max);
      if (max < n->rsm) return count_both_borders(n->left, min, max);
      // Fork node: the tree structure already bounds each side, so one
      // border suffices per subtree from here down.
      return count_left_border(n->left, min) + count_right_border(n->right, max);
  }
  return 0;
}

std::uint64_t SeqTree::count_left_border(const Node* n, Key min) const {
  ++visits_;
  switch (n->tag) {
    case Tag::Empty:
      return 0;
    case Tag::Leaf:
      return (n->key >= min) ? 1 : 0;
    case Tag::Inner:
      if (min >= n->rsm) return count_left_border(n->right, min);
      return node_size(n->right) + count_left_border(n->left, min);
  }
  return 0;
}

std::uint64_t SeqTree::count_right_border(const Node* n, Key max) const {
  ++visits_;
  switch (n->tag) {
    case Tag::Empty:
      return 0;
    case Tag::Leaf:
      return (n->key <= max) ? 1 : 0;
    case Tag::Inner:
      if (max < n->rsm) return count_right_border(n->left, max);
      return node_size(n->left) + count_right_border(n->right, max);
  }
  return 0;
}

std::uint64_t SeqTree::count(Key min, Key max) const {
  assert(min <= max);
  return count_both_borders(root_, min, max);
}

std::uint64_t SeqTree::count_at_least(Key min) const { return count_left_border(root_, min); }

std::uint64_t SeqTree::count_at_most(Key max) const { return count_right_border(root_, max); }

std::uint64_t SeqTree::size() const { return node_size(root_); }

std::uint64_t SeqTree::height() const { return node_height(root_); }

std::vector<Key> SeqTree::keys() const {
  std::vector<Key> out;
  out.reserve(size());
  collect(root_, out);
  return out;
}

bool SeqTree::audit(std::string* detail) const { return audit_rec(root_, detail).ok; }

ReplayResult replay(const std::vector<OpLogEntry>& log) {
  SeqTree tree;
  ReplayResult out;
  out.results.reserve(log.size());
  for (const OpLogEntry& e : log) {
    switch (static_cast<OpKind>(e.kind)) {
      case OpKind::Insert:
        out.results.push_back(tree.insert(e.key_a) ? 1 : 0);
        break;
      case OpKind::Remove:
        out.results.push_back(tree.remove(e.key_a) ? 1 : 0);
        break;
      case OpKind::Contains:
        out.results.push_back(tree.contains(e.key_a) ? 1 : 0);
        break;
      case OpKind::Count:
        out.results.push_back(tree.count(e.key_a, e.key_b));
        break;
    }
  }
  out.final_keys = tree.keys();
  return out;
}

}  // namespace hohtree
