#ifndef HOHTREE_SEQ_TREE_HPP
#define HOHTREE_SEQ_TREE_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "hohtree/types.hpp"

// Single-threaded augmented external BST: the correctness oracle for the
// concurrent tree. Keys live in leaves; each inner node stores the exact
// size of its subtree and the minimal key that may appear in its right
// subtree. Deliberately unbalanced: it is a semantics oracle, not a
// performance oracle. Never share an instance across threads.

namespace hohtree {

class SeqTree {
 public:
  struct Node {
    enum class Tag : std::uint8_t { Empty, Leaf, Inner };
    Tag tag;
    Key key;             // Leaf
    Key rsm;             // Inner: minimal key that may appear in the right subtree
    std::uint64_t size;  // Inner: keys beneath
    Node* left;
    Node* right;
  };

  SeqTree();
  ~SeqTree();
  SeqTree(SeqTree&& other) noexcept;
  SeqTree& operator=(SeqTree&&) = delete;
  SeqTree(const SeqTree&) = delete;
  SeqTree& operator=(const SeqTree&) = delete;

  // Perfectly balanced tree over strictly increasing keys; used by the
  // count-complexity tests.
  static SeqTree from_sorted(const std::vector<Key>& keys);

  bool insert(Key k);
  bool remove(Key k);
  bool contains(Key k) const;

  // Number of keys in [min, max]; requires min <= max.
  std::uint64_t count(Key min, Key max) const;
  std::uint64_t count_at_least(Key min) const;  // keys >= min
  std::uint64_t count_at_most(Key max) const;   // keys <= max

  std::uint64_t size() const;
  std::uint64_t height() const;
  std::vector<Key> keys() const;

  // Full recursive audit: subtree sizes match leaf counts and the routing
  // invariant holds everywhere.
  bool audit(std::string* detail = nullptr) const;

  // Instrumentation: nodes visited by the count routines (one tick per
  // recursive call, including leaf and empty cases).
  std::uint64_t visits() const { return visits_; }
  void reset_visits() { visits_ = 0; }

 private:
  Node* root_;  // the shared empty node when the tree has no keys

  std::uint64_t count_both_borders(const Node* n, Key min, Key max) const;
  std::uint64_t count_left_border(const Node* n, Key min) const;
  std::uint64_t count_right_border(const Node* n, Key max) const;

  mutable std::uint64_t visits_ = 0;
};

// One recorded operation of a concurrent run, keyed by its linearization
// timestamp.
struct OpLogEntry {
  Timestamp timestamp;
  std::uint8_t kind;  // OpKind value
  Key key_a;
  Key key_b;
  std::uint64_t result;
};

struct ReplayResult {
  std::vector<std::uint64_t> results;  // oracle result per entry, in order
  std::vector<Key> final_keys;
};

// Applies a timestamp-sorted log through a fresh oracle.
ReplayResult replay(const std::vector<OpLogEntry>& log);

}  // namespace hohtree

#endif  // HOHTREE_SEQ_TREE_HPP
