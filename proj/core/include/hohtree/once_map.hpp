#ifndef HOHTREE_ONCE_MAP_HPP
#define HOHTREE_ONCE_MAP_HPP

#include <atomic>
#include <cstdint>

// Insert-once concurrent map keyed by node identity. Values are immutable
// after the first insertion for a key; later insertions for the same key are
// discarded and the winning value is returned. Backed by a lock-free
// prepend-only list: the expected population is one entry per node on an
// operation's path, so linear search is fine.

namespace hohtree {

// Build-flavor switch, defined out of line so fault-injection library
// variants can flip it without ODR clashes against normally-compiled
// translation units. Always false in the real library.
bool once_map_overwrite_mode() noexcept;

template <class V>
class OnceMap {
 public:
  OnceMap() = default;
  OnceMap(const OnceMap&) = delete;
  OnceMap& operator=(const OnceMap&) = delete;

  ~OnceMap() {
    Entry* e = head_.load(std::memory_order_relaxed);
    while (e != nullptr) {
      Entry* next = e->next;
      delete e;
      e = next;
    }
  }

  const V* find(std::uint64_t key) const {
    for (const Entry* e = head_.load(std::memory_order_acquire); e != nullptr; e = e->next) {
      if (e->key == key) return &e->value;
    }
    return nullptr;
  }

  // Returns the value that won: the caller's on first insertion for `key`,
  // the existing one otherwise.
  const V& insert_once(std::uint64_t key, V value) {
    Entry* fresh = nullptr;
    for (;;) {
      Entry* head = head_.load(std::memory_order_acquire);
      if (!once_map_overwrite_mode()) {
        for (const Entry* e = head; e != nullptr; e = e->next) {
          if (e->key == key) {
            delete fresh;
            return e->value;
          }
        }
      }
      if (fresh == nullptr) fresh = new Entry{key, std::move(value), head};
      fresh->next = head;
      if (head_.compare_exchange_weak(head, fresh, std::memory_order_acq_rel,
                                      std::memory_order_acquire)) {
        return fresh->value;
      }
    }
  }

  template <class F>
  void for_each(F&& f) const {
    for (const Entry* e = head_.load(std::memory_order_acquire); e != nullptr; e = e->next) {
      f(e->key, e->value);
    }
  }

  std::size_t size() const {
    std::size_t n = 0;
    for (const Entry* e = head_.load(std::memory_order_acquire); e != nullptr; e = e->next) ++n;
    return n;
  }

 private:
  struct Entry {
    std::uint64_t key;
    V value;
    Entry* next;
  };

  std::atomic<Entry*> head_{nullptr};
};

}  // namespace hohtree

#endif  // HOHTREE_ONCE_MAP_HPP
