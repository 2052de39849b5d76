#ifndef HOHTREE_RECLAIM_HPP
#define HOHTREE_RECLAIM_HPP

#include <cstddef>
#include <cstdint>

// Epoch-based deferred reclamation.
//
// Shared records (nodes, states, queue cells, descriptors) are unlinked by
// CAS and must stay readable while any in-flight operation may still hold a
// reference. Threads pin the global epoch for the duration of each tree
// operation; retired memory is freed once two epochs have passed, which
// implies no pinned thread can still reach it.
//
// The domain is process-global: trees share it, and the per-thread slot
// index doubles as the announce-array slot for the wait-free root mode.

namespace hohtree::reclaim {

inline constexpr std::size_t kMaxThreads = 256;

// Stable small index for the calling thread; assigned on first use and
// released at thread exit.
std::size_t thread_slot();

// Pins the current epoch for this thread. Reentrant; only the outermost
// guard publishes/clears the reservation.
class Guard {
 public:
  Guard();
  ~Guard();
  Guard(const Guard&) = delete;
  Guard& operator=(const Guard&) = delete;
};

void retire(void* p, void (*deleter)(void*));

template <class T>
void retire(T* p) {
  retire(static_cast<void*>(p), [](void* q) { delete static_cast<T*>(q); });
}

// Best-effort: advance the epoch and free what is already safe.
void flush();

// Frees everything retired so far. The caller must guarantee that no guard
// is active on any thread (quiescence).
void quiesce();

// Number of retired-but-not-yet-freed records (diagnostics).
std::size_t pending();

}  // namespace hohtree::reclaim

#endif  // HOHTREE_RECLAIM_HPP
