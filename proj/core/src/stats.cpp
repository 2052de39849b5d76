#include "hohtree/stats.hpp"

#include "hohtree/once_map.hpp"

namespace hohtree {

InvariantCounters& counters() {
  static InvariantCounters c;
  return c;
}

bool once_map_overwrite_mode() noexcept {
#ifdef HOHTREE_MUTATE_ONCE_OVERWRITE
  return true;
#else
  return false;
#endif
}

}  // namespace hohtree
