#ifndef HOHTREE_TYPES_HPP
#define HOHTREE_TYPES_HPP

#include <cstdint>

namespace hohtree {

using Key = std::int64_t;
using Timestamp = std::uint64_t;  // 1-based; 0 means unassigned
using NodeId = std::uint64_t;

inline constexpr Timestamp kNoTimestamp = 0;

// Identity of the fictive root in per-descriptor maps. Real inner nodes get
// ids starting at 1.
inline constexpr NodeId kFictiveId = 0;

}  // namespace hohtree

#endif  // HOHTREE_TYPES_HPP
