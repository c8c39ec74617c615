#pragma once

#include <compare>
#include <cstdint>
#include <functional>

namespace simlab {

template <class Tag>
struct Id {
  std::uint32_t value = 0;
  constexpr auto operator<=>(const Id&) const = default;
};

using NodeId = Id<struct NodeTag>;
using InterfaceId = Id<struct InterfaceTag>;
using SegmentId = Id<struct SegmentTag>;

}  // namespace simlab

template <class Tag>
struct std::hash<simlab::Id<Tag>> {
  std::size_t operator()(simlab::Id<Tag> id) const noexcept { return std::hash<std::uint32_t>{}(id.value); }
};
