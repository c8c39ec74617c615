#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace simlab {

struct Ipv4 {
  std::uint32_t value = 0;

  constexpr auto operator<=>(const Ipv4&) const = default;

  static constexpr Ipv4 broadcast() { return {0xFFFFFFFFu}; }
  static std::optional<Ipv4> parse(std::string_view text);
  std::string str() const;
};

constexpr std::uint32_t prefix_mask(int length) {
  return length <= 0 ? 0u : (length >= 32 ? 0xFFFFFFFFu : ~((1u << (32 - length)) - 1u));
}

struct Prefix {
  Ipv4 network;
  int length = 0;

  constexpr auto operator<=>(const Prefix&) const = default;

  static constexpr Prefix of(Ipv4 addr, int length) {
    return {Ipv4{addr.value & prefix_mask(length)}, length};
  }
  constexpr bool contains(Ipv4 addr) const {
    return (addr.value & prefix_mask(length)) == network.value;
  }
  constexpr Ipv4 directed_broadcast() const { return {network.value | ~prefix_mask(length)}; }

  /// "10.0.0.0/24"; host bits must be zero.
  static std::optional<Prefix> parse(std::string_view text);
  std::string str() const;
};

/// Address with prefix length, as written on an interface ("10.0.0.1/24").
struct IfAddr {
  Ipv4 ip;
  int length = 0;
  static std::optional<IfAddr> parse(std::string_view text);
  std::string str() const;
  bool operator==(const IfAddr&) const = default;
};

/// 48-bit hardware address.
struct HwAddr {
  std::uint64_t value = 0;

  constexpr auto operator<=>(const HwAddr&) const = default;

  static constexpr HwAddr broadcast() { return {0xFFFFFFFFFFFFull}; }
  constexpr bool is_broadcast() const { return value == 0xFFFFFFFFFFFFull; }
  static std::optional<HwAddr> parse(std::string_view text);
  std::string str() const;
};

}  // namespace simlab
