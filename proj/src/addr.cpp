#include "simlab/addr.hpp"

#include <charconv>
#include <cstdio>

namespace simlab {

namespace {

bool parse_uint(std::string_view s, unsigned max, unsigned& out, int base = 10) {
  if (s.empty()) return false;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out, base);
  return ec == std::errc{} && ptr == s.data() + s.size() && out <= max;
}

}  // namespace

std::optional<Ipv4> Ipv4::parse(std::string_view text) {
  std::uint32_t value = 0;
  for (int i = 0; i < 4; ++i) {
    const auto dot = text.find('.');
    const bool last = i == 3;
    if (last != (dot == std::string_view::npos)) return std::nullopt;
    const auto part = last ? text : text.substr(0, dot);
    unsigned octet = 0;
    if (part.size() > 3 || !parse_uint(part, 255, octet)) return std::nullopt;
    value = (value << 8) | octet;
    if (!last) text.remove_prefix(dot + 1);
  }
  return Ipv4{value};
}

std::string Ipv4::str() const {
  return std::to_string(value >> 24) + '.' + std::to_string((value >> 16) & 0xFF) + '.' +
         std::to_string((value >> 8) & 0xFF) + '.' + std::to_string(value & 0xFF);
}

std::optional<IfAddr> IfAddr::parse(std::string_view text) {
  const auto slash = text.find('/');
  if (slash == std::string_view::npos) return std::nullopt;
  auto ip = Ipv4::parse(text.substr(0, slash));
  unsigned len = 0;
  if (!ip || !parse_uint(text.substr(slash + 1), 32, len)) return std::nullopt;
  return IfAddr{*ip, static_cast<int>(len)};
}

std::string IfAddr::str() const { return ip.str() + '/' + std::to_string(length); }

std::optional<Prefix> Prefix::parse(std::string_view text) {
  auto a = IfAddr::parse(text);
  if (!a) return std::nullopt;
  if ((a->ip.value & ~prefix_mask(a->length)) != 0) return std::nullopt;
  return Prefix{a->ip, a->length};
}

std::string Prefix::str() const { return network.str() + '/' + std::to_string(length); }

std::optional<HwAddr> HwAddr::parse(std::string_view text) {
  std::uint64_t value = 0;
  for (int i = 0; i < 6; ++i) {
    if (text.size() < 2) return std::nullopt;
    unsigned byte = 0;
    if (!parse_uint(text.substr(0, 2), 255, byte, 16)) return std::nullopt;
    value = (value << 8) | byte;
    text.remove_prefix(2);
    if (i < 5) {
      if (text.empty() || text.front() != ':') return std::nullopt;
      text.remove_prefix(1);
    }
  }
  if (!text.empty()) return std::nullopt;
  return HwAddr{value};
}

std::string HwAddr::str() const {
  char buf[18];
  std::snprintf(buf, sizeof buf, "%02x:%02x:%02x:%02x:%02x:%02x",
                static_cast<unsigned>((value >> 40) & 0xFF), static_cast<unsigned>((value >> 32) & 0xFF),
                static_cast<unsigned>((value >> 24) & 0xFF), static_cast<unsigned>((value >> 16) & 0xFF),
                static_cast<unsigned>((value >> 8) & 0xFF), static_cast<unsigned>(value & 0xFF));
  return buf;
}

}  // namespace simlab
