#include "range/net.hpp"

#include <charconv>
#include <cstdio>

namespace range {

std::string to_string(Ipv4 ip) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%u.%u.%u.%u", ip.octet(0), ip.octet(1),
                ip.octet(2), ip.octet(3));
  return buf;
}

namespace {

// Parses a decimal octet from [p, end); advances p. Returns -1 on failure.
int take_octet(const char*& p, const char* end) {
  int v = 0;
  const auto [next, ec] = std::from_chars(p, end, v);
  if (ec != std::errc{} || next == p || v < 0 || v > 255) return -1;
  p = next;
  return v;
}

}  // namespace

std::optional<Ipv4> parse_ipv4(const std::string& text) {
  const char* p = text.data();
  const char* end = p + text.size();
  int parts[4];
  for (int i = 0; i < 4; ++i) {
    if (i > 0) {
      if (p == end || *p != '.') return std::nullopt;
      ++p;
    }
    parts[i] = take_octet(p, end);
    if (parts[i] < 0) return std::nullopt;
  }
  if (p != end) return std::nullopt;
  return Ipv4(std::uint8_t(parts[0]), std::uint8_t(parts[1]),
              std::uint8_t(parts[2]), std::uint8_t(parts[3]));
}

std::vector<Ipv4> expand_ip_set(const IpSet& set) {
  const auto dash = set.text.rfind('-');
  if (dash == std::string::npos) {
    const auto single = parse_ipv4(set.text);
    if (!single) throw RangeError("malformed address: " + set.text);
    return {*single};
  }
  const auto first = parse_ipv4(set.text.substr(0, dash));
  if (!first) throw RangeError("malformed range start: " + set.text);
  const std::string tail = set.text.substr(dash + 1);
  const char* p = tail.data();
  const int last = take_octet(p, tail.data() + tail.size());
  if (last < 0 || p != tail.data() + tail.size())
    throw RangeError("malformed range end: " + set.text);
  const int start = first->octet(3);
  if (start > last)
    throw RangeError("descending range: " + set.text);
  std::vector<Ipv4> out;
  out.reserve(std::size_t(last - start + 1));
  for (int o = start; o <= last; ++o)
    out.emplace_back(Ipv4((first->value & 0xffffff00u) | std::uint32_t(o)));
  return out;
}

std::optional<IpMatcher> IpMatcher::parse(const std::string& text) {
  const auto slash = text.find('/');
  IpMatcher m;
  const auto ip = parse_ipv4(slash == std::string::npos ? text : text.substr(0, slash));
  if (!ip) return std::nullopt;
  m.network = *ip;
  if (slash != std::string::npos) {
    const std::string tail = text.substr(slash + 1);
    int bits = -1;
    const auto [next, ec] =
        std::from_chars(tail.data(), tail.data() + tail.size(), bits);
    if (ec != std::errc{} || next != tail.data() + tail.size() || bits < 0 ||
        bits > 32)
      return std::nullopt;
    m.prefix_len = bits;
  }
  return m;
}

bool IpMatcher::contains(Ipv4 ip) const {
  if (prefix_len == 0) return true;
  const std::uint32_t mask = ~std::uint32_t(0) << (32 - prefix_len);
  return (ip.value & mask) == (network.value & mask);
}

std::uint64_t fnv1a64(const void* data, std::size_t len, std::uint64_t seed) {
  const auto* p = static_cast<const unsigned char*>(data);
  std::uint64_t h = seed;
  for (std::size_t i = 0; i < len; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace range
