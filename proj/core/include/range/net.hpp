#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace range {

// Virtual timestamps are microseconds since the plan's epoch (UTC).
using Micros = std::int64_t;

constexpr Micros kMicrosPerSecond = 1'000'000;

struct Ipv4 {
  std::uint32_t value = 0;  // host byte order

  constexpr Ipv4() = default;
  constexpr explicit Ipv4(std::uint32_t v) : value(v) {}
  constexpr Ipv4(std::uint8_t a, std::uint8_t b, std::uint8_t c, std::uint8_t d)
      : value((std::uint32_t(a) << 24) | (std::uint32_t(b) << 16) |
              (std::uint32_t(c) << 8) | std::uint32_t(d)) {}

  constexpr std::uint8_t octet(int i) const {
    return std::uint8_t(value >> (8 * (3 - i)));
  }

  auto operator<=>(const Ipv4&) const = default;
};

std::string to_string(Ipv4 ip);
std::optional<Ipv4> parse_ipv4(const std::string& text);

struct Endpoint {
  Ipv4 ip;
  std::uint16_t port = 0;

  auto operator<=>(const Endpoint&) const = default;
};

struct RangeError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A single address or an inclusive last-octet range "a.b.c.x-y".
struct IpSet {
  std::string text;

  bool empty() const { return text.empty(); }
  auto operator<=>(const IpSet&) const = default;
};

// Ascending enumeration of the set. Throws RangeError on malformed text,
// out-of-range octets, or start > end.
std::vector<Ipv4> expand_ip_set(const IpSet& set);

// "a.b.c.d" or "a.b.c.d/n"; used for jail ignoreip entries.
struct IpMatcher {
  Ipv4 network;
  int prefix_len = 32;

  static std::optional<IpMatcher> parse(const std::string& text);
  bool contains(Ipv4 ip) const;
};

// Deterministic 64-bit mix; the seed fan-out used across the simulator.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t fnv1a64(const void* data, std::size_t len,
                      std::uint64_t seed = 0xcbf29ce484222325ULL);

}  // namespace range
