#pragma once

#include <array>
#include <cstdint>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "range/net.hpp"
#include "range/webapp.hpp"

namespace range::capture {

using Mac = std::array<std::uint8_t, 6>;

// Locally administered 02:00:00 + the IPv4's last three octets.
Mac mac_for(Ipv4 ip);

namespace tcp {
constexpr std::uint8_t kFin = 0x01;
constexpr std::uint8_t kSyn = 0x02;
constexpr std::uint8_t kPsh = 0x08;
constexpr std::uint8_t kAck = 0x10;
}  // namespace tcp

struct Packet {
  Micros ts = 0;
  Mac src_mac{};
  Mac dst_mac{};
  Ipv4 src_ip;
  Ipv4 dst_ip;
  std::uint16_t src_port = 0;
  std::uint16_t dst_port = 0;
  std::uint8_t flags = 0;
  std::uint32_t seq = 0;
  std::uint32_t ack = 0;
  std::vector<std::uint8_t> payload;
};

// Ethernet + IPv4 + TCP with both checksums filled in.
std::vector<std::uint8_t> packet_bytes(const Packet& p);

// HTTP messages as carried in the flow payloads.
std::string render_http_request(const webapp::HttpRequest& req);
std::string render_http_response(const webapp::HttpExchange& x);

// The canonical 10-packet flow for one exchange: SYN, SYN/ACK, ACK,
// request PSH/ACK, ACK, response PSH/ACK, ACK, FIN/ACK, FIN/ACK, ACK,
// spread over a fixed 2 ms template starting at the request timestamp.
// Sequence numbers derive from (seed, exchange_index).
std::vector<Packet> exchange_to_flow(const webapp::HttpExchange& x,
                                     std::uint64_t seed,
                                     std::uint64_t exchange_index);

struct SinkError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Classic little-endian pcap (magic 0xa1b2c3d4, version 2.4, Ethernet,
// microsecond timestamps, snaplen 65535). Returns total bytes written.
std::size_t write_pcap(const std::vector<Packet>& packets, std::ostream& out);
std::size_t write_pcap_file(const std::vector<Packet>& packets,
                            const std::string& path);

}  // namespace range::capture
