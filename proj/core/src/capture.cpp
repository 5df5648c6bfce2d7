#include "range/capture.hpp"

#include <cstring>
#include <fstream>

namespace range::capture {

Mac mac_for(Ipv4 ip) {
  return {0x02, 0x00, 0x00, ip.octet(1), ip.octet(2), ip.octet(3)};
}

namespace {

void put16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(std::uint8_t(v >> 8));
  out.push_back(std::uint8_t(v));
}

void put32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  out.push_back(std::uint8_t(v >> 24));
  out.push_back(std::uint8_t(v >> 16));
  out.push_back(std::uint8_t(v >> 8));
  out.push_back(std::uint8_t(v));
}

// RFC 1071 ones-complement sum over big-endian byte pairs.
std::uint16_t checksum(const std::uint8_t* data, std::size_t len,
                       std::uint32_t sum = 0) {
  for (std::size_t i = 0; i + 1 < len; i += 2)
    sum += (std::uint32_t(data[i]) << 8) | data[i + 1];
  if (len & 1) sum += std::uint32_t(data[len - 1]) << 8;
  while (sum >> 16) sum = (sum & 0xffff) + (sum >> 16);
  return std::uint16_t(~sum);
}

constexpr std::size_t kEthLen = 14;
constexpr std::size_t kIpLen = 20;
constexpr std::size_t kTcpLen = 20;

}  // namespace

std::vector<std::uint8_t> packet_bytes(const Packet& p) {
  std::vector<std::uint8_t> out;
  out.reserve(kEthLen + kIpLen + kTcpLen + p.payload.size());

  out.insert(out.end(), p.dst_mac.begin(), p.dst_mac.end());
  out.insert(out.end(), p.src_mac.begin(), p.src_mac.end());
  put16(out, 0x0800);  // IPv4

  const std::uint16_t total_len =
      std::uint16_t(kIpLen + kTcpLen + p.payload.size());
  out.push_back(0x45);  // version 4, IHL 5
  out.push_back(0x00);
  put16(out, total_len);
  put16(out, std::uint16_t(p.seq ^ p.ack));  // identification, arbitrary
  put16(out, 0x4000);                        // don't fragment
  out.push_back(64);                         // TTL
  out.push_back(6);                          // TCP
  put16(out, 0);                             // checksum placeholder
  put32(out, p.src_ip.value);
  put32(out, p.dst_ip.value);
  const std::uint16_t ip_sum = checksum(out.data() + kEthLen, kIpLen);
  out[kEthLen + 10] = std::uint8_t(ip_sum >> 8);
  out[kEthLen + 11] = std::uint8_t(ip_sum);

  const std::size_t tcp_at = out.size();
  put16(out, p.src_port);
  put16(out, p.dst_port);
  put32(out, p.seq);
  put32(out, p.ack);
  out.push_back(0x50);  // data offset 5
  out.push_back(p.flags);
  put16(out, 64240);  // window
  put16(out, 0);      // checksum placeholder
  put16(out, 0);      // urgent pointer
  out.insert(out.end(), p.payload.begin(), p.payload.end());

  std::uint8_t pseudo[12];
  std::uint32_t s = p.src_ip.value, d = p.dst_ip.value;
  pseudo[0] = std::uint8_t(s >> 24); pseudo[1] = std::uint8_t(s >> 16);
  pseudo[2] = std::uint8_t(s >> 8);  pseudo[3] = std::uint8_t(s);
  pseudo[4] = std::uint8_t(d >> 24); pseudo[5] = std::uint8_t(d >> 16);
  pseudo[6] = std::uint8_t(d >> 8);  pseudo[7] = std::uint8_t(d);
  pseudo[8] = 0;
  pseudo[9] = 6;
  const std::uint16_t seg_len = std::uint16_t(kTcpLen + p.payload.size());
  pseudo[10] = std::uint8_t(seg_len >> 8);
  pseudo[11] = std::uint8_t(seg_len);
  std::uint32_t sum = 0;
  for (int i = 0; i < 12; i += 2)
    sum += (std::uint32_t(pseudo[i]) << 8) | pseudo[i + 1];
  const std::uint16_t tcp_sum = checksum(out.data() + tcp_at, seg_len, sum);
  out[tcp_at + 16] = std::uint8_t(tcp_sum >> 8);
  out[tcp_at + 17] = std::uint8_t(tcp_sum);
  return out;
}

std::string render_http_request(const webapp::HttpRequest& req) {
  // Field order as a browser form would submit it: username leads.
  std::string body;
  const auto append = [&body](const std::string& key,
                              const std::string& value) {
    if (!body.empty()) body += '&';
    body += key + "=" + value;
  };
  if (const auto it = req.form.find("username"); it != req.form.end())
    append(it->first, it->second);
  for (const auto& [key, value] : req.form)
    if (key != "username") append(key, value);
  std::string msg;
  msg += webapp::to_string(req.method);
  msg += ' ';
  msg += req.path;
  msg += " HTTP/1.1\r\nHost: ";
  msg += to_string(req.dst.ip);
  msg += "\r\nUser-Agent: ";
  msg += req.user_agent;
  msg += "\r\nAccept: text/html\r\n";
  if (!body.empty()) {
    msg += "Content-Type: application/x-www-form-urlencoded\r\n";
    msg += "Content-Length: " + std::to_string(body.size()) + "\r\n";
  }
  msg += "Connection: close\r\n\r\n";
  msg += body;
  return msg;
}

std::string render_http_response(const webapp::HttpExchange& x) {
  const char* reason = "OK";
  if (x.status == 302) reason = "Found";
  else if (x.status == 404) reason = "Not Found";
  std::string msg = "HTTP/1.1 " + std::to_string(x.status) + " " + reason +
                    "\r\nServer: Apache/2.4.56 (Unix)\r\n";
  if (x.status == 302) msg += "Location: /index.php\r\n";
  if (x.session_id)
    msg += "Set-Cookie: PHPSESSID=" + *x.session_id + "; path=/\r\n";
  msg += "Content-Length: " + std::to_string(x.response_bytes) +
         "\r\nContent-Type: text/html; charset=UTF-8\r\nConnection: "
         "close\r\n\r\n";
  // Body padded to the exchange's exact byte count.
  std::string body = "<html><head><title>" + x.request.path +
                     "</title></head><body>";
  if (body.size() + 14 > x.response_bytes)
    body = "<html><body>";
  if (body.size() + 14 > x.response_bytes)
    return msg + std::string(x.response_bytes, '.');
  body += std::string(x.response_bytes - body.size() - 14, '.');
  body += "</body></html>";
  return msg + body;
}

std::vector<Packet> exchange_to_flow(const webapp::HttpExchange& x,
                                     std::uint64_t seed,
                                     std::uint64_t exchange_index) {
  const std::string request = render_http_request(x.request);
  const std::string response = render_http_response(x);
  const std::uint32_t req_len = std::uint32_t(request.size());
  const std::uint32_t resp_len = std::uint32_t(response.size());

  const std::uint32_t client_isn =
      std::uint32_t(splitmix64(seed ^ splitmix64(2 * exchange_index)));
  const std::uint32_t server_isn =
      std::uint32_t(splitmix64(seed ^ splitmix64(2 * exchange_index + 1)));

  const Endpoint client = x.request.src;
  const Endpoint server = x.request.dst;
  const Mac client_mac = mac_for(client.ip);
  const Mac server_mac = mac_for(server.ip);

  // Fixed per-flow timing template, 2 ms end to end.
  static constexpr Micros kOffsets[10] = {0,    200,  400,  600,  800,
                                          1200, 1400, 1600, 1800, 2000};

  const auto make = [&](int i, bool from_client, std::uint8_t flags,
                        std::uint32_t seq, std::uint32_t ack,
                        const std::string* payload) {
    Packet p;
    p.ts = x.request.ts + kOffsets[i];
    p.src_mac = from_client ? client_mac : server_mac;
    p.dst_mac = from_client ? server_mac : client_mac;
    p.src_ip = from_client ? client.ip : server.ip;
    p.dst_ip = from_client ? server.ip : client.ip;
    p.src_port = from_client ? client.port : server.port;
    p.dst_port = from_client ? server.port : client.port;
    p.flags = flags;
    p.seq = seq;
    p.ack = ack;
    if (payload) p.payload.assign(payload->begin(), payload->end());
    return p;
  };

  using namespace tcp;
  std::vector<Packet> flow;
  flow.reserve(10);
  flow.push_back(make(0, true, kSyn, client_isn, 0, nullptr));
  flow.push_back(make(1, false, kSyn | kAck, server_isn, client_isn + 1,
                      nullptr));
  flow.push_back(make(2, true, kAck, client_isn + 1, server_isn + 1, nullptr));
  flow.push_back(make(3, true, kPsh | kAck, client_isn + 1, server_isn + 1,
                      &request));
  flow.push_back(make(4, false, kAck, server_isn + 1, client_isn + 1 + req_len,
                      nullptr));
  flow.push_back(make(5, false, kPsh | kAck, server_isn + 1,
                      client_isn + 1 + req_len, &response));
  flow.push_back(make(6, true, kAck, client_isn + 1 + req_len,
                      server_isn + 1 + resp_len, nullptr));
  flow.push_back(make(7, true, kFin | kAck, client_isn + 1 + req_len,
                      server_isn + 1 + resp_len, nullptr));
  flow.push_back(make(8, false, kFin | kAck, server_isn + 1 + resp_len,
                      client_isn + 2 + req_len, nullptr));
  flow.push_back(make(9, true, kAck, client_isn + 2 + req_len,
                      server_isn + 2 + resp_len, nullptr));
  return flow;
}

namespace {

void le16(std::ostream& out, std::uint16_t v) {
  const char bytes[2] = {char(v & 0xff), char(v >> 8)};
  out.write(bytes, 2);
}

void le32(std::ostream& out, std::uint32_t v) {
  const char bytes[4] = {char(v & 0xff), char((v >> 8) & 0xff),
                         char((v >> 16) & 0xff), char(v >> 24)};
  out.write(bytes, 4);
}

}  // namespace

std::size_t write_pcap(const std::vector<Packet>& packets, std::ostream& out) {
  le32(out, 0xa1b2c3d4);  // microsecond-resolution magic
  le16(out, 2);
  le16(out, 4);
  le32(out, 0);      // thiszone
  le32(out, 0);      // sigfigs
  le32(out, 65535);  // snaplen
  le32(out, 1);      // LINKTYPE_ETHERNET
  std::size_t written = 24;
  for (const auto& p : packets) {
    const auto bytes = packet_bytes(p);
    le32(out, std::uint32_t(p.ts / kMicrosPerSecond));
    le32(out, std::uint32_t(p.ts % kMicrosPerSecond));
    le32(out, std::uint32_t(bytes.size()));
    le32(out, std::uint32_t(bytes.size()));
    out.write(reinterpret_cast<const char*>(bytes.data()),
              std::streamsize(bytes.size()));
    written += 16 + bytes.size();
  }
  if (!out) throw SinkError("pcap write failed");
  return written;
}

std::size_t write_pcap_file(const std::vector<Packet>& packets,
                            const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw SinkError("cannot open " + path);
  return write_pcap(packets, out);
}

}  // namespace range::capture
