#include "range/detect.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <deque>
#include <set>
#include <sstream>

#include "range/logtime.hpp"

namespace range::detect {

namespace {

struct Cursor {
  const std::string& line;
  std::size_t pos = 0;

  bool eat(char c) {
    if (pos < line.size() && line[pos] == c) {
      ++pos;
      return true;
    }
    return false;
  }

  bool eat(const char* lit) {
    const std::size_t n = std::strlen(lit);
    if (line.compare(pos, n, lit) == 0) {
      pos += n;
      return true;
    }
    return false;
  }

  std::optional<std::string> until(char stop) {
    const auto at = line.find(stop, pos);
    if (at == std::string::npos) return std::nullopt;
    std::string out = line.substr(pos, at - pos);
    pos = at;
    return out;
  }

  std::optional<std::string> word() {
    const auto at = line.find(' ', pos);
    if (at == std::string::npos || at == pos) return std::nullopt;
    std::string out = line.substr(pos, at - pos);
    pos = at;
    return out;
  }
};

std::optional<AccessLogRecord> fail(ParseIssue* issue, const Cursor& c,
                                    const char* message) {
  if (issue) {
    issue->column = c.pos + 1;
    issue->message = message;
  }
  return std::nullopt;
}

}  // namespace

std::optional<AccessLogRecord> parse_access_line(const std::string& line,
                                                 ParseIssue* issue) {
  Cursor c{line};
  AccessLogRecord rec;

  const auto host = c.word();
  if (!host) return fail(issue, c, "expected client address");
  const auto ip = parse_ipv4(*host);
  if (!ip) return fail(issue, c, "malformed client address");
  rec.ip = *ip;
  if (!c.eat(" - ")) return fail(issue, c, "expected \" - \" after address");

  const auto user = c.word();
  if (!user) return fail(issue, c, "expected remote user field");
  rec.auth_user = *user == "-" ? "" : *user;

  if (!c.eat(" [")) return fail(issue, c, "expected [timestamp]");
  const auto stamp = c.until(']');
  if (!stamp) return fail(issue, c, "unterminated timestamp");
  const auto ts = parse_access_time(*stamp);
  if (!ts) return fail(issue, c, "malformed timestamp");
  rec.ts = *ts;
  c.eat(']');

  if (!c.eat(" \"")) return fail(issue, c, "expected request line");
  const auto request = c.until('"');
  if (!request) return fail(issue, c, "unterminated request line");
  c.eat('"');
  std::istringstream req(*request);
  std::string method, path, proto;
  req >> method >> path >> proto;
  const auto m = webapp::parse_method(method);
  if (!m || path.empty() || proto != "HTTP/1.1")
    return fail(issue, c, "malformed request line");
  rec.method = *m;
  rec.path = path;

  if (!c.eat(' ')) return fail(issue, c, "expected status");
  const auto status = c.word();
  if (!status || status->size() != 3 ||
      !std::all_of(status->begin(), status->end(),
                   [](char ch) { return ch >= '0' && ch <= '9'; }))
    return fail(issue, c, "malformed status");
  rec.status = std::stoi(*status);

  if (!c.eat(' ')) return fail(issue, c, "expected byte count");
  const auto bytes = c.word();
  if (!bytes) return fail(issue, c, "expected byte count");
  if (*bytes == "-") {
    rec.bytes = 0;
  } else {
    try {
      std::size_t used = 0;
      rec.bytes = std::stoull(*bytes, &used);
      if (used != bytes->size()) return fail(issue, c, "malformed byte count");
    } catch (const std::exception&) {
      return fail(issue, c, "malformed byte count");
    }
  }

  if (!c.eat(" \"")) return fail(issue, c, "expected referer");
  const auto referer = c.until('"');
  if (!referer) return fail(issue, c, "unterminated referer");
  c.eat('"');
  rec.referer = *referer == "-" ? "" : *referer;

  if (!c.eat(" \"")) return fail(issue, c, "expected user agent");
  const auto agent = c.until('"');
  if (!agent) return fail(issue, c, "unterminated user agent");
  c.eat('"');
  rec.user_agent = *agent;

  if (c.pos != line.size()) return fail(issue, c, "trailing characters");
  return rec;
}

std::optional<ErrorLogRecord> parse_error_line(const std::string& line,
                                               ParseIssue* issue) {
  Cursor c{line};
  const auto bad = [&](const char* message) -> std::optional<ErrorLogRecord> {
    if (issue) {
      issue->column = c.pos + 1;
      issue->message = message;
    }
    return std::nullopt;
  };

  ErrorLogRecord rec;
  if (!c.eat('[')) return bad("expected [timestamp]");
  const auto stamp = c.until(']');
  if (!stamp) return bad("unterminated timestamp");
  const auto ts = parse_error_time(*stamp);
  if (!ts) return bad("malformed timestamp");
  rec.ts = *ts;
  c.eat(']');

  if (!c.eat(" [auth:error] [pid ")) return bad("expected [auth:error] [pid]");
  if (!c.until(']')) return bad("unterminated pid");
  c.eat(']');

  if (!c.eat(" [client ")) return bad("expected [client ip:port]");
  const auto client = c.until(']');
  if (!client) return bad("unterminated client field");
  c.eat(']');
  const auto colon = client->rfind(':');
  if (colon == std::string::npos) return bad("expected ip:port");
  const auto ip = parse_ipv4(client->substr(0, colon));
  if (!ip) return bad("malformed client address");
  rec.ip = *ip;
  try {
    rec.port = std::uint16_t(std::stoi(client->substr(colon + 1)));
  } catch (const std::exception&) {
    return bad("malformed client port");
  }

  if (!c.eat(" user ")) return bad("expected user field");
  const auto user = c.until(':');
  if (!user) return bad("unterminated user field");
  rec.username = *user;
  c.eat(':');
  if (!c.eat(" authentication failure for \"/login.php\""))
    return bad("unexpected failure message");
  if (c.pos != line.size()) return bad("trailing characters");
  return rec;
}

ParsedLogs parse_logs(std::istream& access, std::istream& error) {
  ParsedLogs out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(access, line)) {
    ++lineno;
    ParseIssue issue{lineno, 0, ""};
    if (auto rec = parse_access_line(line, &issue))
      out.access.push_back(*rec);
    else
      out.issues.push_back(issue);
  }
  lineno = 0;
  while (std::getline(error, line)) {
    ++lineno;
    ParseIssue issue{lineno, 0, ""};
    if (auto rec = parse_error_line(line, &issue))
      out.errors.push_back(*rec);
    else
      out.issues.push_back(issue);
  }
  return out;
}

namespace {

// Episodes are maximal failure runs whose consecutive gaps stay below the
// window; a finding exists iff the episode contains a trigger. This keeps
// one attack one finding and makes the per-IP rule monotone in its
// threshold.
struct Episode {
  std::vector<std::size_t> indices;  // into the failure list
};

template <typename GetTs>
std::vector<Episode> split_episodes(std::size_t n, Micros window_us,
                                    const GetTs& ts_of) {
  std::vector<Episode> out;
  for (std::size_t i = 0; i < n; ++i) {
    if (out.empty() ||
        ts_of(i) - ts_of(out.back().indices.back()) >= window_us)
      out.emplace_back();
    out.back().indices.push_back(i);
  }
  return out;
}

}  // namespace

std::vector<DetectionFinding> detect_bursts(
    const std::vector<ErrorLogRecord>& errors, const DetectorConfig& cfg) {
  const Micros window_us = Micros(cfg.window_s * kMicrosPerSecond);
  std::vector<DetectionFinding> out;

  // Per-IP rule, one incremental pass per source.
  std::map<Ipv4, std::vector<std::size_t>> by_ip;
  for (std::size_t i = 0; i < errors.size(); ++i)
    by_ip[errors[i].ip].push_back(i);

  for (const auto& [ip, indices] : by_ip) {
    const auto ts_of = [&](std::size_t k) { return errors[indices[k]].ts; };
    const auto episodes = split_episodes(indices.size(), window_us, ts_of);
    for (const auto& ep : episodes) {
      std::deque<Micros> window;
      std::optional<Micros> last_trigger;
      for (const std::size_t k : ep.indices) {
        const Micros t = ts_of(k);
        window.push_back(t);
        while (window.front() <= t - window_us) window.pop_front();
        if (int(window.size()) >= cfg.per_ip_threshold) last_trigger = t;
      }
      if (!last_trigger) continue;
      DetectionFinding f;
      f.kind = FindingKind::SingleSourceBurst;
      f.src_ip = ip;
      f.window_start = ts_of(ep.indices.front());
      f.window_end = *last_trigger;
      std::set<std::string> users;
      for (const std::size_t k : ep.indices) {
        if (ts_of(k) > f.window_end) break;
        ++f.failure_count;
        users.insert(errors[indices[k]].username);
      }
      f.distinct_usernames = int(users.size());
      out.push_back(f);
    }
  }

  // Distributed rule over the pooled failure stream.
  const auto all_ts = [&](std::size_t i) { return errors[i].ts; };
  const auto episodes = split_episodes(errors.size(), window_us, all_ts);
  for (const auto& ep : episodes) {
    std::deque<std::size_t> window;
    std::map<Ipv4, int> counts;
    std::optional<Micros> last_trigger;
    std::optional<Micros> first_trigger;
    for (const std::size_t i : ep.indices) {
      const Micros t = errors[i].ts;
      window.push_back(i);
      ++counts[errors[i].ip];
      while (errors[window.front()].ts <= t - window_us) {
        if (--counts[errors[window.front()].ip] == 0)
          counts.erase(errors[window.front()].ip);
        window.pop_front();
      }
      if (int(window.size()) < cfg.global_threshold) continue;
      int max_per_ip = 0;
      for (const auto& [_, c] : counts) max_per_ip = std::max(max_per_ip, c);
      if (max_per_ip >= cfg.per_ip_threshold) continue;
      if (!first_trigger) first_trigger = t;
      last_trigger = t;
    }
    if (!last_trigger) continue;
    DetectionFinding f;
    f.kind = FindingKind::DistributedBurst;
    f.src_ip = Ipv4{};
    f.window_start = errors[ep.indices.front()].ts;
    f.window_end = *last_trigger;
    std::set<std::string> users;
    for (const std::size_t i : ep.indices) {
      if (errors[i].ts > f.window_end) break;
      ++f.failure_count;
      users.insert(errors[i].username);
    }
    f.distinct_usernames = int(users.size());
    out.push_back(f);
  }

  std::sort(out.begin(), out.end(),
            [](const DetectionFinding& a, const DetectionFinding& b) {
              return std::tie(a.window_start, a.src_ip.value) <
                     std::tie(b.window_start, b.src_ip.value);
            });
  return out;
}

StatReport statistics(const std::vector<AccessLogRecord>& access,
                      const std::vector<ErrorLogRecord>& errors) {
  StatReport report;
  report.total_requests = access.size();
  report.total_failures = errors.size();
  std::map<Ipv4, IpStats> per_ip;
  for (const auto& rec : access) {
    auto& s = per_ip[rec.ip];
    s.ip = rec.ip;
    ++s.requests;
    report.rps_histogram[rec.ts / kMicrosPerSecond]++;
  }
  for (const auto& rec : errors) {
    auto& s = per_ip[rec.ip];
    s.ip = rec.ip;
    ++s.failures;
  }
  for (auto& [ip, s] : per_ip) {
    s.failure_ratio =
        s.requests == 0 ? 1.0 : double(s.failures) / double(s.requests);
    report.per_ip.push_back(s);
  }
  std::sort(report.per_ip.begin(), report.per_ip.end(),
            [](const IpStats& a, const IpStats& b) {
              return std::tie(b.requests, b.failures, a.ip.value) <
                     std::tie(a.requests, a.failures, b.ip.value);
            });
  return report;
}

std::string render_table(const StatReport& report, std::size_t top_n) {
  std::ostringstream out;
  out << "requests: " << report.total_requests
      << "  auth failures: " << report.total_failures << "\n";
  out << "top sources:\n";
  char line[96];
  std::snprintf(line, sizeof(line), "  %-17s %9s %9s %8s\n", "ip", "requests",
                "failures", "ratio");
  out << line;
  for (std::size_t i = 0; i < report.per_ip.size() && i < top_n; ++i) {
    const IpStats& s = report.per_ip[i];
    std::snprintf(line, sizeof(line), "  %-17s %9zu %9zu %8.3f\n",
                  to_string(s.ip).c_str(), s.requests, s.failures,
                  s.failure_ratio);
    out << line;
  }
  return out.str();
}

std::vector<TruthRecord> load_ground_truth(std::istream& in) {
  std::vector<TruthRecord> out;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (first) {  // header
      first = false;
      continue;
    }
    if (line.empty()) continue;
    std::istringstream fields(line);
    std::string ts, ip, label, user;
    std::getline(fields, ts, ',');
    std::getline(fields, ip, ',');
    std::getline(fields, label, ',');
    std::getline(fields, user);
    TruthRecord rec;
    rec.ts = std::stoll(ts);
    if (auto parsed = parse_ipv4(ip)) rec.src_ip = *parsed;
    rec.attack = label == "attack";
    rec.username_tried = user;
    out.push_back(rec);
  }
  return out;
}

ScoreReport score(const std::vector<DetectionFinding>& findings,
                  const std::vector<TruthRecord>& truth,
                  const std::vector<ErrorLogRecord>& errors,
                  const DetectorConfig& cfg) {
  const Micros window_us = Micros(cfg.window_s * kMicrosPerSecond);

  // Attack failures: error records matching an attack-labeled truth row.
  std::set<std::pair<Micros, std::uint32_t>> attack_keys;
  for (const auto& t : truth)
    if (t.attack) attack_keys.insert({t.ts, t.src_ip.value});
  std::vector<const ErrorLogRecord*> attack_failures;
  for (const auto& rec : errors)
    if (attack_keys.contains({rec.ts, rec.ip.value}))
      attack_failures.push_back(&rec);

  const auto ts_of = [&](std::size_t i) { return attack_failures[i]->ts; };
  const auto episodes =
      split_episodes(attack_failures.size(), window_us, ts_of);

  ScoreReport report;
  std::vector<bool> covered(episodes.size(), false);
  for (const auto& f : findings) {
    bool hit = false;
    for (std::size_t e = 0; e < episodes.size(); ++e) {
      for (const std::size_t i : episodes[e].indices) {
        const ErrorLogRecord& rec = *attack_failures[i];
        if (rec.ts < f.window_start || rec.ts > f.window_end) continue;
        if (f.kind == FindingKind::SingleSourceBurst && rec.ip != f.src_ip)
          continue;
        hit = true;
        covered[e] = true;
      }
    }
    hit ? ++report.true_positives : ++report.false_positives;
  }
  for (const bool c : covered)
    if (!c) ++report.false_negatives;

  const int found = report.true_positives + report.false_positives;
  report.precision = found == 0 ? 1.0 : double(report.true_positives) / found;
  report.recall = episodes.empty()
                      ? 1.0
                      : double(episodes.size() - std::size_t(
                                                     report.false_negatives)) /
                            double(episodes.size());
  return report;
}

std::string findings_csv(const std::vector<DetectionFinding>& findings) {
  std::ostringstream out;
  out << "kind,src_ip,window_start_us,window_end_us,failure_count\n";
  for (const auto& f : findings) {
    out << (f.kind == FindingKind::SingleSourceBurst ? "single_source_burst"
                                                     : "distributed_burst")
        << ','
        << (f.kind == FindingKind::SingleSourceBurst ? to_string(f.src_ip)
                                                     : std::string("*"))
        << ',' << f.window_start << ',' << f.window_end << ','
        << f.failure_count << '\n';
  }
  return out.str();
}

}  // namespace range::detect
