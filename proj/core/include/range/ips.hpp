#pragma once

#include <deque>
#include <map>
#include <optional>
#include <regex>
#include <stdexcept>
#include <string>
#include <vector>

#include "range/net.hpp"

namespace range::ips {

struct JailConfig {
  bool enabled = true;
  int port = 80;
  std::string filter = "webapp-auth";
  std::string logpath = "/opt/lampp/logs/error.log";
  int maxretry = 5;
  double findtime_s = 600;
  double bantime_s = 600;
  std::vector<std::string> ignoreip;
};

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct PatternError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// INI-style jail file: [DEFAULT] plus one section per jail, `key = value`
// lines, '#'/';' comments. Jail values override DEFAULT values.
std::map<std::string, JailConfig> parse_jail(const std::string& text);

class FailFilter {
 public:
  // Every failregex must contain the literal token <HOST> exactly once;
  // it captures the offending IPv4. Throws PatternError at load time.
  FailFilter(std::vector<std::string> failregex,
             std::vector<std::string> ignoreregex = {});

  // The shipped filter for the web app's error.log format.
  static FailFilter default_filter();

  std::optional<Ipv4> match_failure(const std::string& line) const;

 private:
  std::vector<std::regex> fail_;
  std::vector<std::regex> ignore_;
};

struct BanEntry {
  Ipv4 ip;
  Micros banned_at = 0;
  Micros expires_at = 0;
  int triggering_failures = 0;
};

// maxretry failures inside a half-open (ts - findtime, ts] window ban the IP
// for bantime; banning consumes the counted failures, so a re-ban after
// expiry needs maxretry fresh ones.
class BanEngine {
 public:
  explicit BanEngine(JailConfig jail);

  std::optional<BanEntry> observe(Ipv4 ip, Micros ts);
  bool is_banned(Ipv4 ip, Micros ts) const;

  const JailConfig& jail() const { return jail_; }
  const std::vector<BanEntry>& history() const { return history_; }
  std::vector<BanEntry> active_bans(Micros ts) const;

 private:
  bool ignored(Ipv4 ip) const;

  JailConfig jail_;
  Micros findtime_us_;
  Micros bantime_us_;
  std::vector<IpMatcher> ignore_;
  std::map<Ipv4, std::deque<Micros>> failures_;
  std::map<Ipv4, BanEntry> current_;
  std::vector<BanEntry> history_;
};

// Canonical jail.local content for the web app scenario.
std::string default_jail_text(const JailConfig& jail);

}  // namespace range::ips
