#include "range/ips.hpp"

#include <algorithm>
#include <charconv>
#include <sstream>

namespace range::ips {

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

bool parse_bool(const std::string& v, bool& out) {
  if (v == "true" || v == "yes" || v == "on" || v == "1") out = true;
  else if (v == "false" || v == "no" || v == "off" || v == "0") out = false;
  else return false;
  return true;
}

bool parse_num(const std::string& v, double& out) {
  std::size_t pos = 0;
  try {
    out = std::stod(v, &pos);
  } catch (const std::exception&) {
    return false;
  }
  return pos == v.size();
}

void apply_key(JailConfig& jail, const std::string& section,
               const std::string& key, const std::string& value) {
  const auto bad = [&]() -> ConfigError {
    return ConfigError("unparseable value at [" + section + "]." + key);
  };
  double num = 0;
  if (key == "enabled") {
    if (!parse_bool(value, jail.enabled)) throw bad();
  } else if (key == "port") {
    if (!parse_num(value, num) || num < 0 || num > 65535) throw bad();
    jail.port = int(num);
  } else if (key == "filter") {
    jail.filter = value;
  } else if (key == "logpath") {
    jail.logpath = value;
  } else if (key == "maxretry") {
    if (!parse_num(value, num) || num < 1) throw bad();
    jail.maxretry = int(num);
  } else if (key == "findtime") {
    if (!parse_num(value, num) || num <= 0) throw bad();
    jail.findtime_s = num;
  } else if (key == "bantime") {
    if (!parse_num(value, num) || num <= 0) throw bad();
    jail.bantime_s = num;
  } else if (key == "ignoreip") {
    jail.ignoreip.clear();
    std::istringstream parts(value);
    std::string item;
    while (parts >> item) {
      if (!IpMatcher::parse(item)) throw bad();
      jail.ignoreip.push_back(item);
    }
  }
  // Unknown keys are ignored, as real fail2ban jails carry action keys
  // this engine does not model.
}

}  // namespace

std::map<std::string, JailConfig> parse_jail(const std::string& text) {
  std::map<std::string, std::vector<std::pair<std::string, std::string>>> raw;
  std::vector<std::string> order;
  std::string section;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    line = trim(line);
    if (line.empty() || line[0] == '#' || line[0] == ';') continue;
    if (line.front() == '[') {
      const auto close = line.find(']');
      if (close == std::string::npos)
        throw ConfigError("unterminated section header: " + line);
      section = trim(line.substr(1, close - 1));
      if (!raw.contains(section)) order.push_back(section);
      raw[section];
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("expected key = value in [" + section + "]: " + line);
    raw[section].emplace_back(trim(line.substr(0, eq)),
                              trim(line.substr(eq + 1)));
  }

  std::map<std::string, JailConfig> out;
  for (const auto& name : order) {
    if (name == "DEFAULT") continue;
    JailConfig jail;
    const auto defaults = raw.find("DEFAULT");
    if (defaults != raw.end())
      for (const auto& [k, v] : defaults->second) apply_key(jail, name, k, v);
    for (const auto& [k, v] : raw[name]) apply_key(jail, name, k, v);
    out.emplace(name, std::move(jail));
  }
  return out;
}

FailFilter::FailFilter(std::vector<std::string> failregex,
                       std::vector<std::string> ignoreregex) {
  for (const auto& pattern : failregex) {
    const auto host = pattern.find("<HOST>");
    if (host == std::string::npos ||
        pattern.find("<HOST>", host + 1) != std::string::npos)
      throw PatternError("failregex must contain <HOST> exactly once: " +
                         pattern);
    const std::string expanded = pattern.substr(0, host) +
                                 R"((\d{1,3}(?:\.\d{1,3}){3}))" +
                                 pattern.substr(host + 6);
    try {
      fail_.emplace_back(expanded);
    } catch (const std::regex_error& e) {
      throw PatternError("invalid failregex '" + pattern + "': " + e.what());
    }
  }
  for (const auto& pattern : ignoreregex) {
    try {
      ignore_.emplace_back(pattern);
    } catch (const std::regex_error& e) {
      throw PatternError("invalid ignoreregex '" + pattern + "': " + e.what());
    }
  }
}

FailFilter FailFilter::default_filter() {
  return FailFilter({R"(\[client <HOST>:\d+\] user \S+: authentication failure)"});
}

std::optional<Ipv4> FailFilter::match_failure(const std::string& line) const {
  std::smatch m;
  for (const auto& re : fail_) {
    if (!std::regex_search(line, m, re)) continue;
    for (const auto& ig : ignore_)
      if (std::regex_search(line, ig)) return std::nullopt;
    return parse_ipv4(m[1].str());
  }
  return std::nullopt;
}

BanEngine::BanEngine(JailConfig jail) : jail_(std::move(jail)) {
  findtime_us_ = Micros(jail_.findtime_s * kMicrosPerSecond);
  bantime_us_ = Micros(jail_.bantime_s * kMicrosPerSecond);
  for (const auto& entry : jail_.ignoreip)
    if (auto m = IpMatcher::parse(entry)) ignore_.push_back(*m);
}

bool BanEngine::ignored(Ipv4 ip) const {
  return std::any_of(ignore_.begin(), ignore_.end(),
                     [&](const IpMatcher& m) { return m.contains(ip); });
}

std::optional<BanEntry> BanEngine::observe(Ipv4 ip, Micros ts) {
  if (!jail_.enabled || ignored(ip)) return std::nullopt;
  auto& window = failures_[ip];
  window.push_back(ts);
  while (!window.empty() && window.front() <= ts - findtime_us_)
    window.pop_front();
  if (int(window.size()) < jail_.maxretry || is_banned(ip, ts))
    return std::nullopt;
  BanEntry ban{ip, ts, ts + bantime_us_, int(window.size())};
  window.clear();
  current_[ip] = ban;
  history_.push_back(ban);
  return ban;
}

bool BanEngine::is_banned(Ipv4 ip, Micros ts) const {
  const auto it = current_.find(ip);
  return it != current_.end() && it->second.banned_at <= ts &&
         ts < it->second.expires_at;
}

std::vector<BanEntry> BanEngine::active_bans(Micros ts) const {
  std::vector<BanEntry> out;
  for (const auto& [ip, ban] : current_)
    if (ban.banned_at <= ts && ts < ban.expires_at) out.push_back(ban);
  return out;
}

std::string default_jail_text(const JailConfig& jail) {
  std::ostringstream out;
  out << "[DEFAULT]\n"
      << "bantime = " << int(jail.bantime_s) << "\n"
      << "findtime = " << int(jail.findtime_s) << "\n"
      << "maxretry = " << jail.maxretry << "\n\n"
      << "[webapp-auth]\n"
      << "enabled = " << (jail.enabled ? "true" : "false") << "\n"
      << "port = " << jail.port << "\n"
      << "filter = " << jail.filter << "\n"
      << "logpath = " << jail.logpath << "\n";
  if (!jail.ignoreip.empty()) {
    out << "ignoreip =";
    for (const auto& ip : jail.ignoreip) out << ' ' << ip;
    out << "\n";
  }
  return out.str();
}

}  // namespace range::ips
