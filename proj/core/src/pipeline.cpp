#include "range/pipeline.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "range/logtime.hpp"

namespace range::pipeline {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

SimulationResult simulate(const dsl::SimulationPlan& plan) {
  const Micros horizon_us = Micros(plan.duration_s * kMicrosPerSecond);

  std::vector<traffic::EventStream> streams;
  streams.push_back(traffic::replay_sessions(plan.benign_sessions,
                                             plan.web_host, plan.seed,
                                             plan.duration_s,
                                             /*first_actor=*/0));
  const auto credential_ok = [&](const std::string& user,
                                 const std::string& password) {
    for (const auto& acct : plan.accounts)
      if (acct.username == user) return acct.password == password;
    return false;
  };
  if (!plan.attack.wordlist.empty() && !plan.attack.source_ips.empty()) {
    const auto attacker_id =
        std::uint32_t(plan.benign_sessions.size());
    streams.push_back(traffic::brute_force(plan.attack, plan.web_host,
                                           credential_ok, attacker_id));
  }
  traffic::EventStream merged = traffic::merge(streams);

  SimulationResult result;
  for (auto& ev : merged.events) {
    if (ev.ts > horizon_us) continue;
    ev.ts += plan.virtual_start;
    ev.request.ts = ev.ts;
    result.generated.push_back(std::move(ev));
  }

  webapp::Server server(plan.web_host, plan.accounts, plan.seed);
  std::optional<ips::BanEngine> engine;
  ips::FailFilter filter = ips::FailFilter::default_filter();
  if (plan.ips_enabled)
    engine.emplace(plan.jail.value_or(ips::JailConfig{}));

  for (const auto& ev : result.generated) {
    if (engine && engine->is_banned(ev.request.src.ip, ev.ts)) {
      result.dropped.push_back({ev});
      continue;
    }
    webapp::HttpExchange x = server.handle(ev.request);
    if (ev.label == traffic::Label::Attack &&
        x.outcome == webapp::Outcome::AuthSuccess)
      result.attacker_succeeded = true;
    if (engine) {
      if (const auto line = webapp::render_error_log(x)) {
        if (const auto ip = filter.match_failure(*line)) {
          if (const auto ban = engine->observe(*ip, ev.ts)) {
            result.bans.push_back(*ban);
            result.ban_actions.push_back({ban->banned_at, true, ban->ip});
          }
        }
      }
    }
    result.delivered.push_back({ev, std::move(x)});
  }

  const Micros run_end = plan.virtual_start + horizon_us;
  for (const auto& ban : result.bans)
    if (ban.expires_at <= run_end)
      result.ban_actions.push_back({ban.expires_at, false, ban.ip});
  std::sort(result.ban_actions.begin(), result.ban_actions.end(),
            [](const BanAction& a, const BanAction& b) {
              return std::tie(a.ts, a.ip.value) < std::tie(b.ts, b.ip.value);
            });
  return result;
}

std::string access_log_text(const SimulationResult& result) {
  std::string out;
  for (const auto& d : result.delivered) {
    out += webapp::render_access_log(d.exchange);
    out += '\n';
  }
  return out;
}

std::string error_log_text(const SimulationResult& result) {
  std::string out;
  for (const auto& d : result.delivered)
    if (const auto line = webapp::render_error_log(d.exchange)) {
      out += *line;
      out += '\n';
    }
  return out;
}

std::string ground_truth_csv(const SimulationResult& result) {
  std::string out = "ts_us,src_ip,label,username_tried\n";
  for (const auto& ev : result.generated) {
    out += std::to_string(ev.ts);
    out += ',';
    out += to_string(ev.request.src.ip);
    out += ',';
    out += ev.label == traffic::Label::Attack ? "attack" : "benign";
    out += ',';
    const auto user = ev.request.form.find("username");
    if (ev.label == traffic::Label::Attack &&
        user != ev.request.form.end())
      out += user->second;
    out += '\n';
  }
  return out;
}

std::string fail2ban_log_text(const SimulationResult& result) {
  std::string out;
  for (const auto& action : result.ban_actions) {
    out += format_ban_time(action.ts);
    out += " fail2ban.actions [webapp-auth] ";
    out += action.ban ? "Ban " : "Unban ";
    out += to_string(action.ip);
    out += '\n';
  }
  return out;
}

std::vector<capture::Packet> capture_packets(const SimulationResult& result,
                                             std::uint64_t seed) {
  std::vector<capture::Packet> packets;
  packets.reserve(result.delivered.size() * 10);
  for (std::size_t i = 0; i < result.delivered.size(); ++i) {
    auto flow = capture::exchange_to_flow(result.delivered[i].exchange, seed,
                                          i);
    packets.insert(packets.end(), flow.begin(), flow.end());
  }
  std::stable_sort(packets.begin(), packets.end(),
                   [](const capture::Packet& a, const capture::Packet& b) {
                     return a.ts < b.ts;
                   });
  return packets;
}

std::string plan_digest(const dsl::SimulationPlan& plan) {
  std::ostringstream fields;
  fields << plan.seed << '|' << plan.virtual_start << '|' << plan.duration_s
         << '|' << to_string(plan.web_host.ip) << ':' << plan.web_host.port
         << '|' << plan.ips_enabled << '|' << plan.attack.wordlist.size()
         << '|' << plan.attack.source_ips.size() << '|'
         << plan.attack.target_username << '|' << plan.benign_sessions.size();
  for (const auto& acct : plan.accounts)
    fields << '|' << acct.username << '=' << acct.password;
  const std::string s = fields.str();
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(
                    fnv1a64(s.data(), s.size())));
  return buf;
}

namespace {

void write_file(const fs::path& path, const std::string& content) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << content;
}

}  // namespace

RunManifest write_artifacts(const dsl::SimulationPlan& plan,
                            const SimulationResult& result) {
  const fs::path root = plan.output_dir;
  RunManifest manifest;
  manifest.plan_digest = plan_digest(plan);
  manifest.seed = plan.seed;
  manifest.engine_version = kEngineVersion;

  const fs::path logs = root / "opt" / "lampp" / "logs";
  manifest.access_log = (logs / "access.log").string();
  manifest.error_log = (logs / "error.log").string();
  manifest.pcap = (root / "capture.pcap").string();
  manifest.ground_truth = (root / "ground_truth.csv").string();
  write_file(manifest.access_log, access_log_text(result));
  write_file(manifest.error_log, error_log_text(result));
  write_file(manifest.ground_truth, ground_truth_csv(result));

  const auto packets = capture_packets(result, plan.seed);
  fs::create_directories(root);
  capture::write_pcap_file(packets, manifest.pcap);

  if (plan.ips_enabled) {
    const fs::path jail_dir = root / "etc" / "fail2ban";
    // The real tool reads jail.local; the paper prints "local.jail", so an
    // existing file under either name is kept as-is.
    if (!fs::exists(jail_dir / "jail.local") &&
        !fs::exists(jail_dir / "local.jail"))
      write_file(jail_dir / "jail.local",
                 ips::default_jail_text(plan.jail.value_or(ips::JailConfig{})));
    manifest.fail2ban_log = (root / "var" / "log" / "fail2ban.log").string();
    write_file(manifest.fail2ban_log, fail2ban_log_text(result));
  }

  save_manifest(root.string(), manifest);
  return manifest;
}

void save_manifest(const std::string& run_dir, const RunManifest& manifest) {
  Json j = Json::object();
  j["plan_digest"] = manifest.plan_digest;
  j["seed"] = manifest.seed;
  j["engine_version"] = manifest.engine_version;
  Json artifacts = Json::object();
  artifacts["access_log"] = manifest.access_log;
  artifacts["error_log"] = manifest.error_log;
  artifacts["pcap"] = manifest.pcap;
  artifacts["ground_truth"] = manifest.ground_truth;
  if (!manifest.fail2ban_log.empty())
    artifacts["fail2ban_log"] = manifest.fail2ban_log;
  if (!manifest.findings.empty()) artifacts["findings"] = manifest.findings;
  j["artifacts"] = std::move(artifacts);
  write_file(fs::path(run_dir) / "manifest.json", j.dump(2) + "\n");
}

RunManifest load_manifest(const std::string& run_dir) {
  std::ifstream in(fs::path(run_dir) / "manifest.json");
  if (!in)
    throw std::runtime_error("no manifest.json under " + run_dir);
  Json j = Json::parse(in);
  RunManifest manifest;
  manifest.plan_digest = j.value("plan_digest", "");
  manifest.seed = j.value("seed", std::uint64_t(0));
  manifest.engine_version = j.value("engine_version", "");
  const Json& artifacts = j.at("artifacts");
  manifest.access_log = artifacts.value("access_log", "");
  manifest.error_log = artifacts.value("error_log", "");
  manifest.pcap = artifacts.value("pcap", "");
  manifest.ground_truth = artifacts.value("ground_truth", "");
  manifest.fail2ban_log = artifacts.value("fail2ban_log", "");
  manifest.findings = artifacts.value("findings", "");
  return manifest;
}

}  // namespace range::pipeline
