#pragma once

#include <optional>
#include <string>
#include <vector>

#include "range/capture.hpp"
#include "range/dsl.hpp"
#include "range/ips.hpp"
#include "range/traffic.hpp"
#include "range/webapp.hpp"

namespace range::pipeline {

struct DeliveredEvent {
  traffic::Event event;
  webapp::HttpExchange exchange;
};

struct DroppedEvent {
  traffic::Event event;  // suppressed by an active ban
};

struct BanAction {
  Micros ts = 0;
  bool ban = true;  // false = unban at expiry
  Ipv4 ip;
};

struct SimulationResult {
  std::vector<traffic::Event> generated;  // full merged stream, pre-IPS
  std::vector<DeliveredEvent> delivered;
  std::vector<DroppedEvent> dropped;
  std::vector<BanAction> ban_actions;
  std::vector<ips::BanEntry> bans;
  bool attacker_succeeded = false;
};

// Runs the compiled plan: generate benign + attack streams, merge, and feed
// the web app; with IPS enabled each request first consults the ban engine
// and banned-source requests are dropped without a trace in the logs.
SimulationResult simulate(const dsl::SimulationPlan& plan);

std::string access_log_text(const SimulationResult& result);
std::string error_log_text(const SimulationResult& result);
std::string ground_truth_csv(const SimulationResult& result);
std::string fail2ban_log_text(const SimulationResult& result);
std::vector<capture::Packet> capture_packets(const SimulationResult& result,
                                             std::uint64_t seed);

struct RunManifest {
  std::string plan_digest;  // fnv-1a over the plan's deterministic fields
  std::uint64_t seed = 0;
  std::string access_log;
  std::string error_log;
  std::string pcap;
  std::string ground_truth;
  std::string fail2ban_log;  // empty when IPS is off
  std::string findings;      // filled in by analyze
  std::string engine_version;
};

std::string plan_digest(const dsl::SimulationPlan& plan);

// Writes every artifact under plan.output_dir, mirroring the deployment
// paths (opt/lampp/logs, etc/fail2ban), plus manifest.json at the root.
RunManifest write_artifacts(const dsl::SimulationPlan& plan,
                            const SimulationResult& result);

RunManifest load_manifest(const std::string& run_dir);
void save_manifest(const std::string& run_dir, const RunManifest& manifest);

inline constexpr const char* kEngineVersion = "0.1.0";

}  // namespace range::pipeline
