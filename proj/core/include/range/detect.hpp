#pragma once

#include <cstddef>
#include <istream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "range/net.hpp"
#include "range/webapp.hpp"

namespace range::detect {

struct AccessLogRecord {
  Ipv4 ip;
  std::string auth_user;  // %u field, "-" mapped to empty
  Micros ts = 0;
  webapp::Method method = webapp::Method::Get;
  std::string path;
  int status = 0;
  std::size_t bytes = 0;
  std::string referer;
  std::string user_agent;
};

struct ErrorLogRecord {
  Micros ts = 0;
  Ipv4 ip;
  std::uint16_t port = 0;
  std::string username;
};

struct ParseIssue {
  std::size_t line = 0;    // 1-based
  std::size_t column = 0;  // 1-based, first position that failed to match
  std::string message;
};

std::optional<AccessLogRecord> parse_access_line(const std::string& line,
                                                 ParseIssue* issue = nullptr);
std::optional<ErrorLogRecord> parse_error_line(const std::string& line,
                                               ParseIssue* issue = nullptr);

struct ParsedLogs {
  std::vector<AccessLogRecord> access;
  std::vector<ErrorLogRecord> errors;
  std::vector<ParseIssue> issues;  // collected, never fatal
};

ParsedLogs parse_logs(std::istream& access, std::istream& error);

struct DetectorConfig {
  double window_s = 60;
  int per_ip_threshold = 10;
  int global_threshold = 50;
};

enum class FindingKind { SingleSourceBurst, DistributedBurst };

struct DetectionFinding {
  FindingKind kind = FindingKind::SingleSourceBurst;
  Ipv4 src_ip;  // 0.0.0.0 for distributed findings
  Micros window_start = 0;  // first failure of the episode
  Micros window_end = 0;    // last trigger
  int failure_count = 0;
  int distinct_usernames = 0;
};

// Sliding-window burst detection over auth failures. A trigger at failure
// time t needs >= per_ip_threshold failures from one IP inside the half-open
// window (t - window, t]; overlapping triggers for the same IP coalesce into
// one maximal finding. The distributed rule fires when the window's total
// reaches global_threshold while no single IP reaches per_ip_threshold.
std::vector<DetectionFinding> detect_bursts(
    const std::vector<ErrorLogRecord>& errors, const DetectorConfig& cfg);

struct IpStats {
  Ipv4 ip;
  std::size_t requests = 0;
  std::size_t failures = 0;
  double failure_ratio = 0;
};

struct StatReport {
  std::size_t total_requests = 0;
  std::size_t total_failures = 0;
  std::vector<IpStats> per_ip;            // descending by requests
  std::map<std::int64_t, std::size_t> rps_histogram;  // second -> requests
};

StatReport statistics(const std::vector<AccessLogRecord>& access,
                      const std::vector<ErrorLogRecord>& errors);

std::string render_table(const StatReport& report, std::size_t top_n = 10);

struct TruthRecord {
  Micros ts = 0;
  Ipv4 src_ip;
  bool attack = false;
  std::string username_tried;
};

std::vector<TruthRecord> load_ground_truth(std::istream& in);

struct ScoreReport {
  int true_positives = 0;
  int false_positives = 0;
  int false_negatives = 0;
  double precision = 1.0;
  double recall = 1.0;
};

// Attack failures = error records that coincide with an attack-labeled truth
// row; maximal runs of them with gaps <= window form episodes. A finding is a
// true positive iff it overlaps an attack failure from its IP (any IP for
// distributed findings).
ScoreReport score(const std::vector<DetectionFinding>& findings,
                  const std::vector<TruthRecord>& truth,
                  const std::vector<ErrorLogRecord>& errors,
                  const DetectorConfig& cfg);

std::string findings_csv(const std::vector<DetectionFinding>& findings);

}  // namespace range::detect
