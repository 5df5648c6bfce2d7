#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>
#include <sstream>

#include "oracles.hpp"
#include "range/detect.hpp"
#include "range/webapp.hpp"

using namespace range;
using detect::DetectorConfig;
using detect::ErrorLogRecord;
using detect::FindingKind;

namespace {

std::vector<ErrorLogRecord> failures_at(Ipv4 ip,
                                        const std::vector<double>& seconds,
                                        const std::string& user = "dave") {
  std::vector<ErrorLogRecord> out;
  for (const double s : seconds)
    out.push_back({Micros(s * kMicrosPerSecond), ip, 40001, user});
  return out;
}

std::vector<ErrorLogRecord> random_trace(std::mt19937_64& rng,
                                         std::size_t max_records) {
  std::vector<ErrorLogRecord> out;
  std::uniform_int_distribution<int> ip_count(1, 40);
  std::uniform_int_distribution<int> record_count(0, int(max_records));
  std::uniform_int_distribution<Micros> step(0, 20 * kMicrosPerSecond);
  const int ips = ip_count(rng);
  const int records = record_count(rng);
  Micros ts = 0;
  for (int i = 0; i < records; ++i) {
    ts += step(rng) / (rng() % 8 == 0 ? 1 : 50);
    ErrorLogRecord rec;
    rec.ts = ts;
    rec.ip = Ipv4(10, 0, 0, std::uint8_t(1 + int(rng() % std::uint64_t(ips))));
    rec.port = 40000;
    rec.username = rng() % 3 ? "dave" : "alice";
    out.push_back(rec);
  }
  return out;
}

}  // namespace

TEST_CASE("twelve failures at one-second spacing give one finding of 12") {
  std::vector<double> times;
  for (int i = 0; i < 12; ++i) times.push_back(i);
  const auto findings = detect::detect_bursts(
      failures_at(Ipv4(192, 168, 2, 1), times), {60, 10, 50});
  REQUIRE(findings.size() == 1);
  CHECK(findings[0].kind == FindingKind::SingleSourceBurst);
  CHECK(findings[0].failure_count == 12);
  CHECK(findings[0].src_ip == Ipv4(192, 168, 2, 1));
}

TEST_CASE("nine failures stay below a threshold of ten") {
  std::vector<double> times;
  for (int i = 0; i < 9; ++i) times.push_back(i);
  CHECK(detect::detect_bursts(failures_at(Ipv4(192, 168, 2, 1), times),
                              {60, 10, 50})
            .empty());
}

TEST_CASE("hundred sources of three failures trip only the global rule") {
  std::vector<ErrorLogRecord> errors;
  for (int burst = 0; burst < 3; ++burst)
    for (int ip = 1; ip <= 100; ++ip)
      errors.push_back({Micros(burst * 20 + ip / 10) * kMicrosPerSecond,
                        Ipv4(192, 168, 2, std::uint8_t(ip)), 40000, "dave"});
  std::sort(errors.begin(), errors.end(),
            [](const ErrorLogRecord& a, const ErrorLogRecord& b) {
              return a.ts < b.ts;
            });
  const auto findings = detect::detect_bursts(errors, {60, 10, 50});
  REQUIRE(findings.size() == 1);
  CHECK(findings[0].kind == FindingKind::DistributedBurst);
}

TEST_CASE("bursts separated by more than the window stay separate") {
  std::vector<double> times;
  for (int i = 0; i < 10; ++i) times.push_back(i);
  for (int i = 0; i < 10; ++i) times.push_back(200 + i);
  const auto findings = detect::detect_bursts(
      failures_at(Ipv4(10, 0, 0, 1), times), {60, 10, 50});
  CHECK(findings.size() == 2);
}

TEST_CASE("oracle equivalence on randomized traces") {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 60; ++trial) {
    const auto errors = random_trace(rng, 800);
    DetectorConfig cfg;
    cfg.window_s = double(1 + rng() % 90);
    cfg.per_ip_threshold = int(2 + rng() % 12);
    cfg.global_threshold = int(5 + rng() % 40);
    CHECK(oracles::findings_equal(
        detect::detect_bursts(errors, cfg),
        oracles::detect_bursts_oracle(errors, cfg)));
  }
}

TEST_CASE("raising the per-ip threshold never adds findings") {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 30; ++trial) {
    const auto errors = random_trace(rng, 600);
    DetectorConfig cfg{60, 3, 1'000'000};
    std::size_t previous = std::size_t(-1);
    for (int threshold = 3; threshold <= 30; threshold += 3) {
      cfg.per_ip_threshold = threshold;
      std::size_t singles = 0;
      for (const auto& f : detect::detect_bursts(errors, cfg))
        if (f.kind == FindingKind::SingleSourceBurst) ++singles;
      CHECK(singles <= previous);
      previous = singles;
    }
  }
}

TEST_CASE("access line parses back to the rendered fields") {
  const std::string line =
      "192.168.2.5 - - [01/Jan/1970:00:00:00 +0000] \"GET /index.php "
      "HTTP/1.1\" 200 1043 \"-\" \"Mozilla/5.0\"";
  const auto rec = detect::parse_access_line(line);
  REQUIRE(rec.has_value());
  CHECK(rec->ip == Ipv4(192, 168, 2, 5));
  CHECK(rec->path == "/index.php");
  CHECK(rec->status == 200);
  CHECK(rec->bytes == 1043);
  CHECK(rec->user_agent == "Mozilla/5.0");
}

TEST_CASE("truncated lines are isolated, later lines still parse") {
  std::istringstream access(
      "192.168.2.5 - - [01/Jan/1970:00:00:00 +0000] \"GET /index.php "
      "HTTP/1.1\" 200\n"
      "192.168.2.6 - - [01/Jan/1970:00:00:05 +0000] \"GET /login.php "
      "HTTP/1.1\" 200 512 \"-\" \"UA\"\n");
  std::istringstream error("");
  const auto logs = detect::parse_logs(access, error);
  REQUIRE(logs.issues.size() == 1);
  CHECK(logs.issues[0].line == 1);
  CHECK(logs.issues[0].column > 0);
  REQUIRE(logs.access.size() == 1);
  CHECK(logs.access[0].ip == Ipv4(192, 168, 2, 6));
}

TEST_CASE("error line round-trips") {
  const std::string line =
      "[Thu Jan 01 00:02:03.004500 1970] [auth:error] [pid 1000] [client "
      "192.168.2.9:40123] user mallory: authentication failure for "
      "\"/login.php\"";
  const auto rec = detect::parse_error_line(line);
  REQUIRE(rec.has_value());
  CHECK(rec->ip == Ipv4(192, 168, 2, 9));
  CHECK(rec->port == 40123);
  CHECK(rec->username == "mallory");
  CHECK(rec->ts == 123 * kMicrosPerSecond + 4500);
}

TEST_CASE("statistics partition the request total") {
  std::vector<detect::AccessLogRecord> access;
  for (int i = 0; i < 30; ++i) {
    detect::AccessLogRecord rec;
    rec.ip = Ipv4(10, 0, 0, std::uint8_t(1 + i % 3));
    rec.ts = Micros(i) * kMicrosPerSecond;
    rec.status = 200;
    access.push_back(rec);
  }
  const auto report = detect::statistics(access, {});
  CHECK(report.total_requests == 30);
  std::size_t sum = 0;
  for (const auto& s : report.per_ip) sum += s.requests;
  CHECK(sum == 30);
  std::size_t buckets = 0;
  for (const auto& [_, n] : report.rps_histogram) buckets += n;
  CHECK(buckets == 30);
}

TEST_CASE("scoring definitions") {
  const DetectorConfig cfg{60, 10, 50};
  const Ipv4 attacker(192, 168, 2, 1);
  std::vector<double> times;
  for (int i = 0; i < 12; ++i) times.push_back(100 + i);
  const auto errors = failures_at(attacker, times);
  std::vector<detect::TruthRecord> truth;
  for (const auto& rec : errors)
    truth.push_back({rec.ts, rec.ip, true, "dave"});

  SUBCASE("findings covering the attack score perfectly") {
    const auto findings = detect::detect_bursts(errors, cfg);
    REQUIRE(!findings.empty());
    const auto report = detect::score(findings, truth, errors, cfg);
    CHECK(report.precision == 1.0);
    CHECK(report.recall == 1.0);
    CHECK(report.false_negatives == 0);
  }
  SUBCASE("no findings on an attacked run is a miss") {
    const auto report = detect::score({}, truth, errors, cfg);
    CHECK(report.recall == 0.0);
    CHECK(report.false_negatives == 1);
  }
  SUBCASE("a finding on a benign-only run is a false positive") {
    detect::DetectionFinding phantom;
    phantom.src_ip = attacker;
    phantom.window_start = 0;
    phantom.window_end = 10 * kMicrosPerSecond;
    phantom.failure_count = 10;
    const auto report = detect::score({phantom}, {}, {}, cfg);
    CHECK(report.false_positives == 1);
    CHECK(report.precision == 0.0);
  }
}

TEST_CASE("findings csv carries the documented header") {
  const auto csv = detect::findings_csv({});
  CHECK(csv == "kind,src_ip,window_start_us,window_end_us,failure_count\n");
}
