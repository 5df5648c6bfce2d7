#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <fstream>
#include <sstream>

#include "range/dsl.hpp"

using namespace range;

namespace {

std::string read_fixture(const std::string& name) {
  std::ifstream in(std::string(FIXTURE_DIR) + "/" + name);
  REQUIRE(in);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace

TEST_CASE("training listing parses verbatim") {
  const auto t = dsl::parse_training(read_fixture("training.json"));
  CHECK(t.name == "Brute-Force AuthN");
  CHECK(t.goal == "analyze");
  CHECK(t.scoring == "none");
  CHECK(t.environment == "cyber range");
  REQUIRE(t.scenarios.size() == 3);
  CHECK(t.scenarios[0].scenario == "network traffic");
  CHECK(t.scenarios[0].tool == "Wireshark");
  CHECK(t.scenarios[0].goal == "understand");
  CHECK(t.scenarios[1].scenario == "logging");
  CHECK(t.scenarios[1].tool == "log files");
  CHECK(t.scenarios[1].goal == "apply");
  CHECK(t.scenarios[2].scenario == "IPS");
  CHECK(t.scenarios[2].tool == "Fail2Ban");
  CHECK(t.scenarios[2].goal == "analyze");
}

TEST_CASE("environment listing parses verbatim") {
  const auto e = dsl::parse_environment(read_fixture("environment.json"));
  CHECK(e.name == "Brute-Force AuthN");
  CHECK(e.scenario_count == 3);
  CHECK(e.blue.platform == "Kali Linux");
  CHECK(e.blue.tools ==
        std::vector<std::string>{"Wireshark", "log files", "Fail2Ban"});
  CHECK(e.blue.addresses.text == "192.168.1.10");
  REQUIRE(e.blue.infrastructure.has_value());
  CHECK(e.blue.infrastructure->name == "WebApp");
  const auto& sources = e.blue.infrastructure->sources;
  CHECK(std::find(sources.begin(), sources.end(), "/var/log/*") !=
        sources.end());
  CHECK(std::find(sources.begin(), sources.end(),
                  "/etc/fail2ban/jail.local") != sources.end());
  CHECK(e.red.addresses.text == "192.168.2.1-100");
  CHECK(e.yellow.platform == "Windows 11");
  CHECK(e.yellow.addresses.text == "192.168.2.1-100");
  CHECK(!e.red.infrastructure.has_value());
}

TEST_CASE("empty scenario list is a schema error") {
  const std::string doc = R"({"training": {"description": {
    "name": "x", "goal": "apply", "scoring": "none",
    "environment": "cyber range", "scenarios": []}}})";
  CHECK_THROWS_WITH_AS(dsl::parse_training(doc),
                       "training.description.scenarios: must be a non-empty "
                       "list",
                       dsl::SchemaError);
}

TEST_CASE("missing redteam names its path") {
  const std::string doc = R"({"training": {
    "description": {"name": "x", "scenarios": "1"},
    "environment": {
      "blueteam": {"platform": "p", "tools": [], "ip": "10.0.0.1",
        "infrastructure": {"name": "n", "goal": "g", "tools": [],
          "sources": ["/var/log/x"]}},
      "yellowteam": {"platform": "p", "tools": [], "ip": "10.0.0.2"}}}})";
  try {
    dsl::parse_environment(doc);
    FAIL("expected SchemaError");
  } catch (const dsl::SchemaError& e) {
    CHECK(e.path == "training.environment.redteam");
  }
}

TEST_CASE("malformed document is a syntax error") {
  CHECK_THROWS_AS(dsl::parse_training("{\"training\": "),
                  dsl::SyntaxError);
}

TEST_CASE("round-trip identity on both listings") {
  const auto t = dsl::parse_training(read_fixture("training.json"));
  CHECK(dsl::parse_training(dsl::serialize(t)) == t);
  const auto e = dsl::parse_environment(read_fixture("environment.json"));
  CHECK(dsl::parse_environment(dsl::serialize(e)) == e);
}

TEST_CASE("unknown keys survive a round trip") {
  const std::string doc = R"({"training": {"description": {
    "name": "x", "goal": "apply", "scoring": "none",
    "environment": "cyber range", "difficulty": "easy",
    "scenarios": [{"scenario": "s", "tool": "Wireshark", "goal": "apply",
                   "hints": ["try filters"]}]},
    "provisioning": "vagrant"}})";
  const auto t = dsl::parse_training(doc);
  CHECK(t.extra.contains("difficulty"));
  CHECK(t.extra.contains("training.provisioning"));
  CHECK(t.scenarios[0].extra.contains("hints"));
  const std::string again = dsl::serialize(t);
  CHECK(again.find("difficulty") != std::string::npos);
  CHECK(again.find("provisioning") != std::string::npos);
  CHECK(dsl::parse_training(again) == t);
}

TEST_CASE("ip set expansion") {
  const auto range100 = expand_ip_set(IpSet{"192.168.2.1-100"});
  REQUIRE(range100.size() == 100);
  CHECK(to_string(range100.front()) == "192.168.2.1");
  CHECK(to_string(range100.back()) == "192.168.2.100");
  for (std::size_t i = 1; i < range100.size(); ++i)
    CHECK(range100[i - 1].value + 1 == range100[i].value);

  CHECK(expand_ip_set(IpSet{"192.168.1.10"}) ==
        std::vector<Ipv4>{Ipv4(192, 168, 1, 10)});
  CHECK(expand_ip_set(IpSet{"10.0.0.5-5"}) ==
        std::vector<Ipv4>{Ipv4(10, 0, 0, 5)});

  CHECK_THROWS_AS(expand_ip_set(IpSet{"10.0.0.9-5"}), RangeError);
  CHECK_THROWS_AS(expand_ip_set(IpSet{"10.0.0.1-300"}), RangeError);
  CHECK_THROWS_AS(expand_ip_set(IpSet{"10.0.0.256"}), RangeError);
}

TEST_CASE("expansion cardinality law") {
  for (int start = 0; start <= 255; start += 17) {
    for (int last = start; last <= 255; last += 23) {
      const IpSet s{"10.1.2." + std::to_string(start) + "-" +
                    std::to_string(last)};
      CHECK(int(expand_ip_set(s).size()) == last - start + 1);
    }
  }
}

TEST_CASE("listings validate cleanly apart from the shared-pool warning") {
  const auto t = dsl::parse_training(read_fixture("training.json"));
  const auto e = dsl::parse_environment(read_fixture("environment.json"));
  const auto violations = dsl::validate(t, e);
  CHECK(!dsl::has_errors(violations));
  // The paper assigns red and yellow the same range; that is worth a
  // warning but must not block the listings.
  REQUIRE(violations.size() == 1);
  CHECK(violations[0].kind == "ip-overlap");
  CHECK(violations[0].severity == dsl::Severity::Warning);
}

TEST_CASE("scenario count mismatch is one violation") {
  const auto t = dsl::parse_training(read_fixture("training.json"));
  auto e = dsl::parse_environment(read_fixture("environment.json"));
  e.scenario_count = 2;
  const auto violations = dsl::validate(t, e);
  REQUIRE(dsl::has_errors(violations));
  int count_mismatches = 0;
  for (const auto& v : violations)
    if (v.kind == "count-mismatch") ++count_mismatches;
  CHECK(count_mismatches == 1);
}

TEST_CASE("unknown tool points at the scenario") {
  auto t = dsl::parse_training(read_fixture("training.json"));
  const auto e = dsl::parse_environment(read_fixture("environment.json"));
  t.scenarios[1].tool = "Snort";
  const auto violations = dsl::validate(t, e);
  REQUIRE(dsl::has_errors(violations));
  bool found = false;
  for (const auto& v : violations)
    if (v.kind == "unknown-tool") {
      found = true;
      CHECK(v.path == "training.description.scenarios[1].tool");
    }
  CHECK(found);
}

TEST_CASE("violations render one per line") {
  dsl::Violation v{dsl::Severity::Error, "count-mismatch", "a.b.c", "boom"};
  CHECK(dsl::render(v) == "ERROR a.b.c: boom");
  v.severity = dsl::Severity::Warning;
  CHECK(dsl::render(v) == "WARNING a.b.c: boom");
}

TEST_CASE("compile on the listings") {
  const auto t = dsl::parse_training(read_fixture("training.json"));
  const auto e = dsl::parse_environment(read_fixture("environment.json"));
  const auto plan = dsl::compile(t, e);
  CHECK(to_string(plan.web_host.ip) == "192.168.1.10");
  CHECK(plan.web_host.port == 80);
  CHECK(plan.ips_enabled);
  CHECK(plan.seed == 1);
  CHECK(plan.duration_s == 600);
  CHECK(plan.virtual_start == 0);
  CHECK(expand_ip_set(e.red.addresses).size() == 100);
  REQUIRE(plan.accounts.size() == 4);
  CHECK(plan.attack.target_username == plan.weak_username);
  // The weak account must actually be crackable from the default wordlist.
  const auto& weak = plan.accounts.back();
  CHECK(std::find(plan.attack.wordlist.begin(), plan.attack.wordlist.end(),
                  weak.password) != plan.attack.wordlist.end());
}

TEST_CASE("compile is deterministic and honors overrides") {
  const auto t = dsl::parse_training(read_fixture("training.json"));
  const auto e = dsl::parse_environment(read_fixture("environment.json"));
  dsl::RunOverrides overrides;
  overrides.duration_s = 600;
  overrides.seed = 42;
  const auto a = dsl::compile(t, e, overrides);
  const auto b = dsl::compile(t, e, overrides);
  CHECK(a.seed == 42);
  CHECK(a.duration_s == 600);
  CHECK(a.accounts == b.accounts);
  CHECK(a.attack.wordlist == b.attack.wordlist);
  CHECK(a.benign_sessions.size() == b.benign_sessions.size());
}

TEST_CASE("compile refuses inputs with outstanding violations") {
  const auto t = dsl::parse_training(read_fixture("training.json"));
  auto e = dsl::parse_environment(read_fixture("environment.json"));
  e.scenario_count = 7;
  CHECK_THROWS_AS(dsl::compile(t, e), dsl::CompileError);
}
