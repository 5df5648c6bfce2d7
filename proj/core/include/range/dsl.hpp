#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "range/ips.hpp"
#include "range/net.hpp"
#include "range/traffic.hpp"
#include "range/webapp.hpp"

namespace range::dsl {

struct SyntaxError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SchemaError : std::runtime_error {
  SchemaError(std::string at, const std::string& message)
      : std::runtime_error(at + ": " + message), path(std::move(at)) {}
  std::string path;
};

// The six Bloom levels; goals outside this set are carried through but
// flagged by validate().
bool bloom_goal_known(const std::string& goal);

// Unknown keys survive parse and re-serialize untouched. Keys are the
// local name within their object, values the raw JSON text.
using ExtraKeys = std::map<std::string, std::string>;

struct ScenarioSpec {
  std::string scenario;
  std::string tool;
  std::string goal;
  ExtraKeys extra;

  bool operator==(const ScenarioSpec&) const = default;
};

struct TrainingDescription {
  std::string name;
  std::string goal;
  std::string scoring;
  std::string environment;
  std::vector<ScenarioSpec> scenarios;
  ExtraKeys extra;

  bool operator==(const TrainingDescription&) const = default;
};

struct InfrastructureSpec {
  std::string name;
  std::string goal;
  std::vector<std::string> tools;
  std::vector<std::string> sources;
  ExtraKeys extra;

  bool operator==(const InfrastructureSpec&) const = default;
};

struct TeamSpec {
  std::string platform;
  std::vector<std::string> tools;
  IpSet addresses;
  std::optional<InfrastructureSpec> infrastructure;
  ExtraKeys extra;

  bool operator==(const TeamSpec&) const = default;
};

struct EnvironmentDescription {
  std::string name;
  int scenario_count = 0;
  TeamSpec blue;
  TeamSpec red;
  TeamSpec yellow;
  ExtraKeys extra;

  bool operator==(const EnvironmentDescription&) const = default;
};

// Wire format is the listings' JSON with trailing commas tolerated.
TrainingDescription parse_training(const std::string& text);
EnvironmentDescription parse_environment(const std::string& text);

// Canonical rendering: 2-space indent, listing key order, extras appended
// to their object.
std::string serialize(const TrainingDescription& t);
std::string serialize(const EnvironmentDescription& e);

enum class Severity { Warning, Error };

struct Violation {
  Severity severity = Severity::Error;
  std::string kind;
  std::string path;
  std::string message;
};

std::string render(const Violation& v);
bool has_errors(const std::vector<Violation>& violations);

std::vector<Violation> validate(const TrainingDescription& t,
                                const EnvironmentDescription& e);

struct CompileError : std::runtime_error {
  explicit CompileError(std::vector<Violation> violations);
  std::vector<Violation> violations;
};

struct RunOverrides {
  std::optional<std::uint64_t> seed;
  std::optional<double> duration_s;
  std::optional<Micros> virtual_start;
  std::optional<std::uint16_t> web_port;
  std::optional<bool> ips_enabled;
  std::optional<std::string> output_dir;
  std::optional<int> benign_actors;
  std::optional<traffic::AttackSpec> attack;
  std::optional<std::vector<std::string>> extra_wordlist;  // appended
  std::optional<ips::JailConfig> jail;
};

struct SimulationPlan {
  std::uint64_t seed = 1;
  Micros virtual_start = 0;
  double duration_s = 600;
  Endpoint web_host;
  std::vector<webapp::UserAccount> accounts;
  std::string weak_username;  // the account whose password the attack can hit
  std::vector<traffic::SessionScript> benign_sessions;
  traffic::AttackSpec attack;
  bool ips_enabled = false;
  std::optional<ips::JailConfig> jail;
  std::string output_dir = "./range-out";
};

// Deterministic plan construction; throws CompileError if validate() finds
// error-severity violations.
SimulationPlan compile(const TrainingDescription& t,
                       const EnvironmentDescription& e,
                       const RunOverrides& overrides = {});

}  // namespace range::dsl
