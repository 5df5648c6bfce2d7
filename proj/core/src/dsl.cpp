#include "range/dsl.hpp"

#include <algorithm>
#include <cctype>
#include <set>

#include <json.hpp>

namespace range::dsl {

using Json = nlohmann::ordered_json;

namespace {

// The listings are printed with trailing commas; strict JSON is produced by
// dropping any comma whose next non-whitespace character closes a scope.
std::string strip_trailing_commas(const std::string& text) {
  std::string out;
  out.reserve(text.size());
  bool in_string = false;
  bool escaped = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (in_string) {
      out += c;
      if (escaped) escaped = false;
      else if (c == '\\') escaped = true;
      else if (c == '"') in_string = false;
      continue;
    }
    if (c == '"') {
      in_string = true;
      out += c;
      continue;
    }
    if (c == ',') {
      std::size_t j = i + 1;
      while (j < text.size() && std::isspace(std::uint8_t(text[j]))) ++j;
      if (j < text.size() && (text[j] == '}' || text[j] == ']')) continue;
    }
    out += c;
  }
  return out;
}

Json parse_document(const std::string& text) {
  try {
    return Json::parse(strip_trailing_commas(text));
  } catch (const Json::parse_error& e) {
    throw SyntaxError(e.what());
  }
}

const Json& require(const Json& obj, const std::string& path,
                    const char* key) {
  if (!obj.is_object())
    throw SchemaError(path, "expected an object");
  const auto it = obj.find(key);
  if (it == obj.end())
    throw SchemaError(path + "." + key, "missing required key");
  return *it;
}

std::string require_string(const Json& obj, const std::string& path,
                           const char* key) {
  const Json& v = require(obj, path, key);
  if (!v.is_string())
    throw SchemaError(path + "." + key, "expected a string");
  return v.get<std::string>();
}

std::vector<std::string> require_string_list(const Json& obj,
                                             const std::string& path,
                                             const char* key) {
  const Json& v = require(obj, path, key);
  if (!v.is_array())
    throw SchemaError(path + "." + key, "expected a list");
  std::vector<std::string> out;
  for (const auto& item : v) {
    if (!item.is_string())
      throw SchemaError(path + "." + key, "expected strings only");
    out.push_back(item.get<std::string>());
  }
  return out;
}

// Collects keys of obj not listed in known, as raw canonical JSON, with an
// optional scope prefix so extras from nested objects stay separable.
void collect_extras(const Json& obj, const std::set<std::string>& known,
                    ExtraKeys& out, const std::string& prefix = "") {
  for (const auto& [key, value] : obj.items())
    if (!known.contains(key)) out[prefix + key] = value.dump();
}

void emit_extras(Json& obj, const ExtraKeys& extra,
                 const std::string& prefix = "") {
  for (const auto& [key, raw] : extra) {
    if (!key.starts_with(prefix)) continue;
    const std::string local = key.substr(prefix.size());
    if (local.find('.') != std::string::npos) continue;  // deeper scope
    obj[local] = Json::parse(raw);
  }
}

TeamSpec parse_team(const Json& j, const std::string& path,
                    bool with_infrastructure) {
  TeamSpec team;
  team.platform = require_string(j, path, "platform");
  team.tools = require_string_list(j, path, "tools");
  team.addresses = IpSet{require_string(j, path, "ip")};
  std::set<std::string> known = {"platform", "tools", "ip"};
  if (with_infrastructure) {
    known.insert("infrastructure");
    const Json& infra = require(j, path, "infrastructure");
    const std::string ipath = path + ".infrastructure";
    InfrastructureSpec spec;
    spec.name = require_string(infra, ipath, "name");
    spec.goal = require_string(infra, ipath, "goal");
    spec.tools = require_string_list(infra, ipath, "tools");
    spec.sources = require_string_list(infra, ipath, "sources");
    if (spec.sources.empty())
      throw SchemaError(ipath + ".sources", "must be non-empty");
    collect_extras(infra, {"name", "goal", "tools", "sources"}, spec.extra);
    team.infrastructure = std::move(spec);
  }
  collect_extras(j, known, team.extra);
  return team;
}

}  // namespace

bool bloom_goal_known(const std::string& goal) {
  static const std::set<std::string> levels = {
      "remember", "understand", "apply", "analyze", "evaluate", "create"};
  return levels.contains(goal);
}

TrainingDescription parse_training(const std::string& text) {
  const Json doc = parse_document(text);
  const Json& training = require(doc, "training", "training");
  const Json& desc = require(training, "training", "description");
  const std::string path = "training.description";

  TrainingDescription t;
  t.name = require_string(desc, path, "name");
  t.goal = require_string(desc, path, "goal");
  t.scoring = require_string(desc, path, "scoring");
  t.environment = require_string(desc, path, "environment");
  if (t.name.empty()) throw SchemaError(path + ".name", "must be non-empty");

  const Json& scenarios = require(desc, path, "scenarios");
  if (!scenarios.is_array() || scenarios.empty())
    throw SchemaError(path + ".scenarios", "must be a non-empty list");
  for (std::size_t i = 0; i < scenarios.size(); ++i) {
    const std::string spath = path + ".scenarios[" + std::to_string(i) + "]";
    const Json& s = scenarios[i];
    ScenarioSpec spec;
    spec.scenario = require_string(s, spath, "scenario");
    spec.tool = require_string(s, spath, "tool");
    spec.goal = require_string(s, spath, "goal");
    if (spec.scenario.empty() || spec.tool.empty() || spec.goal.empty())
      throw SchemaError(spath, "scenario, tool, and goal must be non-empty");
    collect_extras(s, {"scenario", "tool", "goal"}, spec.extra);
    t.scenarios.push_back(std::move(spec));
  }
  collect_extras(desc, {"name", "goal", "scoring", "environment", "scenarios"},
                 t.extra);
  collect_extras(training, {"description"}, t.extra, "training.");
  collect_extras(doc, {"training"}, t.extra, "$.");
  return t;
}

EnvironmentDescription parse_environment(const std::string& text) {
  const Json doc = parse_document(text);
  const Json& training = require(doc, "training", "training");
  const Json& desc = require(training, "training", "description");
  const Json& env = require(training, "training", "environment");
  const std::string dpath = "training.description";
  const std::string epath = "training.environment";

  EnvironmentDescription e;
  e.name = require_string(desc, dpath, "name");
  const Json& count = require(desc, dpath, "scenarios");
  if (count.is_number_integer()) {
    e.scenario_count = count.get<int>();
  } else if (count.is_string()) {
    try {
      e.scenario_count = std::stoi(count.get<std::string>());
    } catch (const std::exception&) {
      throw SchemaError(dpath + ".scenarios", "expected a count");
    }
  } else {
    throw SchemaError(dpath + ".scenarios", "expected a count");
  }
  if (e.scenario_count < 1)
    throw SchemaError(dpath + ".scenarios", "must be at least 1");

  e.blue = parse_team(require(env, epath, "blueteam"), epath + ".blueteam",
                      /*with_infrastructure=*/true);
  e.red = parse_team(require(env, epath, "redteam"), epath + ".redteam",
                     /*with_infrastructure=*/false);
  e.yellow = parse_team(require(env, epath, "yellowteam"),
                        epath + ".yellowteam",
                        /*with_infrastructure=*/false);

  collect_extras(desc, {"name", "scenarios"}, e.extra);
  collect_extras(env, {"blueteam", "redteam", "yellowteam"}, e.extra,
                 "environment.");
  collect_extras(training, {"description", "environment"}, e.extra,
                 "training.");
  collect_extras(doc, {"training"}, e.extra, "$.");
  return e;
}

namespace {

Json team_json(const TeamSpec& team) {
  Json j = Json::object();
  j["platform"] = team.platform;
  j["tools"] = team.tools;
  j["ip"] = team.addresses.text;
  if (team.infrastructure) {
    Json infra = Json::object();
    infra["name"] = team.infrastructure->name;
    infra["goal"] = team.infrastructure->goal;
    infra["tools"] = team.infrastructure->tools;
    infra["sources"] = team.infrastructure->sources;
    emit_extras(infra, team.infrastructure->extra);
    j["infrastructure"] = std::move(infra);
  }
  emit_extras(j, team.extra);
  return j;
}

}  // namespace

std::string serialize(const TrainingDescription& t) {
  Json desc = Json::object();
  desc["name"] = t.name;
  desc["goal"] = t.goal;
  desc["scoring"] = t.scoring;
  desc["environment"] = t.environment;
  Json scenarios = Json::array();
  for (const auto& s : t.scenarios) {
    Json j = Json::object();
    j["scenario"] = s.scenario;
    j["tool"] = s.tool;
    j["goal"] = s.goal;
    emit_extras(j, s.extra);
    scenarios.push_back(std::move(j));
  }
  desc["scenarios"] = std::move(scenarios);
  emit_extras(desc, t.extra);
  Json training = Json::object();
  training["description"] = std::move(desc);
  emit_extras(training, t.extra, "training.");
  Json doc = Json::object();
  doc["training"] = std::move(training);
  emit_extras(doc, t.extra, "$.");
  return doc.dump(2) + "\n";
}

std::string serialize(const EnvironmentDescription& e) {
  Json desc = Json::object();
  desc["name"] = e.name;
  desc["scenarios"] = std::to_string(e.scenario_count);
  emit_extras(desc, e.extra);
  Json env = Json::object();
  env["blueteam"] = team_json(e.blue);
  env["redteam"] = team_json(e.red);
  env["yellowteam"] = team_json(e.yellow);
  emit_extras(env, e.extra, "environment.");
  Json training = Json::object();
  training["description"] = std::move(desc);
  training["environment"] = std::move(env);
  emit_extras(training, e.extra, "training.");
  Json doc = Json::object();
  doc["training"] = std::move(training);
  emit_extras(doc, e.extra, "$.");
  return doc.dump(2) + "\n";
}

std::string render(const Violation& v) {
  return std::string(v.severity == Severity::Error ? "ERROR " : "WARNING ") +
         v.path + ": " + v.message;
}

bool has_errors(const std::vector<Violation>& violations) {
  return std::any_of(violations.begin(), violations.end(),
                     [](const Violation& v) {
                       return v.severity == Severity::Error;
                     });
}

std::vector<Violation> validate(const TrainingDescription& t,
                                const EnvironmentDescription& e) {
  std::vector<Violation> out;
  if (int(t.scenarios.size()) != e.scenario_count)
    out.push_back({Severity::Error, "count-mismatch",
                   "training.description.scenarios",
                   "training lists " + std::to_string(t.scenarios.size()) +
                       " scenarios but the environment declares " +
                       std::to_string(e.scenario_count)});

  if (!bloom_goal_known(t.goal))
    out.push_back({Severity::Error, "unknown-goal",
                   "training.description.goal",
                   "unrecognized Bloom goal \"" + t.goal + "\""});
  for (std::size_t i = 0; i < t.scenarios.size(); ++i) {
    const ScenarioSpec& s = t.scenarios[i];
    const std::string path =
        "training.description.scenarios[" + std::to_string(i) + "]";
    if (!bloom_goal_known(s.goal))
      out.push_back({Severity::Error, "unknown-goal", path + ".goal",
                     "unrecognized Bloom goal \"" + s.goal + "\""});
    if (std::find(e.blue.tools.begin(), e.blue.tools.end(), s.tool) ==
        e.blue.tools.end())
      out.push_back({Severity::Error, "unknown-tool", path + ".tool",
                     "tool \"" + s.tool +
                         "\" is not in the blue team's tool list"});
  }

  const auto check_ips = [&](const TeamSpec& team, const char* name)
      -> std::vector<Ipv4> {
    try {
      return expand_ip_set(team.addresses);
    } catch (const RangeError& err) {
      out.push_back({Severity::Error, "ip-range",
                     std::string("training.environment.") + name + ".ip",
                     err.what()});
      return {};
    }
  };
  check_ips(e.blue, "blueteam");
  const auto red = check_ips(e.red, "redteam");
  const auto yellow = check_ips(e.yellow, "yellowteam");

  std::vector<Ipv4> shared;
  std::set_intersection(red.begin(), red.end(), yellow.begin(), yellow.end(),
                        std::back_inserter(shared));
  if (!shared.empty())
    out.push_back({Severity::Warning, "ip-overlap",
                   "training.environment.redteam.ip",
                   "red and yellow teams share " +
                       std::to_string(shared.size()) + " addresses"});
  return out;
}

CompileError::CompileError(std::vector<Violation> v)
    : std::runtime_error("cannot compile a plan with outstanding violations"),
      violations(std::move(v)) {}

namespace {

std::string strong_password(std::uint64_t seed, int index) {
  static const char alphabet[] =
      "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789";
  std::string pw = "R#";
  std::uint64_t bits = splitmix64(seed ^ splitmix64(0xacc0 + index));
  for (int i = 0; i < 10; ++i) {
    pw += alphabet[bits % 62];
    bits = splitmix64(bits);
  }
  return pw;
}

const std::vector<std::string>& user_agents() {
  static const std::vector<std::string> list = {
      "Mozilla/5.0 (Windows NT 10.0; Win64; x64) AppleWebKit/537.36 (KHTML, "
      "like Gecko) Chrome/114.0.0.0 Safari/537.36",
      "Mozilla/5.0 (Windows NT 10.0; Win64; x64) AppleWebKit/537.36 (KHTML, "
      "like Gecko) Chrome/113.0.0.0 Safari/537.36 Edg/113.0.1774.57",
      "Mozilla/5.0 (Windows NT 10.0; Win64; x64; rv:109.0) Gecko/20100101 "
      "Firefox/114.0",
      "Mozilla/5.0 (Windows NT 10.0; Win64; x64) AppleWebKit/537.36 (KHTML, "
      "like Gecko) Chrome/112.0.0.0 Safari/537.36",
      "Mozilla/5.0 (Windows NT 10.0; WOW64) AppleWebKit/537.36 (KHTML, like "
      "Gecko) Chrome/110.0.0.0 Safari/537.36"};
  return list;
}

}  // namespace

SimulationPlan compile(const TrainingDescription& t,
                       const EnvironmentDescription& e,
                       const RunOverrides& overrides) {
  auto violations = validate(t, e);
  if (has_errors(violations)) throw CompileError(std::move(violations));

  SimulationPlan plan;
  plan.seed = overrides.seed.value_or(1);
  plan.virtual_start = overrides.virtual_start.value_or(0);
  plan.duration_s = overrides.duration_s.value_or(600);
  if (overrides.output_dir) plan.output_dir = *overrides.output_dir;

  const auto blue = expand_ip_set(e.blue.addresses);
  const auto red = expand_ip_set(e.red.addresses);
  const auto yellow = expand_ip_set(e.yellow.addresses);
  plan.web_host = {blue.front(), overrides.web_port.value_or(80)};

  // Default seed set: three accounts with strong passwords plus one whose
  // password sits in the weak list, past the first 16 sample entries so a
  // default-rate attack piles up enough failures to be detectable before
  // it lands.
  std::vector<std::string> weak_pool = traffic::builtin_weak_passwords();
  const auto& sample = traffic::sample_wordlist();
  weak_pool.insert(weak_pool.end(), sample.begin(), sample.end());
  const std::size_t weak_index =
      20 + splitmix64(plan.seed ^ 0x77ea1ULL) % (weak_pool.size() - 20);
  static const char* const strong_users[] = {"alice", "bob", "carol"};
  for (int i = 0; i < 3; ++i) {
    std::string pw = strong_password(plan.seed, i);
    plan.accounts.push_back({strong_users[i], std::move(pw), 0});
  }
  plan.weak_username = "dave";
  plan.accounts.push_back({"dave", weak_pool[weak_index], 0});

  bool ips = false;
  for (const auto& s : t.scenarios)
    if (s.scenario == "IPS") ips = true;
  plan.ips_enabled = overrides.ips_enabled.value_or(ips);
  if (plan.ips_enabled)
    plan.jail = overrides.jail.value_or(ips::JailConfig{});
  else if (overrides.jail)
    plan.jail = overrides.jail;

  if (overrides.attack) {
    plan.attack = *overrides.attack;
  } else {
    plan.attack.mode = traffic::AttackMode::SingleIp;
    plan.attack.source_ips = {red.front()};
    plan.attack.target_username = plan.weak_username;
    plan.attack.wordlist = traffic::builtin_weak_passwords();
    plan.attack.wordlist.insert(plan.attack.wordlist.end(), sample.begin(),
                                sample.end());
    plan.attack.rate = 10.0;
    plan.attack.start_at_s = std::min(60.0, plan.duration_s / 2.0);
    plan.attack.stop_on_success = true;
  }
  if (overrides.extra_wordlist)
    plan.attack.wordlist.insert(plan.attack.wordlist.end(),
                                overrides.extra_wordlist->begin(),
                                overrides.extra_wordlist->end());

  // Benign actors claim addresses from the top of the yellow pool so the
  // default attacker (bottom of the red pool) stays distinguishable even
  // though the listings give both teams the same range.
  const int actors = overrides.benign_actors.value_or(5);
  for (int i = 0; i < actors; ++i) {
    traffic::SessionScript script;
    script.actor_ip = yellow[(yellow.size() - 1 - std::size_t(i) % yellow.size())];
    script.user_agent = user_agents()[std::size_t(i) % user_agents().size()];
    script.jitter_fraction = 0.2;
    if (i % 5 == 4) {
      script.steps = {{"/index.php", webapp::Method::Get, {}, 9},
                      {"/register.php", webapp::Method::Get, {}, 6},
                      {"/index.php", webapp::Method::Get, {}, 10}};
    } else {
      const auto& acct = plan.accounts[std::size_t(i) % plan.accounts.size()];
      script.steps = {{"/index.php", webapp::Method::Get, {}, 5},
                      {"/login.php", webapp::Method::Get, {}, 4},
                      {"/login.php",
                       webapp::Method::Post,
                       {{"username", acct.username},
                        {"password", acct.password}},
                       6},
                      {"/index.php", webapp::Method::Get, {}, 8},
                      {"/logout.php", webapp::Method::Get, {}, 7}};
    }
    double cycle = 0;
    for (const auto& step : script.steps) cycle += step.dwell_s;
    script.repeat = std::max(
        1, int(plan.duration_s / (cycle * (1.0 + script.jitter_fraction))));
    plan.benign_sessions.push_back(std::move(script));
  }
  return plan;
}

}  // namespace range::dsl
