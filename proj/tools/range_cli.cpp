// Command-line front end for the three-scenario training pipeline:
// `validate` checks a training/environment description pair, `run` executes
// a compiled plan and writes the evidence artifacts, `analyze` runs the
// blue-team log analysis against a finished run.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "range/detect.hpp"
#include "range/dsl.hpp"
#include "range/pipeline.hpp"

namespace fs = std::filesystem;
using namespace range;

namespace {

constexpr int kExitViolations = 1;
constexpr int kExitIo = 2;
constexpr int kExitInternal = 3;

std::optional<std::string> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

struct Descriptions {
  dsl::TrainingDescription training;
  dsl::EnvironmentDescription environment;
};

// Loads and parses both documents; exits with kExitIo on any failure.
Descriptions load_descriptions(const std::string& training_path,
                               const std::string& environment_path) {
  const auto training_text = read_file(training_path);
  if (!training_text) {
    std::cerr << "error: cannot read " << training_path << "\n";
    std::exit(kExitIo);
  }
  const auto environment_text = read_file(environment_path);
  if (!environment_text) {
    std::cerr << "error: cannot read " << environment_path << "\n";
    std::exit(kExitIo);
  }
  try {
    return {dsl::parse_training(*training_text),
            dsl::parse_environment(*environment_text)};
  } catch (const dsl::SchemaError& e) {
    std::cerr << "schema error: " << e.what() << "\n";
    std::exit(kExitIo);
  } catch (const dsl::SyntaxError& e) {
    std::cerr << "syntax error: " << e.what() << "\n";
    std::exit(kExitIo);
  }
}

std::string default_output_dir() {
  if (const char* env = std::getenv("RANGE_OUT"); env && *env) return env;
  return "./range-out";
}

int cmd_validate(const std::string& training_path,
                 const std::string& environment_path) {
  const auto [training, environment] =
      load_descriptions(training_path, environment_path);
  const auto violations = dsl::validate(training, environment);
  for (const auto& v : violations) std::cout << dsl::render(v) << "\n";
  if (dsl::has_errors(violations)) return kExitViolations;
  std::cout << "OK: " << training.name << " (" << training.scenarios.size()
            << " scenarios)\n";
  return 0;
}

struct RunOptions {
  std::string training_path;
  std::string environment_path;
  std::uint64_t seed = 1;
  double duration_s = 600;
  std::string ips = "auto";  // on|off|auto
  std::string out_dir;
  std::string wordlist_path;
  bool distributed = false;
};

int cmd_run(const RunOptions& opt) {
  const auto [training, environment] =
      load_descriptions(opt.training_path, opt.environment_path);
  const auto violations = dsl::validate(training, environment);
  for (const auto& v : violations) std::cout << dsl::render(v) << "\n";
  if (dsl::has_errors(violations)) return kExitViolations;

  dsl::RunOverrides overrides;
  overrides.seed = opt.seed;
  overrides.duration_s = opt.duration_s;
  overrides.output_dir = opt.out_dir;
  if (opt.ips == "on") overrides.ips_enabled = true;
  if (opt.ips == "off") overrides.ips_enabled = false;
  if (!opt.wordlist_path.empty()) {
    try {
      overrides.extra_wordlist = traffic::load_wordlist(opt.wordlist_path);
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << "\n";
      return kExitIo;
    }
  }

  // A jail file staged in the output directory beforehand wins over the
  // engine defaults, as with the real tool.
  for (const char* name : {"jail.local", "local.jail"}) {
    const fs::path jail_path = fs::path(opt.out_dir) / "etc/fail2ban" / name;
    if (!fs::exists(jail_path)) continue;
    try {
      const auto jails = ips::parse_jail(*read_file(jail_path.string()));
      if (const auto it = jails.find("webapp-auth"); it != jails.end())
        overrides.jail = it->second;
    } catch (const ips::ConfigError& e) {
      std::cerr << "error: " << jail_path.string() << ": " << e.what() << "\n";
      return kExitIo;
    }
    break;
  }

  try {
    auto plan = dsl::compile(training, environment, overrides);
    if (opt.distributed) {
      plan.attack.mode = traffic::AttackMode::Distributed;
      plan.attack.source_ips = expand_ip_set(environment.red.addresses);
    }
    const auto result = pipeline::simulate(plan);
    const auto manifest = pipeline::write_artifacts(plan, result);

    std::cout << "run complete: " << result.delivered.size()
              << " exchanges, " << result.dropped.size() << " dropped, "
              << result.bans.size() << " bans\n";
    std::cout << "attacker " << (result.attacker_succeeded ? "succeeded"
                                                           : "did not succeed")
              << "\n";
    std::cout << "plan digest " << manifest.plan_digest << ", artifacts in "
              << plan.output_dir << "\n";
    return 0;
  } catch (const dsl::CompileError& e) {
    for (const auto& v : e.violations) std::cerr << dsl::render(v) << "\n";
    return kExitViolations;
  } catch (const std::runtime_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::logic_error& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kExitInternal;
  }
}

int cmd_analyze(const std::string& run_dir, const detect::DetectorConfig& cfg) {
  pipeline::RunManifest manifest;
  try {
    manifest = pipeline::load_manifest(run_dir);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  }
  std::ifstream access(manifest.access_log);
  std::ifstream error(manifest.error_log);
  std::ifstream truth_in(manifest.ground_truth);
  if (!access || !error || !truth_in) {
    std::cerr << "error: run artifacts missing under " << run_dir << "\n";
    return kExitIo;
  }

  const auto logs = detect::parse_logs(access, error);
  for (const auto& issue : logs.issues)
    std::cout << "parse error at line " << issue.line << " column "
              << issue.column << ": " << issue.message << "\n";

  const auto report = detect::statistics(logs.access, logs.errors);
  std::cout << detect::render_table(report);

  const auto findings = detect::detect_bursts(logs.errors, cfg);
  std::cout << "thresholds: window " << cfg.window_s << "s, per-ip "
            << cfg.per_ip_threshold << ", global " << cfg.global_threshold
            << "\n";
  std::cout << "findings: " << findings.size() << "\n";
  for (const auto& f : findings)
    std::cout << "  "
              << (f.kind == detect::FindingKind::SingleSourceBurst
                      ? "single-source burst from " + to_string(f.src_ip)
                      : "distributed burst")
              << ": " << f.failure_count << " failures, "
              << f.distinct_usernames << " usernames, window ["
              << f.window_start << ", " << f.window_end << "] us\n";

  const auto truth = detect::load_ground_truth(truth_in);
  const auto scores = detect::score(findings, truth, logs.errors, cfg);
  std::cout << "score: tp " << scores.true_positives << ", fp "
            << scores.false_positives << ", fn " << scores.false_negatives
            << ", precision " << scores.precision << ", recall "
            << scores.recall << "\n";

  const fs::path findings_path = fs::path(run_dir) / "findings.csv";
  std::ofstream out(findings_path);
  out << detect::findings_csv(findings);
  manifest.findings = findings_path.string();
  pipeline::save_manifest(run_dir, manifest);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"cyber-range brute-force training scenario engine"};
  app.require_subcommand(1);

  std::string training_path, environment_path, run_dir;
  RunOptions run_opt;
  detect::DetectorConfig cfg;

  auto* validate = app.add_subcommand(
      "validate", "check a training/environment description pair");
  validate->add_option("training", training_path)->required();
  validate->add_option("environment", environment_path)->required();

  auto* run = app.add_subcommand("run", "execute a scenario run");
  run->add_option("training", run_opt.training_path)->required();
  run->add_option("environment", run_opt.environment_path)->required();
  run->add_option("--seed", run_opt.seed, "run seed");
  run->add_option("--duration", run_opt.duration_s, "virtual seconds");
  run->add_option("--ips", run_opt.ips, "on|off|auto")
      ->check(CLI::IsMember({"on", "off", "auto"}));
  run->add_option("--out", run_opt.out_dir, "output directory");
  run->add_option("--wordlist", run_opt.wordlist_path,
                  "extra passwords, one per line");
  run->add_flag("--distributed", run_opt.distributed,
                "rotate the attack over the whole red-team pool");

  auto* analyze = app.add_subcommand("analyze", "detect and score bursts");
  analyze->add_option("run_dir", run_dir)->required();
  analyze->add_option("--window", cfg.window_s, "window seconds");
  analyze->add_option("--per-ip", cfg.per_ip_threshold,
                      "per-source failure threshold");
  analyze->add_option("--global", cfg.global_threshold,
                      "pooled failure threshold");

  CLI11_PARSE(app, argc, argv);

  if (run_opt.out_dir.empty()) run_opt.out_dir = default_output_dir();
  if (validate->parsed()) return cmd_validate(training_path, environment_path);
  if (run->parsed()) return cmd_run(run_opt);
  return cmd_analyze(run_dir, cfg);
}
