#pragma once

#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "range/net.hpp"
#include "range/webapp.hpp"

namespace range::traffic {

enum class Label { Benign, Attack };

struct SessionStep {
  std::string path;
  webapp::Method method = webapp::Method::Get;
  std::map<std::string, std::string> form;
  double dwell_s = 5.0;  // gap after the step
};

struct SessionScript {
  Ipv4 actor_ip;
  std::string user_agent;
  std::vector<SessionStep> steps;
  int repeat = 1;
  double jitter_fraction = 0.0;  // in [0, 1)
};

enum class AttackMode { SingleIp, Distributed };

struct AttackSpec {
  AttackMode mode = AttackMode::SingleIp;
  std::vector<Ipv4> source_ips;
  std::string target_username;
  std::vector<std::string> wordlist;
  double rate = 10.0;  // attempts per second
  double start_at_s = 0.0;
  bool stop_on_success = true;
};

struct Event {
  Micros ts = 0;
  webapp::HttpRequest request;
  Label label = Label::Benign;
  std::uint32_t actor = 0;
  std::uint64_t seq = 0;
};

struct EventStream {
  std::vector<Event> events;
};

struct HorizonError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// One stream per script, actors numbered by position starting at first_actor.
// Gaps are dwell * (1 + u), u uniform in [-jitter, +jitter] from the seed.
// Throws HorizonError if one repetition of a script cannot fit the horizon.
EventStream replay_sessions(const std::vector<SessionScript>& scripts,
                            Endpoint web_host, std::uint64_t seed,
                            double horizon_s, std::uint32_t first_actor = 0);

using CredentialCheck =
    std::function<bool(const std::string& user, const std::string& password)>;

// One login POST per wordlist entry, 1/rate apart, sources round-robin.
EventStream brute_force(const AttackSpec& attack, Endpoint web_host,
                        const CredentialCheck& oracle,
                        std::uint32_t actor_id);

// Stable merge by (ts, actor, seq); inputs must be internally ordered.
EventStream merge(const std::vector<EventStream>& streams);

// The four weak guesses every default wordlist starts with.
const std::vector<std::string>& builtin_weak_passwords();

// A 200-entry desk-scale sample in rockyou style.
const std::vector<std::string>& sample_wordlist();

// One password per line; '#' comments and blank lines skipped.
std::vector<std::string> load_wordlist(const std::string& path);

}  // namespace range::traffic
