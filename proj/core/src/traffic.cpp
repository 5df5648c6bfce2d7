#include "range/traffic.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

namespace range::traffic {

namespace {

// Deterministic uniform in [0,1) from a counter-mode splitmix stream.
double uniform01(std::uint64_t seed, std::uint64_t counter) {
  return double(splitmix64(seed ^ splitmix64(counter)) >> 11) * 0x1.0p-53;
}

constexpr std::uint16_t kClientPortBase = 49152;
constexpr std::uint16_t kAttackPortBase = 40000;

}  // namespace

EventStream replay_sessions(const std::vector<SessionScript>& scripts,
                            Endpoint web_host, std::uint64_t seed,
                            double horizon_s, std::uint32_t first_actor) {
  EventStream out;
  for (std::size_t s = 0; s < scripts.size(); ++s) {
    const SessionScript& script = scripts[s];
    double nominal = 0.0;
    for (const auto& step : script.steps) nominal += step.dwell_s;
    if (nominal > horizon_s)
      throw HorizonError("session for " + to_string(script.actor_ip) +
                         " does not fit a " + std::to_string(horizon_s) +
                         "s horizon");
    const std::uint64_t actor_seed = seed ^ splitmix64(0x5e55u + s);
    double at = 0.0;
    std::uint64_t seq = 0;
    for (int rep = 0; rep < script.repeat; ++rep) {
      for (const auto& step : script.steps) {
        if (at >= horizon_s) break;
        Event ev;
        ev.ts = Micros(std::llround(at * kMicrosPerSecond));
        ev.label = Label::Benign;
        ev.actor = first_actor + std::uint32_t(s);
        ev.seq = seq;
        ev.request.ts = ev.ts;
        ev.request.src = {script.actor_ip,
                          std::uint16_t(kClientPortBase + seq % 16000)};
        ev.request.dst = web_host;
        ev.request.method = step.method;
        ev.request.path = step.path;
        ev.request.user_agent = script.user_agent;
        ev.request.form = step.form;
        out.events.push_back(std::move(ev));
        const double u = uniform01(actor_seed, seq);
        at += step.dwell_s * (1.0 + (2.0 * u - 1.0) * script.jitter_fraction);
        ++seq;
      }
    }
  }
  std::stable_sort(out.events.begin(), out.events.end(),
                   [](const Event& a, const Event& b) {
                     return std::tie(a.ts, a.actor, a.seq) <
                            std::tie(b.ts, b.actor, b.seq);
                   });
  return out;
}

EventStream brute_force(const AttackSpec& attack, Endpoint web_host,
                        const CredentialCheck& oracle, std::uint32_t actor_id) {
  EventStream out;
  const std::size_t sources = attack.source_ips.size();
  for (std::size_t i = 0; i < attack.wordlist.size(); ++i) {
    const std::string& guess = attack.wordlist[i];
    Event ev;
    ev.ts = Micros(std::llround(
        (attack.start_at_s + double(i) / attack.rate) * kMicrosPerSecond));
    ev.label = Label::Attack;
    ev.actor = actor_id;
    ev.seq = i;
    ev.request.ts = ev.ts;
    ev.request.src = {attack.source_ips[i % sources],
                      std::uint16_t(kAttackPortBase + i % 16000)};
    ev.request.dst = web_host;
    ev.request.method = webapp::Method::Post;
    ev.request.path = "/login.php";
    ev.request.user_agent =
        "Mozilla/5.0 (X11; Linux x86_64; rv:109.0) Gecko/20100101 "
        "Firefox/115.0";
    ev.request.form = {{"username", attack.target_username},
                       {"password", guess}};
    out.events.push_back(std::move(ev));
    if (attack.stop_on_success && oracle &&
        oracle(attack.target_username, guess))
      break;
  }
  return out;
}

EventStream merge(const std::vector<EventStream>& streams) {
  EventStream out;
  for (const auto& s : streams)
    out.events.insert(out.events.end(), s.events.begin(), s.events.end());
  std::stable_sort(out.events.begin(), out.events.end(),
                   [](const Event& a, const Event& b) {
                     return std::tie(a.ts, a.actor, a.seq) <
                            std::tie(b.ts, b.actor, b.seq);
                   });
  return out;
}

const std::vector<std::string>& builtin_weak_passwords() {
  static const std::vector<std::string> list = {"123456", "test1", "qwerty",
                                                "iloveyou"};
  return list;
}

const std::vector<std::string>& sample_wordlist() {
  static const std::vector<std::string> list = {
      "password",    "123456789",  "12345678",    "12345",       "1234567",
      "princess",    "1234567890", "abc123",      "nicole",      "daniel",
      "babygirl",    "monkey",     "lovely",      "jessica",     "654321",
      "michael",     "ashley",     "football",    "sunshine",    "charlie",
      "password1",   "1q2w3e4r",   "letmein",     "zxcvbnm",     "121212",
      "dragon",      "shadow",     "master",      "superman",    "696969",
      "123123",      "batman",     "trustno1",    "killer",      "hunter",
      "jordan",      "jennifer",   "buster",      "soccer",      "harley",
      "hannah",      "thomas",     "robert",      "tigger",      "ranger",
      "hockey",      "george",     "andrew",      "michelle",    "love",
      "pepper",      "daniel1",    "austin",      "golfer",      "summer",
      "heather",     "hammer",     "yankees",     "joshua",      "maggie",
      "biteme",      "enter",      "ashley1",     "taylor",      "matrix",
      "mustang",     "chelsea",    "diamond",     "secret",      "amanda",
      "ginger",      "freedom",    "jackson",     "computer",    "corvette",
      "cheese",      "samantha",   "merlin",      "orange",      "scooter",
      "peanut",      "johnson",    "phoenix",     "london",      "cookie",
      "bailey",      "banana",     "starwars",    "snoopy",      "whatever",
      "boomer",      "november",   "cowboys",     "ferrari",     "falcon",
      "justin",      "silver",     "anthony",     "jasmine",     "winter",
      "welcome",     "mercedes",   "eagles",      "midnight",    "bigdog",
      "zxcvbn",      "marina",     "dakota",      "player",      "please",
      "smokey",      "chicken",    "maverick",    "chicago",     "rainbow",
      "wizard",      "marlboro",   "asdfgh",      "bandit",      "flower",
      "canada",      "access",     "liverpool",   "purple",      "angela",
      "junior",      "thunder",    "booboo",      "spider",      "lakers",
      "miller",      "rachel",     "monica",      "richard",     "hello",
      "guitar",      "jonathan",   "apples",      "scorpio",     "sarah",
      "testing",     "doctor",     "wilson",      "butterfly",   "gateway",
      "melissa",     "gemini",     "rabbit",      "pokemon",     "forever",
      "william",     "nathan",     "victoria",    "please1",     "internet",
      "knight",      "brandy",     "copper",      "magic",       "compaq",
      "tester",      "asdfasdf",   "mother",      "startrek",    "sierra",
      "eminem",      "genesis",    "school",      "qwert",       "friend",
      "florida",     "redsox",     "passw0rd",    "patrick",     "online",
      "admin123",    "winner",     "samsung",     "monday",      "service",
      "alexander",   "angel1",     "junior1",     "mickey",      "toyota",
      "crystal",     "united",     "turtle",      "tiffany",     "golden",
      "pakistan",    "dennis",     "qazwsx",      "letmein1",    "spring",
      "calvin",      "tigers",     "shannon",     "success",     "veronica",
  };
  return list;
}

std::vector<std::string> load_wordlist(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open wordlist: " + path);
  std::vector<std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    out.push_back(line);
  }
  return out;
}

}  // namespace range::traffic
