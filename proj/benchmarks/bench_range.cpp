#include <benchmark/benchmark.h>

#include <random>
#include <sstream>

#include "range/capture.hpp"
#include "range/detect.hpp"
#include "range/ips.hpp"

using namespace range;

namespace {

std::vector<detect::ErrorLogRecord> make_trace(std::size_t n) {
  std::mt19937_64 rng(1);
  std::vector<detect::ErrorLogRecord> out;
  Micros ts = 0;
  for (std::size_t i = 0; i < n; ++i) {
    ts += Micros(rng() % (2 * std::uint64_t(kMicrosPerSecond)));
    out.push_back({ts, Ipv4(10, 0, 0, std::uint8_t(1 + rng() % 30)), 40000,
                   "dave"});
  }
  return out;
}

void BM_DetectBursts(benchmark::State& state) {
  const auto errors = make_trace(std::size_t(state.range(0)));
  const detect::DetectorConfig cfg;
  for (auto _ : state)
    benchmark::DoNotOptimize(detect::detect_bursts(errors, cfg));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_DetectBursts)->Range(1 << 8, 1 << 14);

void BM_BanEngine(benchmark::State& state) {
  const auto errors = make_trace(std::size_t(state.range(0)));
  for (auto _ : state) {
    ips::BanEngine engine(ips::JailConfig{});
    for (const auto& rec : errors)
      benchmark::DoNotOptimize(engine.observe(rec.ip, rec.ts));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_BanEngine)->Range(1 << 8, 1 << 14);

void BM_PcapWrite(benchmark::State& state) {
  webapp::HttpExchange x;
  x.request.ts = 0;
  x.request.src = {Ipv4(192, 168, 2, 1), 40001};
  x.request.dst = {Ipv4(192, 168, 1, 10), 80};
  x.request.method = webapp::Method::Post;
  x.request.path = "/login.php";
  x.request.user_agent = "UA";
  x.request.form = {{"username", "dave"}, {"password", "123456"}};
  x.status = 200;
  x.response_bytes = 512;
  x.outcome = webapp::Outcome::AuthFailure;
  std::vector<capture::Packet> packets;
  for (std::int64_t i = 0; i < state.range(0); ++i) {
    auto flow = capture::exchange_to_flow(x, 1, std::uint64_t(i));
    packets.insert(packets.end(), flow.begin(), flow.end());
  }
  for (auto _ : state) {
    std::ostringstream out;
    benchmark::DoNotOptimize(capture::write_pcap(packets, out));
  }
  state.SetItemsProcessed(state.iterations() * std::int64_t(packets.size()));
}
BENCHMARK(BM_PcapWrite)->Range(1 << 6, 1 << 10);

}  // namespace

BENCHMARK_MAIN();
