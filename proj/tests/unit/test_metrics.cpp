#include <doctest.h>

#include <random>

#include <gms/dram.hpp>
#include <gms/metrics.hpp>

#include "oracles/metrics_oracle.hpp"

using namespace gms;

namespace {

// Random traffic through two controllers with four banks each.
std::vector<MemoryRequest> random_log(std::uint64_t seed, std::size_t n) {
  std::mt19937_64 rng(seed);
  const TimingParams t{5, 4, 3, 20, 2, 1.0};
  std::vector<MemoryController> mcs;
  for (std::uint32_t ch = 0; ch < 2; ++ch) mcs.emplace_back(Pool::GDDR, ch, 4, 16, t, Arbitration::FrFcfs, std::nullopt);
  std::vector<MemoryRequest> log;
  std::size_t made = 0;
  for (std::uint64_t c = 0; made < n || mcs[0].size() + mcs[1].size() > 0; ++c) {
    if (made < n && rng() % 3 == 0) {
      MemoryRequest r;
      r.id = made;
      r.channel = static_cast<std::uint32_t>(rng() % 2);
      r.bank = static_cast<std::uint32_t>(rng() % 4);
      r.row = rng() % 3;
      r.is_read = rng() % 4 != 0;
      r.t_created = c;
      if (mcs[r.channel].try_enqueue(r, c)) ++made;
    }
    for (auto& mc : mcs) {
      if (auto r = mc.step(c)) log.push_back(*r);
    }
  }
  return log;
}

std::vector<oracle::Span> spans(const std::vector<MemoryRequest>& log) {
  std::vector<oracle::Span> s;
  for (const auto& r : log) {
    s.push_back({static_cast<int>(r.pool), r.channel, r.bank, r.row, r.t_enqueue, r.t_issue, r.t_complete});
  }
  return s;
}

}  // namespace

TEST_CASE("log metrics agree with a per-cycle recount") {
  for (std::uint64_t seed = 1; seed <= 30; ++seed) {
    const auto log = random_log(seed, 20 + seed * 3);
    const auto s = spans(log);
    CHECK(bank_level_parallelism(log) == doctest::Approx(oracle::blp(s)));
    CHECK(row_buffer_hit_rate(log) == doctest::Approx(oracle::rbhr(s)));
    for (std::uint64_t w : {1u, 7u, 100u}) CHECK(peak_window_requests(log, w) == oracle::peak_window(s, w));
  }
}

TEST_CASE("empty log") {
  std::vector<MemoryRequest> none;
  CHECK(bank_level_parallelism(none) == 0.0);
  CHECK(row_buffer_hit_rate(none) == 0.0);
  CHECK(peak_window_requests(none) == 0);
  MetricsReport r;
  fill_log_metrics(r, none);
  CHECK(r.degenerate);
}

TEST_CASE("agent split and locality") {
  std::vector<MemoryRequest> log(4);
  for (std::size_t i = 0; i < 4; ++i) {
    log[i].t_created = 0;
    log[i].t_enqueue = 1;
    log[i].t_complete = 10 + i;
  }
  log[0].local = false;
  log[1].row_hit = true;
  log[3].agent = Agent::Cpu;
  log[3].row_hit = true;
  MetricsReport r;
  fill_log_metrics(r, log);
  CHECK(r.gpu_accesses == 3);
  CHECK(r.cpu_accesses == 1);
  CHECK(r.local_accesses == 2);
  CHECK(r.remote_accesses == 1);
  CHECK(r.local_ratio == doctest::Approx(2.0 / 3.0));
  CHECK(r.gpu_rbhr == doctest::Approx(1.0 / 3.0));
  CHECK(r.cpu_rbhr == 1.0);
  CHECK(r.gpu_mean_latency == doctest::Approx(11.0));
  CHECK(r.cpu_mean_latency == 13.0);
  CHECK(r.mean_access_delay == doctest::Approx(10.5));
  const auto j = to_json(r);
  CHECK(j.contains("blp"));
}
