#include <doctest.h>

#include <sstream>

#include <gms/config.hpp>
#include <gms/engine.hpp>
#include <gms/error.hpp>

#include "helpers.hpp"

using namespace gms;
using nlohmann::json;

namespace {

// One thread, two accesses 256 B apart: different cache lines, same DRAM row.
RunConfig single_thread() {
  Workload w;
  w.kernels.push_back(testutil::clustered(1, 1, 1, 256, 2, 1));
  return config_from_json({{"schema_version", 1}, {"workload", to_json(w)}, {"gpu", {{"num_sms", 1}}}}, ".");
}

std::uint64_t bank_total(const RunResult& r, std::uint64_t BankCounters::*field) {
  std::uint64_t n = 0;
  for (const auto& b : r.banks) n += b.counters.*field;
  return n;
}

}  // namespace

TEST_CASE("lone request latency by hand") {
  const auto cfg = single_thread();
  const auto res = run(cfg, {false, true});
  REQUIRE(res.log.size() == 2);
  const auto& t = cfg.memory.gddr.timing;
  const auto icnt = cfg.gpu.icnt_latency;
  const auto& a = res.log[0];
  CHECK_FALSE(a.row_hit);
  CHECK(a.t_complete - a.t_created == icnt + t.tRCD + t.tCAS + t.tBURST);
  CHECK(a.t_enqueue == a.t_created + icnt);
  REQUIRE(res.issues.size() >= 2);
  CHECK(a.t_created == res.issues[0].cycle);
  const auto& b = res.log[1];
  CHECK(b.row_hit);
  CHECK(b.t_complete - b.t_created == icnt + t.tCAS + t.tBURST);
  // The second load waits for the first reply plus the one-cycle stall.
  CHECK(b.t_created >= a.t_complete + cfg.gpu.reply_latency + 1);
  CHECK(res.report.activates == 1);
  CHECK(res.report.row_hits == 1);
  CHECK_FALSE(res.report.truncated);
}

TEST_CASE("fixture runs conserve requests") {
  for (const char* f : {"configs/fig4_temp.json", "configs/fig6_temp.json", "configs/fig9_tbas_d.json",
                        "configs/mixed_hetero.json"}) {
    CAPTURE(f);
    const auto res = run(load_config(testutil::fixture(f)));
    CHECK(res.report.dram_accesses == res.log.size());
    CHECK(res.report.gpu_accesses + res.report.cpu_accesses == res.log.size());
    CHECK(bank_total(res, &BankCounters::activates) + bank_total(res, &BankCounters::row_hits) == res.log.size());
    CHECK(bank_total(res, &BankCounters::reads) + bank_total(res, &BankCounters::writes) == res.log.size());
    CHECK(res.report.row_switches == bank_total(res, &BankCounters::row_switches));
    for (const auto& r : res.log) {
      CHECK(r.t_created <= r.t_enqueue);
      CHECK(r.t_enqueue <= r.t_issue);
      CHECK(r.t_issue < r.t_complete);
    }
    CHECK_FALSE(res.report.truncated);
  }
}

TEST_CASE("identical inputs give identical reports") {
  const auto cfg = load_config(testutil::fixture("configs/mixed_coloring.json"));
  CHECK(to_json(run(cfg).report).dump() == to_json(run(cfg).report).dump());
}

TEST_CASE("horizon truncates the run") {
  auto cfg = single_thread();
  cfg.horizon_cycles = 10;
  const auto res = run(cfg);
  CHECK(res.report.truncated);
  CHECK(res.report.cycles == 10);
}

TEST_CASE("csv writers emit headers") {
  const auto res = run(single_thread(), {true, true});
  std::ostringstream a, b, c;
  write_bank_csv(a, res.banks);
  write_trace_csv(b, res.trace);
  write_issue_csv(c, res.issues);
  for (const auto* s : {&a, &b, &c}) {
    const auto text = s->str();
    CHECK(std::count(text.begin(), text.end(), '\n') >= 2);
  }
}
