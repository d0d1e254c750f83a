#include <doctest.h>

#include <fstream>
#include <sstream>

#include <cli.hpp>

#include "helpers.hpp"

using namespace gms::cli;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("gms_cli_test_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

TEST_CASE("dotted keys create nested objects") {
  json j = json::object();
  set_dotted(j, "gpu.l1.assoc", 8);
  set_dotted(j, "gpu.num_sms", 2);
  CHECK(j["gpu"]["l1"]["assoc"] == 8);
  CHECK(j["gpu"]["num_sms"] == 2);
}

TEST_CASE("cells expand row-major") {
  Experiment e;
  e.axes = {{"a", {1, 2}}, {"b", {"x", "y", "z"}}};
  const auto cells = expand_cells(e);
  REQUIRE(cells.size() == 6);
  CHECK(cells[0] == std::vector<json>{1, "x"});
  CHECK(cells[1] == std::vector<json>{1, "y"});
  CHECK(cells[3] == std::vector<json>{2, "x"});
}

TEST_CASE("run writes a report") {
  const auto dir = scratch("run");
  std::ostringstream out, err;
  RunArgs a;
  a.config = testutil::fixture("configs/fig4_temp.json");
  a.out = dir;
  a.trace = true;
  CHECK(cmd_run(a, out, err) == kOk);
  const auto report = json::parse(slurp(dir / "report.json"));
  CHECK(report.contains("run"));
  CHECK(fs::exists(dir / "counters.csv"));
  CHECK(fs::exists(dir / "page_table.csv"));
  CHECK(fs::exists(dir / "trace.csv"));
  fs::remove_all(dir);
}

TEST_CASE("exit codes") {
  std::ostringstream out, err;
  RunArgs a;
  a.config = testutil::fixture("configs/invalid_layout.json");
  a.out = scratch("bad");
  CHECK(cmd_run(a, out, err) == kConfigError);
  CHECK(err.str().find("page_offset_bits") != std::string::npos);
  a.config = "/nonexistent.json";
  CHECK(cmd_run(a, out, err) == kConfigError);

  std::ostringstream vout, verr;
  CHECK(cmd_validate({testutil::fixture("workloads/fig9.json"), testutil::fixture("configs/fig9_ccws.json"),
                      testutil::fixture("experiments/fig9_schedulers.json")},
                     vout, verr) == kOk);
  CHECK(vout.str().find("(experiment)") != std::string::npos);
  CHECK(cmd_validate({testutil::fixture("configs/invalid_layout.json")}, vout, verr) == kConfigError);
  CHECK(verr.str().find("invalid_layout.json: ") != std::string::npos);
}

TEST_CASE("profile writes a plan per kernel") {
  const auto dir = scratch("profile");
  std::ostringstream out, err;
  ProfileArgs p;
  p.workload = testutil::fixture("workloads/fig4.json");
  p.out = dir;
  CHECK(cmd_profile(p, out, err) == kOk);
  const auto plan = json::parse(slurp(dir / "fig4.plan.json"));
  CHECK(plan["stride"] == 2);
  p.page_size = 3000;
  CHECK(cmd_profile(p, out, err) == kConfigError);
  fs::remove_all(dir);
}

TEST_CASE("compare runs every cell") {
  const auto dir = scratch("compare");
  std::ostringstream out, err;
  CompareArgs c;
  c.experiment = testutil::fixture("experiments/fig9_schedulers.json");
  c.out = dir;
  c.workers = 2;
  CHECK(cmd_compare(c, out, err) == kOk);
  CHECK(out.str().find("4/4") != std::string::npos);
  const auto summary = slurp(dir / "summary.csv");
  CHECK(std::count(summary.begin(), summary.end(), '\n') == 5);
  fs::remove_all(dir);
}

TEST_CASE("output directory fallback") {
  CHECK(output_dir(fs::path("x")) == fs::path("x"));
}
