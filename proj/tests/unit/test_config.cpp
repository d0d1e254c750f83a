#include <doctest.h>

#include <gms/config.hpp>
#include <gms/error.hpp>

#include "helpers.hpp"

using namespace gms;
using nlohmann::json;

namespace {

json tiny_workload() {
  Workload w;
  w.kernels.push_back(testutil::clustered(2, 1, 4, 4, 1, 4));
  return to_json(w);
}

std::string config_error(const json& j) {
  try {
    config_from_json(j, ".");
  } catch (const ConfigError& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST_CASE("defaults") {
  const auto c = config_from_json({{"schema_version", 1}, {"workload", tiny_workload()}}, ".");
  CHECK(c.workload_ref == "inline");
  CHECK(c.gpu.num_sms == 4);
  CHECK(c.gpu.ccws_capacity == 4);
  CHECK(c.policy.scheduler == SchedPolicy::CCWS);
  CHECK(c.policy.allocator == AllocPolicy::LocalFirstTouch);
  CHECK(c.memory.gddr.layout == AddressLayout{});
  CHECK_FALSE(c.memory.aging_cap);
  const auto pt = c.page_table_config();
  CHECK(pt.num_sms == 4);
}

TEST_CASE("fixture configs load") {
  const auto c = load_config(testutil::fixture("configs/fig9_tbas_e.json"));
  CHECK(c.policy.scheduler == SchedPolicy::TBAS_E);
  CHECK(c.batching.stride == 1u);
  CHECK(c.workload.kernels.at(0).compute_gap == 16);
}

TEST_CASE("field errors name the field") {
  const json base{{"schema_version", 1}, {"workload", tiny_workload()}};
  auto j = base;
  j["gpu"] = {{"num_smz", 2}};
  CHECK(config_error(j).find("gpu.num_smz") != std::string::npos);
  j = base;
  j["policy"] = {{"scheduler", "GTO"}};
  CHECK(config_error(j).find("policy.scheduler") != std::string::npos);
  j = base;
  j["schema_version"] = 2;
  CHECK(config_error(j).find("schema_version") != std::string::npos);
  j = base;
  j["horizon_cycles"] = 0;
  CHECK(config_error(j).find("horizon_cycles") != std::string::npos);
  j = base;
  j["memory"] = {{"gddr", {{"queue_capacity", 65}}}};
  CHECK(config_error(j).find("memory.gddr.queue_capacity") != std::string::npos);
  j = base;
  j["workload"] = 3;
  CHECK(config_error(j).find("workload") != std::string::npos);
}

TEST_CASE("cross-field validation") {
  const json base{{"schema_version", 1}, {"workload", tiny_workload()}};
  auto j = base;
  j["gpu"] = {{"num_sms", 64}};
  j["policy"] = {{"allocator", "Coloring"}};
  CHECK(config_error(j).find("gpu.num_sms") != std::string::npos);
  j = base;
  j["policy"] = {{"allocator", "Coloring"}};
  j["memory"] = {{"gddr", {{"layout", {{"page_offset_bits", 14}}}}}, {"ddr", {{"layout", {{"page_offset_bits", 14}}}}}};
  CHECK_FALSE(config_error(j).empty());
  j = base;
  j["policy"] = {{"allocator", "ColoringHetero"}};
  j["memory"] = {{"cpu_pool", "DDR"}};
  CHECK(config_error(j).find("memory.cpu_pool") != std::string::npos);
  j = base;
  j["gpu"] = {{"outbound_capacity", 2}};
  CHECK(config_error(j).find("gpu.outbound_capacity") != std::string::npos);
}

TEST_CASE("missing and malformed files") {
  CHECK_THROWS_AS(load_config("/nonexistent/config.json"), ConfigError);
  CHECK_THROWS_AS(config_from_json({{"schema_version", 1}, {"workload", "missing.json"}}, "/nonexistent"),
                  ConfigError);
}
