#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "gms/batching.hpp"
#include "gms/dispatch.hpp"
#include "gms/dram.hpp"
#include "gms/memmap.hpp"
#include "gms/sched.hpp"
#include "gms/workload.hpp"

namespace gms {

inline constexpr int kConfigSchemaVersion = 1;

struct L1Config {
  std::uint32_t size_bytes = 32 * 1024;
  std::uint32_t assoc = 4;
  std::uint32_t line_bytes = 128;
  std::uint32_t num_sets() const { return size_bytes / (line_bytes * assoc); }
};

struct GpuConfig {
  std::uint32_t num_sms = 4;
  std::uint32_t max_blocks_per_sm = 8;
  std::uint32_t max_threads_per_sm = 1536;
  L1Config l1;
  std::uint32_t ccws_capacity = 4;
  std::uint32_t tbas_threshold = 1;
  std::uint32_t icnt_latency = 4;
  std::uint32_t outbound_capacity = 32;
  std::uint32_t reply_queue_capacity = 8;
  std::uint32_t reply_drain_per_cycle = 1;
  std::uint32_t reply_latency = 4;
};

struct PoolConfig {
  AddressLayout layout;
  TimingParams timing;
  EnergyParams energy;
  std::uint32_t queue_capacity = 64;
};

struct MemoryConfig {
  PoolConfig gddr;
  PoolConfig ddr{AddressLayout{6, 7, 0, 3, 14, 12}, TimingParams{11, 11, 11, 39, 4, 1.0},
                 EnergyParams{2500.0, 350.0, 380.0, 0.8}, 64};
  std::uint32_t bw_gddr = 2;
  std::uint32_t bw_ddr = 1;
  double cpu_row_fraction = 0.25;
  std::optional<std::uint32_t> aging_cap;
  Pool cpu_pool = Pool::GDDR;
};

struct PolicyConfig {
  DispatchKind dispatch = DispatchKind::Interleaved;
  AllocPolicy allocator = AllocPolicy::LocalFirstTouch;
  SchedPolicy scheduler = SchedPolicy::CCWS;
  Arbitration arbitration = Arbitration::FrFcfs;
  PromotionCheck promotion_check = PromotionCheck::OnStall;
};

struct BatchingConfig {
  std::optional<std::uint64_t> stride;  // skips profiling for every kernel
  ProfileOptions profile;
  std::optional<std::filesystem::path> plan_file;  // single-kernel workloads only
};

struct RunConfig {
  Workload workload;
  std::string workload_ref;  // path as written, or "inline"
  std::uint64_t seed = 0;
  std::uint64_t horizon_cycles = 1'000'000;
  bool checks = true;  // per-cycle invariant assertions
  PolicyConfig policy;
  BatchingConfig batching;
  GpuConfig gpu;
  MemoryConfig memory;

  // Cross-field checks; throws ConfigError.
  void validate() const;
  PageTableConfig page_table_config() const;
};

// Relative paths (workload, plan_file) resolve against base_dir.
RunConfig config_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir);
RunConfig load_config(const std::filesystem::path& file);
nlohmann::json read_json_file(const std::filesystem::path& file);

PromotionCheck promotion_check_from_string(const std::string& s, const std::string& where);
DispatchKind dispatch_from_string(const std::string& s, const std::string& where);
const char* to_string(PromotionCheck p);

}  // namespace gms
