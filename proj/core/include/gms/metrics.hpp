#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "gms/dram.hpp"

namespace gms {

inline constexpr int kReportSchemaVersion = 1;
inline constexpr std::uint64_t kBurstWindow = 100;

// A request is in flight at cycle c when t_enqueue <= c < t_complete.
// Banks are keyed by (pool, channel, bank).
double row_buffer_hit_rate(std::span<const MemoryRequest> log);
double bank_level_parallelism(std::span<const MemoryRequest> log);
double mean_access_delay(std::span<const MemoryRequest> log);
// Largest number of requests enqueued within any `window` consecutive cycles.
std::uint64_t peak_window_requests(std::span<const MemoryRequest> log, std::uint64_t window = kBurstWindow);

struct KernelStats {
  std::string name;
  std::uint64_t start_cycle = 0;
  std::uint64_t end_cycle = 0;
  std::uint64_t warp_instructions = 0;
  std::uint64_t mem_instructions = 0;
  std::uint64_t l1_misses = 0;  // coalesced read lines sent to DRAM
  double mpki() const {
    return warp_instructions ? 1000.0 * static_cast<double>(l1_misses) / static_cast<double>(warp_instructions) : 0.0;
  }
};

struct MetricsReport {
  bool degenerate = false;
  bool truncated = false;
  std::uint64_t cycles = 0;
  std::uint64_t warp_instructions = 0;
  double ipc = 0;
  std::uint64_t dram_accesses = 0;
  std::uint64_t gpu_accesses = 0;
  std::uint64_t cpu_accesses = 0;
  double blp = 0;
  double rbhr = 0;
  double gpu_rbhr = 0;
  double cpu_rbhr = 0;
  std::uint64_t local_accesses = 0;
  std::uint64_t remote_accesses = 0;
  double local_ratio = 0;
  double mean_access_delay = 0;
  double gpu_mean_latency = 0;
  double cpu_mean_latency = 0;
  std::uint64_t reply_stalls = 0;
  std::uint64_t backpressure_stalls = 0;
  std::uint64_t row_switches = 0;
  std::uint64_t activates = 0;
  std::uint64_t row_hits = 0;
  std::uint64_t peak_window_requests = 0;
  std::uint64_t spills = 0;
  EnergyBreakdown energy;
  std::vector<KernelStats> kernels;
};

// Fills every log-derived field (access counts, BLP, RBHR, delays, local
// counts, burst peak) from the completed request log.
void fill_log_metrics(MetricsReport& r, std::span<const MemoryRequest> log);

nlohmann::json to_json(const MetricsReport& r);

}  // namespace gms
