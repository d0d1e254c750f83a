#include "gms/metrics.hpp"

#include <algorithm>
#include <map>
#include <tuple>

namespace gms {

double row_buffer_hit_rate(std::span<const MemoryRequest> log) {
  if (log.empty()) return 0.0;
  std::uint64_t hits = 0;
  for (const auto& r : log) hits += r.row_hit ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(log.size());
}

double bank_level_parallelism(std::span<const MemoryRequest> log) {
  using Key = std::tuple<int, std::uint32_t, std::uint32_t>;
  struct Ev {
    std::uint64_t t;
    int delta;
    Key key;
  };
  std::vector<Ev> evs;
  evs.reserve(log.size() * 2);
  for (const auto& r : log) {
    if (r.t_complete <= r.t_enqueue) continue;
    const Key k{static_cast<int>(r.pool), r.channel, r.bank};
    evs.push_back({r.t_enqueue, +1, k});
    evs.push_back({r.t_complete, -1, k});
  }
  if (evs.empty()) return 0.0;
  std::sort(evs.begin(), evs.end(), [](const Ev& a, const Ev& b) { return a.t < b.t; });

  std::map<Key, std::uint64_t> inflight;
  std::uint64_t busy_banks = 0;
  std::uint64_t bank_cycles = 0, active_cycles = 0;
  std::size_t i = 0;
  while (i < evs.size()) {
    const std::uint64_t t = evs[i].t;
    for (; i < evs.size() && evs[i].t == t; ++i) {
      auto& n = inflight[evs[i].key];
      if (evs[i].delta > 0) {
        if (n++ == 0) ++busy_banks;
      } else {
        if (--n == 0) --busy_banks;
      }
    }
    if (i < evs.size() && busy_banks > 0) {
      const std::uint64_t len = evs[i].t - t;
      bank_cycles += busy_banks * len;
      active_cycles += len;
    }
  }
  return active_cycles ? static_cast<double>(bank_cycles) / static_cast<double>(active_cycles) : 0.0;
}

double mean_access_delay(std::span<const MemoryRequest> log) {
  if (log.empty()) return 0.0;
  double sum = 0;
  for (const auto& r : log) sum += static_cast<double>(r.t_complete - r.t_enqueue);
  return sum / static_cast<double>(log.size());
}

std::uint64_t peak_window_requests(std::span<const MemoryRequest> log, std::uint64_t window) {
  std::vector<std::uint64_t> ts;
  ts.reserve(log.size());
  for (const auto& r : log) ts.push_back(r.t_enqueue);
  std::sort(ts.begin(), ts.end());
  std::uint64_t best = 0;
  std::size_t lo = 0;
  for (std::size_t hi = 0; hi < ts.size(); ++hi) {
    while (ts[hi] - ts[lo] >= window) ++lo;
    best = std::max<std::uint64_t>(best, hi - lo + 1);
  }
  return best;
}

void fill_log_metrics(MetricsReport& r, std::span<const MemoryRequest> log) {
  r.dram_accesses = log.size();
  r.degenerate = log.empty();
  r.blp = bank_level_parallelism(log);
  r.rbhr = row_buffer_hit_rate(log);
  r.mean_access_delay = mean_access_delay(log);
  r.peak_window_requests = peak_window_requests(log);

  std::uint64_t gpu = 0, cpu = 0, gpu_hits = 0, cpu_hits = 0, local = 0, remote = 0;
  double gpu_lat = 0, cpu_lat = 0;
  for (const auto& q : log) {
    const double lat = static_cast<double>(q.t_complete - q.t_created);
    if (q.agent == Agent::Gpu) {
      ++gpu;
      gpu_hits += q.row_hit ? 1 : 0;
      gpu_lat += lat;
      if (q.local) ++local;
      else ++remote;
    } else {
      ++cpu;
      cpu_hits += q.row_hit ? 1 : 0;
      cpu_lat += lat;
    }
  }
  r.gpu_accesses = gpu;
  r.cpu_accesses = cpu;
  r.gpu_rbhr = gpu ? static_cast<double>(gpu_hits) / static_cast<double>(gpu) : 0.0;
  r.cpu_rbhr = cpu ? static_cast<double>(cpu_hits) / static_cast<double>(cpu) : 0.0;
  r.gpu_mean_latency = gpu ? gpu_lat / static_cast<double>(gpu) : 0.0;
  r.cpu_mean_latency = cpu ? cpu_lat / static_cast<double>(cpu) : 0.0;
  r.local_accesses = local;
  r.remote_accesses = remote;
  r.local_ratio = gpu ? static_cast<double>(local) / static_cast<double>(gpu) : 0.0;
}

nlohmann::json to_json(const MetricsReport& r) {
  nlohmann::json kernels = nlohmann::json::array();
  for (const auto& k : r.kernels) {
    kernels.push_back({{"name", k.name},
                       {"start_cycle", k.start_cycle},
                       {"end_cycle", k.end_cycle},
                       {"warp_instructions", k.warp_instructions},
                       {"mem_instructions", k.mem_instructions},
                       {"l1_misses", k.l1_misses},
                       {"mpki", k.mpki()}});
  }
  return {
      {"schema_version", kReportSchemaVersion},
      {"degenerate", r.degenerate},
      {"truncated", r.truncated},
      {"cycles", r.cycles},
      {"warp_instructions", r.warp_instructions},
      {"ipc", r.ipc},
      {"dram_accesses", r.dram_accesses},
      {"gpu_accesses", r.gpu_accesses},
      {"cpu_accesses", r.cpu_accesses},
      {"blp", r.blp},
      {"rbhr", r.rbhr},
      {"gpu_rbhr", r.gpu_rbhr},
      {"cpu_rbhr", r.cpu_rbhr},
      {"local_accesses", r.local_accesses},
      {"remote_accesses", r.remote_accesses},
      {"local_ratio", r.local_ratio},
      {"mean_access_delay", r.mean_access_delay},
      {"gpu_mean_latency", r.gpu_mean_latency},
      {"cpu_mean_latency", r.cpu_mean_latency},
      {"reply_stalls", r.reply_stalls},
      {"backpressure_stalls", r.backpressure_stalls},
      {"row_switches", r.row_switches},
      {"activates", r.activates},
      {"row_hits", r.row_hits},
      {"peak_window_requests", r.peak_window_requests},
      {"spills", r.spills},
      {"energy",
       {{"activate", r.energy.activate},
        {"read_write", r.energy.read_write},
        {"background", r.energy.background},
        {"total", r.energy.total()}}},
      {"kernels", kernels},
  };
}

}  // namespace gms
