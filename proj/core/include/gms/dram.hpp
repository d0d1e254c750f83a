#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "gms/memmap.hpp"

namespace gms {

struct TimingParams {
  std::uint32_t tRCD = 12;
  std::uint32_t tRP = 12;
  std::uint32_t tCAS = 12;
  std::uint32_t tRC = 40;
  std::uint32_t tBURST = 4;
  double clock_period = 1.0;  // ns per simulator cycle

  void validate(const std::string& where) const;
};

// Per-event energies (pJ) and background power per bank (pJ per cycle).
struct EnergyParams {
  double e_activate = 2000.0;
  double e_read = 300.0;
  double e_write = 330.0;
  double p_background = 1.0;

  void validate(const std::string& where) const;
};

struct BankCounters {
  std::uint64_t activates = 0;
  std::uint64_t reads = 0;
  std::uint64_t writes = 0;
  std::uint64_t row_hits = 0;
  std::uint64_t row_switches = 0;  // activates that replaced another open row

  std::uint64_t accesses() const { return reads + writes; }
  BankCounters& operator+=(const BankCounters& o);
};

struct BankState {
  std::optional<std::uint64_t> open_row;
  std::uint64_t busy_until = 0;
  BankCounters counters;

  bool ready(std::uint64_t cycle) const { return cycle >= busy_until; }
};

enum class Arbitration { FrFcfs, FrFcfsCpuPrio };
const char* to_string(Arbitration a);
Arbitration arbitration_from_string(const std::string& s, const std::string& where);

struct MemoryRequest {
  std::uint64_t id = 0;
  Pool pool = Pool::GDDR;
  std::uint32_t channel = 0;
  std::uint32_t bank = 0;
  std::uint64_t row = 0;
  std::uint32_t column = 0;
  std::uint64_t phys_addr = 0;
  bool is_read = true;
  Agent agent = Agent::Gpu;
  std::uint32_t sm_id = 0;
  std::uint32_t warp_id = 0;
  std::uint64_t batch_id = 0;
  bool local = true;
  std::uint64_t t_created = 0;
  std::uint64_t t_enqueue = 0;
  std::uint64_t t_issue = 0;
  std::uint64_t t_complete = 0;
  bool row_hit = false;
  std::uint32_t bypassed = 0;  // times an FR-FCFS hit jumped ahead of it
};

// Index into `queue` (kept in arrival order) of the request to issue, or
// nullopt. Only requests whose bank is ready at `cycle` are considered.
// With an aging cap, a ready request bypassed at least `aging_cap` times is
// served first, oldest such first.
std::optional<std::size_t> mc_pick(std::span<const MemoryRequest> queue, std::span<const BankState> banks,
                                   std::uint64_t cycle, Arbitration arb,
                                   std::optional<std::uint32_t> aging_cap = std::nullopt);

struct BankAdvance {
  std::uint64_t complete = 0;
  bool row_hit = false;
};

// Open-page timing. Throws SimFault if the bank is still busy.
BankAdvance bank_advance(BankState& bank, const MemoryRequest& req, const TimingParams& t, std::uint64_t cycle);

// One controller per (pool, channel): bounded queue plus its banks.
class MemoryController {
 public:
  MemoryController(Pool pool, std::uint32_t channel, std::uint32_t num_banks, std::size_t capacity,
                   TimingParams timing, Arbitration arb, std::optional<std::uint32_t> aging_cap);

  bool full() const { return queue_.size() >= capacity_; }
  std::size_t size() const { return queue_.size(); }
  // Returns false when full; the caller keeps the request and retries.
  bool try_enqueue(MemoryRequest req, std::uint64_t cycle);

  // Picks and issues at most one request. Returns it with t_issue,
  // t_complete and row_hit filled in.
  std::optional<MemoryRequest> step(std::uint64_t cycle);

  const std::vector<BankState>& banks() const { return banks_; }
  const std::vector<MemoryRequest>& queue() const { return queue_; }
  Pool pool() const { return pool_; }
  std::uint32_t channel() const { return channel_; }
  std::size_t peak_occupancy() const { return peak_; }

 private:
  Pool pool_;
  std::uint32_t channel_;
  std::size_t capacity_;
  TimingParams timing_;
  Arbitration arb_;
  std::optional<std::uint32_t> aging_cap_;
  std::vector<BankState> banks_;
  std::vector<MemoryRequest> queue_;  // arrival order
  std::size_t peak_ = 0;
};

struct EnergyBreakdown {
  double activate = 0;
  double read_write = 0;
  double background = 0;
  double total() const { return activate + read_write + background; }
  EnergyBreakdown& operator+=(const EnergyBreakdown& o);
};

EnergyBreakdown energy_total(const BankCounters& counters, const EnergyParams& p, std::uint64_t num_banks,
                             std::uint64_t runtime_cycles);

nlohmann::json to_json(const TimingParams& t);
TimingParams timing_from_json(const nlohmann::json& j, const std::string& path, TimingParams defaults);
nlohmann::json to_json(const EnergyParams& e);
EnergyParams energy_from_json(const nlohmann::json& j, const std::string& path, EnergyParams defaults);

}  // namespace gms
