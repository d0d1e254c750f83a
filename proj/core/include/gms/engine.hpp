#pragma once

#include <cstdint>
#include <memory>
#include <ostream>
#include <string>
#include <vector>

#include "gms/batching.hpp"
#include "gms/config.hpp"
#include "gms/dram.hpp"
#include "gms/memmap.hpp"
#include "gms/metrics.hpp"

namespace gms {

struct IssueRecord {
  std::uint64_t cycle = 0;
  std::uint32_t sm = 0;
  std::uint32_t warp = 0;  // per-SM warp uid
  std::uint64_t batch = 0;
  std::uint64_t block = 0;
  std::uint32_t slot = 0;
  bool miss = false;
};

struct BankCounterRow {
  Pool pool = Pool::GDDR;
  std::uint32_t channel = 0;
  std::uint32_t bank = 0;
  BankCounters counters;
};

struct CycleSample {
  std::uint64_t cycle = 0;
  std::uint32_t issued = 0;
  std::uint64_t outbound = 0;
  std::uint64_t mc_queued = 0;
  std::uint64_t in_dram = 0;
  std::uint64_t reply_queued = 0;
  std::uint64_t completions_waiting = 0;
};

struct RunOptions {
  bool record_trace = false;   // per-cycle samples
  bool record_issues = false;  // per-issue log
};

struct RunResult {
  MetricsReport report;
  std::vector<MemoryRequest> log;  // completed requests in completion order
  std::vector<BankCounterRow> banks;
  std::vector<BatchPlan> plans;  // one per kernel
  std::vector<IssueRecord> issues;
  std::vector<CycleSample> trace;
  std::vector<std::string> warnings;
  std::shared_ptr<const PageTable> page_table;
};

// Runs every kernel of the workload back to back. Throws SimFault on an
// internal invariant violation; a run that hits the horizon returns with
// report.truncated set.
RunResult run(const RunConfig& config, const RunOptions& options = {});

// Plan used for one kernel under the config's batching settings.
BatchPlan plan_for_kernel(const RunConfig& config, const KernelSpec& kernel);

void write_bank_csv(std::ostream& os, const std::vector<BankCounterRow>& banks);
void write_trace_csv(std::ostream& os, const std::vector<CycleSample>& trace);
void write_issue_csv(std::ostream& os, const std::vector<IssueRecord>& issues);

}  // namespace gms
