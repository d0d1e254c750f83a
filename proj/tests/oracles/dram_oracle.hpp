#pragma once

// Single-bank FR-FCFS reference, written as a plain cycle loop over an
// arrival-sorted request list.

#include <cstdint>
#include <optional>
#include <vector>

namespace oracle {

struct Timing {
  std::uint64_t rcd, rp, cas, burst;
};

struct BankReq {
  std::uint64_t arrive = 0;
  std::uint64_t row = 0;
  bool read = true;
};

struct BankOut {
  std::uint64_t issue = 0;
  std::uint64_t complete = 0;
  bool hit = false;
};

struct BankRun {
  std::vector<BankOut> out;  // indexed like the input
  std::uint64_t activates = 0;
  std::uint64_t hits = 0;
  std::uint64_t switches = 0;
};

// Requests must be sorted by arrival. A request may issue in its arrival
// cycle. Each cycle at most one request issues, and only when the bank has
// finished the previous one.
inline BankRun fr_fcfs_bank(const std::vector<BankReq>& reqs, Timing t) {
  BankRun run;
  run.out.resize(reqs.size());
  std::vector<bool> done(reqs.size(), false);
  std::optional<std::uint64_t> open;
  std::uint64_t free_at = 0;
  std::size_t left = reqs.size();
  for (std::uint64_t cycle = 0; left > 0; ++cycle) {
    if (cycle < free_at) continue;
    long first = -1, first_hit = -1;
    for (std::size_t i = 0; i < reqs.size(); ++i) {
      if (done[i] || reqs[i].arrive > cycle) continue;
      if (first < 0) first = static_cast<long>(i);
      if (first_hit < 0 && open && *open == reqs[i].row) first_hit = static_cast<long>(i);
    }
    if (first < 0) continue;
    const auto k = static_cast<std::size_t>(first_hit >= 0 ? first_hit : first);
    BankOut& o = run.out[k];
    o.issue = cycle;
    if (open && *open == reqs[k].row) {
      o.hit = true;
      o.complete = cycle + t.cas + t.burst;
      ++run.hits;
    } else {
      o.complete = cycle + (open ? t.rp : 0) + t.rcd + t.cas + t.burst;
      if (open) ++run.switches;
      ++run.activates;
      open = reqs[k].row;
    }
    free_at = o.complete;
    done[k] = true;
    --left;
  }
  return run;
}

// Row hits and activates for requests served in the given order on one bank.
struct OrderCount {
  std::uint64_t activates = 0;
  std::uint64_t hits = 0;
};

inline OrderCount count_in_order(const std::vector<std::uint64_t>& rows) {
  OrderCount c;
  bool have = false;
  std::uint64_t cur = 0;
  for (auto r : rows) {
    if (have && r == cur) {
      ++c.hits;
    } else {
      ++c.activates;
      cur = r;
      have = true;
    }
  }
  return c;
}

}  // namespace oracle
