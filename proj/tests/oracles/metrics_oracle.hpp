#pragma once

// Per-cycle recount of request-log metrics.

#include <algorithm>
#include <cstdint>
#include <map>
#include <set>
#include <tuple>
#include <vector>

namespace oracle {

struct Span {
  int pool;
  std::uint32_t channel, bank;
  std::uint64_t row;
  std::uint64_t enq, issue, done;
};

// Mean over cycles with at least one request in flight of the number of
// distinct banks with a request in flight. In flight: enq <= c < done.
inline double blp(const std::vector<Span>& spans) {
  if (spans.empty()) return 0.0;
  std::uint64_t lo = spans[0].enq, hi = 0;
  for (const auto& s : spans) {
    lo = std::min(lo, s.enq);
    hi = std::max(hi, s.done);
  }
  std::uint64_t busy_cycles = 0, bank_cycles = 0;
  for (std::uint64_t c = lo; c < hi; ++c) {
    std::set<std::tuple<int, std::uint32_t, std::uint32_t>> banks;
    for (const auto& s : spans) {
      if (s.enq <= c && c < s.done) banks.insert({s.pool, s.channel, s.bank});
    }
    if (!banks.empty()) {
      ++busy_cycles;
      bank_cycles += banks.size();
    }
  }
  return busy_cycles ? static_cast<double>(bank_cycles) / static_cast<double>(busy_cycles) : 0.0;
}

// Replays each bank's requests in issue order and counts open-row hits.
inline double rbhr(const std::vector<Span>& spans) {
  if (spans.empty()) return 0.0;
  std::map<std::tuple<int, std::uint32_t, std::uint32_t>, std::vector<const Span*>> per_bank;
  for (const auto& s : spans) per_bank[{s.pool, s.channel, s.bank}].push_back(&s);
  std::uint64_t hits = 0;
  for (auto& [key, v] : per_bank) {
    std::stable_sort(v.begin(), v.end(), [](const Span* a, const Span* b) { return a->issue < b->issue; });
    for (std::size_t i = 1; i < v.size(); ++i) {
      if (v[i]->row == v[i - 1]->row) ++hits;
    }
  }
  return static_cast<double>(hits) / static_cast<double>(spans.size());
}

// Largest count of enqueue times inside any window [c, c + w).
inline std::uint64_t peak_window(const std::vector<Span>& spans, std::uint64_t w) {
  std::uint64_t best = 0;
  for (const auto& a : spans) {
    std::uint64_t n = 0;
    for (const auto& b : spans) {
      if (b.enq >= a.enq && b.enq < a.enq + w) ++n;
    }
    best = std::max(best, n);
  }
  return best;
}

}  // namespace oracle
