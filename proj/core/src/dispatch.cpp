#include "gms/dispatch.hpp"

#include <algorithm>
#include <numeric>

#include "gms/error.hpp"

namespace gms {

namespace {

// Fewest groups a greedy left-to-right packing with cap `cap` needs for the
// suffix starting at each index (two pointers, O(n)).
std::vector<std::uint64_t> suffix_min_groups(std::span<const std::uint64_t> sizes, std::uint64_t cap) {
  const std::size_t n = sizes.size();
  std::vector<std::uint64_t> prefix(n + 1, 0);
  for (std::size_t i = 0; i < n; ++i) prefix[i + 1] = prefix[i] + sizes[i];
  std::vector<std::uint64_t> groups(n + 1, 0);
  std::size_t end = n;
  for (std::size_t j = n; j-- > 0;) {
    // Largest `end` with prefix[end] - prefix[j] <= cap.
    while (prefix[end] - prefix[j] > cap) --end;
    groups[j] = 1 + groups[end];
  }
  return groups;
}

std::uint64_t greedy_groups(std::span<const std::uint64_t> sizes, std::uint64_t cap) {
  std::uint64_t groups = 0, load = 0;
  for (auto s : sizes) {
    if (groups == 0 || load + s > cap) {
      ++groups;
      load = 0;
    }
    load += s;
  }
  return groups;
}

}  // namespace

const char* to_string(DispatchKind k) {
  switch (k) {
    case DispatchKind::Interleaved: return "Interleaved";
    case DispatchKind::InterleavedRandom: return "InterleavedRandom";
    case DispatchKind::Serial: return "Serial";
  }
  return "?";
}

std::optional<std::uint64_t> DispatchQueue::next_block() {
  if (exhausted()) return std::nullopt;
  return head++;
}

std::vector<std::uint64_t> partition_units(std::span<const std::uint64_t> sizes, std::uint32_t num_sms) {
  if (num_sms == 0) throw Error("num_sms must be >= 1");
  std::vector<std::uint64_t> counts(num_sms, 0);
  if (sizes.empty()) return counts;

  // Optimal max load by binary search over the greedy feasibility check.
  const std::uint64_t total = std::accumulate(sizes.begin(), sizes.end(), std::uint64_t{0});
  std::uint64_t lo = *std::max_element(sizes.begin(), sizes.end());
  std::uint64_t hi = total;
  while (lo < hi) {
    const std::uint64_t mid = lo + (hi - lo) / 2;
    if (greedy_groups(sizes, mid) <= num_sms) hi = mid;
    else lo = mid + 1;
  }
  const std::uint64_t cap = lo;
  const auto min_groups = suffix_min_groups(sizes, cap);

  std::size_t j = 0;
  std::uint64_t remaining = total;
  for (std::uint32_t sm = 0; sm < num_sms && j < sizes.size(); ++sm) {
    const std::uint64_t sms_left = num_sms - sm;
    // Target share of what is left, kept as a fraction: remaining / sms_left.
    std::uint64_t load = 0;
    while (j < sizes.size()) {
      const std::uint64_t s = sizes[j];
      if (load + s > cap) break;
      const bool must_take = min_groups[j] > sms_left - 1;
      // Take the unit while its midpoint stays within the target share:
      // (load + s/2) <= remaining / sms_left.
      const bool balanced = (2 * load + s) * sms_left <= 2 * remaining;
      if (load == 0 || must_take || balanced) {
        load += s;
        ++counts[sm];
        ++j;
      } else {
        break;
      }
    }
    remaining -= load;
  }
  return counts;
}

std::vector<DispatchQueue> partition_blocks(std::uint64_t total_blocks, std::uint32_t num_sms, const BatchPlan& plan) {
  if (num_sms == 0) throw Error("num_sms must be >= 1");
  if (plan.total_blocks() != total_blocks) {
    throw Error("batch plan covers " + std::to_string(plan.total_blocks()) + " blocks, kernel has " +
                std::to_string(total_blocks));
  }
  const std::uint64_t even_share = (total_blocks + num_sms - 1) / num_sms;
  std::vector<std::uint64_t> units;
  for (const auto& b : plan.batches) {
    std::uint64_t n = b.block_ids.size();
    while (n > even_share) {
      units.push_back(even_share);
      n -= even_share;
    }
    if (n > 0) units.push_back(n);
  }
  const auto counts = partition_units(units, num_sms);

  std::vector<DispatchQueue> queues(num_sms);
  std::uint64_t pos = 0;
  std::size_t u = 0;
  for (std::uint32_t sm = 0; sm < num_sms; ++sm) {
    queues[sm].sm_id = sm;
    queues[sm].head = pos;
    for (std::uint64_t k = 0; k < counts[sm]; ++k) pos += units[u++];
    queues[sm].tail = pos;
  }
  return queues;
}

InterleavedDispatcher::InterleavedDispatcher(std::uint64_t total_blocks, std::optional<std::uint64_t> seed)
    : total_(total_blocks) {
  if (seed) rng_.emplace(*seed);
}

std::vector<BlockAssignment> InterleavedDispatcher::fill(std::span<std::uint32_t> idle_slots) {
  std::vector<BlockAssignment> out;
  if (rng_) {
    std::vector<std::uint32_t> idle;
    while (!exhausted()) {
      idle.clear();
      for (std::uint32_t sm = 0; sm < idle_slots.size(); ++sm) {
        if (idle_slots[sm] > 0) idle.push_back(sm);
      }
      if (idle.empty()) break;
      const std::uint32_t sm = idle[(*rng_)() % idle.size()];
      --idle_slots[sm];
      out.push_back({sm, next_++});
    }
    return out;
  }
  bool progress = true;
  while (progress && !exhausted()) {
    progress = false;
    for (std::uint32_t sm = 0; sm < idle_slots.size() && !exhausted(); ++sm) {
      if (idle_slots[sm] == 0) continue;
      --idle_slots[sm];
      out.push_back({sm, next_++});
      progress = true;
    }
  }
  return out;
}

}  // namespace gms
