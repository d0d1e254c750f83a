#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "gms/batching.hpp"

namespace gms {

enum class DispatchKind { Interleaved, InterleavedRandom, Serial };

const char* to_string(DispatchKind k);

// Per-SM dispatch queue: two registers over block ordinals in the plan's
// dispatch order. head only moves forward and never passes tail.
struct DispatchQueue {
  std::uint32_t sm_id = 0;
  std::uint64_t head = 0;
  std::uint64_t tail = 0;

  bool exhausted() const { return head >= tail; }
  std::uint64_t remaining() const { return exhausted() ? 0 : tail - head; }
  // Returns the current head and advances it; nullopt once head == tail.
  std::optional<std::uint64_t> next_block();
};

// Contiguous split of the dispatch order into num_sms ranges. The split
// minimizes the largest per-SM block count; among optimal splits, ranges
// stay as even as possible and never cut a batch, except batches larger
// than ceil(total/num_sms), which are cut into chunks of that size first.
std::vector<DispatchQueue> partition_blocks(std::uint64_t total_blocks, std::uint32_t num_sms,
                                            const BatchPlan& plan);

// Same split over raw unit sizes; returns per-SM unit counts.
std::vector<std::uint64_t> partition_units(std::span<const std::uint64_t> unit_sizes, std::uint32_t num_sms);

struct BlockAssignment {
  std::uint32_t sm_id = 0;
  std::uint64_t ordinal = 0;  // position in the global sequential id stream
};

// Baseline dispatcher: a global sequential id counter handed out to idle
// SMs. Deterministic mode fills idle slots round by round in SM id order;
// the random mode picks a uniformly random idle SM per assignment.
class InterleavedDispatcher {
 public:
  explicit InterleavedDispatcher(std::uint64_t total_blocks, std::optional<std::uint64_t> seed = std::nullopt);

  // idle_slots[sm] is the number of free block slots on that SM. It is
  // decremented for every assignment made.
  std::vector<BlockAssignment> fill(std::span<std::uint32_t> idle_slots);

  bool exhausted() const { return next_ >= total_; }
  std::uint64_t dispatched() const { return next_; }

 private:
  std::uint64_t total_;
  std::uint64_t next_ = 0;
  std::optional<std::mt19937_64> rng_;
};

}  // namespace gms
