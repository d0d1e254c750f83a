#pragma once

#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace gms {

enum class SchedPolicy { CCWS, TBAS_C, TBAS_D, TBAS_E };
enum class PromotionCheck { OnStall, EveryCycle };
enum class WarpStatus { Ready, Stalled, WaitingMemory, Finished };

const char* to_string(SchedPolicy p);
SchedPolicy sched_policy_from_string(const std::string& s, const std::string& where);

inline bool is_tbas(SchedPolicy p) { return p != SchedPolicy::CCWS; }

struct WarpState {
  std::uint32_t warp_id = 0;
  std::uint64_t batch_id = 0;
  WarpStatus status = WarpStatus::Ready;
  std::uint64_t stalled_until = 0;  // Stalled: first cycle the warp may issue again
  std::uint64_t eligible_from = 0;  // set on promotion; models the promotion latency
  std::uint32_t next_slot = 0;

  // Not waiting on memory and not finished.
  bool active() const { return status == WarpStatus::Ready || status == WarpStatus::Stalled; }
  bool can_issue(std::uint64_t cycle) const {
    if (cycle < eligible_from) return false;
    return status == WarpStatus::Ready || (status == WarpStatus::Stalled && stalled_until <= cycle);
  }
};

// Count of active warps >= threshold.
bool sufficient_active(std::span<const WarpState> batch_warps, std::uint32_t threshold);

struct SchedulerOptions {
  SchedPolicy policy = SchedPolicy::CCWS;
  std::uint32_t ccws_capacity = 2;     // running-set size in warps (CCWS)
  std::uint32_t active_threshold = 1;  // TBAS "sufficient active warps"
  PromotionCheck check = PromotionCheck::OnStall;
};

struct Promotion {
  std::uint64_t cycle = 0;
  std::uint64_t id = 0;   // warp id (CCWS) or batch id (TBAS)
  std::uint64_t age = 0;  // batch age for TBAS
  // Smallest age among promotable pending batches at that moment.
  std::uint64_t min_candidate_age = 0;
};

// One instance per SM. Running set is a list of warps under CCWS and a
// single batch under TBAS; everything else waits in the pending structure.
class WarpScheduler {
 public:
  explicit WarpScheduler(SchedulerOptions opts);

  // batch_age: dispatch ordinal of the batch's first block on this SM.
  void add_warp(std::uint32_t warp_id, std::uint64_t batch_id, std::uint64_t batch_age, std::uint64_t cycle);

  // Round-robin pick among issuable running-set warps. When none can issue
  // and none is merely waiting out a compute gap, the running set is
  // rebalanced and nullopt is returned; promoted warps issue next cycle.
  std::optional<std::uint32_t> select_warp(std::uint64_t cycle);

  // The warp just issued a long-latency load (status becomes
  // WaitingMemory). CCWS demotes the warp; TBAS demotes the whole batch
  // once it no longer has sufficient active warps.
  void demote_and_promote(std::uint32_t warp_id, std::uint64_t cycle);

  void end_cycle(std::uint64_t cycle);

  void mark_issued(std::uint32_t warp_id);
  void mark_stalled(std::uint32_t warp_id, std::uint64_t until);
  void mark_waiting(std::uint32_t warp_id);
  void mark_finished(std::uint32_t warp_id);

  bool sufficient_active(std::uint64_t batch_id) const;
  bool sufficient_active(std::uint64_t batch_id, std::uint32_t threshold) const;

  const WarpState& warp(std::uint32_t warp_id) const { return warps_.at(warp_id); }
  std::vector<std::uint32_t> running_warps() const;
  std::vector<std::uint32_t> pending_warps() const;
  std::optional<std::uint64_t> running_batch() const { return run_batch_; }
  std::vector<std::uint64_t> pending_batches() const { return {pending_batches_.begin(), pending_batches_.end()}; }
  std::size_t unfinished() const { return unfinished_; }
  const std::vector<Promotion>& promotions() const { return promotions_; }
  const SchedulerOptions& options() const { return opts_; }

 private:
  struct BatchInfo {
    std::uint64_t age = 0;
    std::vector<std::uint32_t> warps;
  };

  std::vector<WarpState> batch_states(std::uint64_t batch_id) const;
  std::size_t active_count(std::uint64_t batch_id) const;
  bool running_has_compute_stall(std::uint64_t cycle) const;
  void rebalance(std::uint64_t cycle);
  void ccws_fill(std::uint64_t cycle);
  void tbas_demote();
  void tbas_promote(std::uint64_t cycle);
  std::optional<std::uint32_t> pick_round_robin(const std::vector<std::uint32_t>& order, std::uint64_t cycle);

  SchedulerOptions opts_;
  std::map<std::uint32_t, WarpState> warps_;
  std::size_t unfinished_ = 0;
  std::optional<std::uint32_t> last_issued_;

  // CCWS
  std::vector<std::uint32_t> running_;
  std::deque<std::uint32_t> pending_;

  // TBAS
  std::map<std::uint64_t, BatchInfo> batches_;
  std::optional<std::uint64_t> run_batch_;
  std::deque<std::uint64_t> pending_batches_;
  std::optional<std::uint64_t> last_demoted_;

  std::vector<Promotion> promotions_;
};

}  // namespace gms
