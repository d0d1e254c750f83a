#include "gms/sched.hpp"

#include <algorithm>
#include <limits>

#include "gms/error.hpp"

namespace gms {

const char* to_string(SchedPolicy p) {
  switch (p) {
    case SchedPolicy::CCWS: return "CCWS";
    case SchedPolicy::TBAS_C: return "TBAS_C";
    case SchedPolicy::TBAS_D: return "TBAS_D";
    case SchedPolicy::TBAS_E: return "TBAS_E";
  }
  return "?";
}

SchedPolicy sched_policy_from_string(const std::string& s, const std::string& where) {
  if (s == "CCWS") return SchedPolicy::CCWS;
  if (s == "TBAS_C") return SchedPolicy::TBAS_C;
  if (s == "TBAS_D") return SchedPolicy::TBAS_D;
  if (s == "TBAS_E") return SchedPolicy::TBAS_E;
  throw ConfigError(where, "unknown scheduler '" + s + "'");
}

bool sufficient_active(std::span<const WarpState> batch_warps, std::uint32_t threshold) {
  std::uint32_t n = 0;
  for (const auto& w : batch_warps) {
    if (w.active()) ++n;
  }
  return n >= threshold;
}

WarpScheduler::WarpScheduler(SchedulerOptions opts) : opts_(opts) {
  if (opts_.policy == SchedPolicy::CCWS && opts_.ccws_capacity == 0) {
    throw ConfigError("gpu.ccws_capacity", "must be >= 1");
  }
  if (is_tbas(opts_.policy) && opts_.active_threshold == 0) {
    throw ConfigError("gpu.tbas_threshold", "must be >= 1");
  }
}

void WarpScheduler::add_warp(std::uint32_t warp_id, std::uint64_t batch_id, std::uint64_t batch_age,
                             std::uint64_t cycle) {
  if (warps_.count(warp_id)) throw Error("warp " + std::to_string(warp_id) + " added twice");
  WarpState w;
  w.warp_id = warp_id;
  w.batch_id = batch_id;
  w.eligible_from = cycle;
  warps_.emplace(warp_id, w);
  ++unfinished_;

  if (opts_.policy == SchedPolicy::CCWS) {
    if (running_.size() < opts_.ccws_capacity) running_.push_back(warp_id);
    else pending_.push_back(warp_id);
    return;
  }
  auto [it, fresh] = batches_.try_emplace(batch_id);
  if (fresh) it->second.age = batch_age;
  it->second.warps.push_back(warp_id);
  if (!fresh) return;
  if (!run_batch_ && pending_batches_.empty()) run_batch_ = batch_id;
  else pending_batches_.push_back(batch_id);
}

std::vector<WarpState> WarpScheduler::batch_states(std::uint64_t batch_id) const {
  std::vector<WarpState> out;
  auto it = batches_.find(batch_id);
  if (it == batches_.end()) return out;
  for (auto w : it->second.warps) out.push_back(warps_.at(w));
  return out;
}

std::size_t WarpScheduler::active_count(std::uint64_t batch_id) const {
  auto it = batches_.find(batch_id);
  if (it == batches_.end()) return 0;
  std::size_t n = 0;
  for (auto w : it->second.warps) {
    if (warps_.at(w).active()) ++n;
  }
  return n;
}

bool WarpScheduler::sufficient_active(std::uint64_t batch_id) const {
  return sufficient_active(batch_id, opts_.active_threshold);
}

bool WarpScheduler::sufficient_active(std::uint64_t batch_id, std::uint32_t threshold) const {
  const auto states = batch_states(batch_id);
  return gms::sufficient_active(states, threshold);
}

std::vector<std::uint32_t> WarpScheduler::running_warps() const {
  if (opts_.policy == SchedPolicy::CCWS) return running_;
  std::vector<std::uint32_t> out;
  if (run_batch_) {
    for (auto w : batches_.at(*run_batch_).warps) {
      if (warps_.at(w).status != WarpStatus::Finished) out.push_back(w);
    }
  }
  return out;
}

std::vector<std::uint32_t> WarpScheduler::pending_warps() const {
  if (opts_.policy == SchedPolicy::CCWS) return {pending_.begin(), pending_.end()};
  std::vector<std::uint32_t> out;
  for (auto b : pending_batches_) {
    for (auto w : batches_.at(b).warps) {
      if (warps_.at(w).status != WarpStatus::Finished) out.push_back(w);
    }
  }
  return out;
}

std::optional<std::uint32_t> WarpScheduler::pick_round_robin(const std::vector<std::uint32_t>& order,
                                                             std::uint64_t cycle) {
  if (order.empty()) return std::nullopt;
  // Start after the last issued warp when it is in the set.
  std::size_t start = 0;
  if (last_issued_) {
    auto it = std::find(order.begin(), order.end(), *last_issued_);
    if (it != order.end()) start = static_cast<std::size_t>(it - order.begin()) + 1;
  }
  for (std::size_t i = 0; i < order.size(); ++i) {
    const auto w = order[(start + i) % order.size()];
    if (warps_.at(w).can_issue(cycle)) return w;
  }
  return std::nullopt;
}

bool WarpScheduler::running_has_compute_stall(std::uint64_t cycle) const {
  for (auto w : running_warps()) {
    const auto& s = warps_.at(w);
    if (s.active() && !s.can_issue(cycle)) return true;
  }
  return false;
}

std::optional<std::uint32_t> WarpScheduler::select_warp(std::uint64_t cycle) {
  if (unfinished_ == 0) return std::nullopt;
  if (opts_.policy == SchedPolicy::CCWS) ccws_fill(cycle);
  else if (!run_batch_) tbas_promote(cycle);

  if (auto w = pick_round_robin(running_warps(), cycle)) return w;
  if (running_has_compute_stall(cycle)) return std::nullopt;
  rebalance(cycle);
  return std::nullopt;
}

void WarpScheduler::rebalance(std::uint64_t cycle) {
  if (opts_.policy == SchedPolicy::CCWS) {
    // Demote running warps that wait on memory, then refill.
    std::vector<std::uint32_t> keep;
    for (auto w : running_) {
      if (warps_.at(w).active()) keep.push_back(w);
      else pending_.push_back(w);
    }
    running_ = std::move(keep);
    ccws_fill(cycle);
    return;
  }
  if (run_batch_ && !sufficient_active(*run_batch_)) tbas_demote();
  if (!run_batch_) tbas_promote(cycle);
}

void WarpScheduler::ccws_fill(std::uint64_t cycle) {
  for (auto it = pending_.begin(); it != pending_.end() && running_.size() < opts_.ccws_capacity;) {
    auto& s = warps_.at(*it);
    if (!s.active()) {
      ++it;
      continue;
    }
    s.eligible_from = std::max(s.eligible_from, cycle + 1);
    running_.push_back(*it);
    promotions_.push_back({cycle, *it, 0, 0});
    it = pending_.erase(it);
  }
}

void WarpScheduler::tbas_demote() {
  pending_batches_.push_back(*run_batch_);
  last_demoted_ = run_batch_;
  run_batch_.reset();
}

void WarpScheduler::tbas_promote(std::uint64_t cycle) {
  if (pending_batches_.empty()) return;
  std::vector<std::uint64_t> cands;
  for (auto b : pending_batches_) {
    if (sufficient_active(b)) cands.push_back(b);
  }
  // Nothing meets the threshold and the SM would idle: relax to one warp.
  if (cands.empty() && opts_.active_threshold > 1) {
    for (auto b : pending_batches_) {
      if (active_count(b) > 0) cands.push_back(b);
    }
  }
  if (cands.empty()) return;

  std::uint64_t min_age = std::numeric_limits<std::uint64_t>::max();
  for (auto b : cands) min_age = std::min(min_age, batches_.at(b).age);

  std::uint64_t chosen = cands.front();
  switch (opts_.policy) {
    case SchedPolicy::TBAS_C:
      break;  // first in pending order
    case SchedPolicy::TBAS_D: {
      // Smallest id above the last demoted batch, wrapping to the smallest.
      const std::uint64_t ref = last_demoted_.value_or(0);
      std::optional<std::uint64_t> above, lowest;
      for (auto b : cands) {
        if ((!last_demoted_ || b > ref) && (!above || b < *above)) above = b;
        if (!lowest || b < *lowest) lowest = b;
      }
      chosen = above ? *above : *lowest;
      break;
    }
    case SchedPolicy::TBAS_E:
      for (auto b : cands) {
        if (batches_.at(b).age == min_age) {
          chosen = b;
          break;
        }
      }
      break;
    case SchedPolicy::CCWS:
      break;
  }
  pending_batches_.erase(std::find(pending_batches_.begin(), pending_batches_.end(), chosen));
  run_batch_ = chosen;
  for (auto w : batches_.at(chosen).warps) {
    auto& s = warps_.at(w);
    s.eligible_from = std::max(s.eligible_from, cycle + 1);
  }
  promotions_.push_back({cycle, chosen, batches_.at(chosen).age, min_age});
}

void WarpScheduler::demote_and_promote(std::uint32_t warp_id, std::uint64_t cycle) {
  const auto& s = warps_.at(warp_id);
  if (opts_.policy == SchedPolicy::CCWS) {
    auto it = std::find(running_.begin(), running_.end(), warp_id);
    if (it == running_.end()) return;
    running_.erase(it);
    pending_.push_back(warp_id);
    ccws_fill(cycle);
    return;
  }
  if (run_batch_ && s.batch_id == *run_batch_ && !sufficient_active(*run_batch_)) {
    tbas_demote();
    tbas_promote(cycle);
  }
}

void WarpScheduler::end_cycle(std::uint64_t cycle) {
  if (opts_.check != PromotionCheck::EveryCycle || unfinished_ == 0) return;
  if (opts_.policy == SchedPolicy::CCWS) {
    ccws_fill(cycle);
    return;
  }
  if (run_batch_ && !sufficient_active(*run_batch_)) tbas_demote();
  if (!run_batch_) tbas_promote(cycle);
}

void WarpScheduler::mark_issued(std::uint32_t warp_id) {
  last_issued_ = warp_id;
  ++warps_.at(warp_id).next_slot;
}

void WarpScheduler::mark_stalled(std::uint32_t warp_id, std::uint64_t until) {
  auto& s = warps_.at(warp_id);
  s.status = WarpStatus::Stalled;
  s.stalled_until = until;
}

void WarpScheduler::mark_waiting(std::uint32_t warp_id) { warps_.at(warp_id).status = WarpStatus::WaitingMemory; }

void WarpScheduler::mark_finished(std::uint32_t warp_id) {
  auto& s = warps_.at(warp_id);
  if (s.status == WarpStatus::Finished) return;
  s.status = WarpStatus::Finished;
  --unfinished_;
  if (opts_.policy == SchedPolicy::CCWS) {
    auto it = std::find(running_.begin(), running_.end(), warp_id);
    if (it != running_.end()) running_.erase(it);
    auto pit = std::find(pending_.begin(), pending_.end(), warp_id);
    if (pit != pending_.end()) pending_.erase(pit);
    warps_.erase(warp_id);
    return;
  }
  const auto b = s.batch_id;
  auto& info = batches_.at(b);
  const bool done = std::all_of(info.warps.begin(), info.warps.end(),
                                [&](auto w) { return warps_.at(w).status == WarpStatus::Finished; });
  if (!done) return;
  for (auto w : info.warps) warps_.erase(w);
  batches_.erase(b);
  if (run_batch_ == b) run_batch_.reset();
  auto pit = std::find(pending_batches_.begin(), pending_batches_.end(), b);
  if (pit != pending_batches_.end()) pending_batches_.erase(pit);
}

}  // namespace gms
