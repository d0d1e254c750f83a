#include <doctest.h>

#include <random>

#include <gms/error.hpp>
#include <gms/sched.hpp>

using namespace gms;

namespace {

WarpScheduler make(SchedPolicy p, std::uint32_t batches, std::uint32_t warps_per_batch, std::uint32_t cap = 2) {
  SchedulerOptions o;
  o.policy = p;
  o.ccws_capacity = cap;
  WarpScheduler s(o);
  std::uint32_t uid = 0;
  for (std::uint32_t b = 0; b < batches; ++b) {
    for (std::uint32_t w = 0; w < warps_per_batch; ++w) s.add_warp(uid++, b, b, 0);
  }
  return s;
}

// Issues one warp per cycle; every issue is a long-latency miss.
std::vector<std::uint32_t> issue_all_once(WarpScheduler& s, std::uint64_t cycles) {
  std::vector<std::uint32_t> order;
  for (std::uint64_t c = 0; c < cycles; ++c) {
    if (auto w = s.select_warp(c)) {
      s.mark_issued(*w);
      s.mark_waiting(*w);
      s.demote_and_promote(*w, c);
      order.push_back(*w);
    }
  }
  return order;
}

}  // namespace

TEST_CASE("round robin skips stalled warps") {
  auto s = make(SchedPolicy::CCWS, 1, 2);
  s.mark_stalled(0, 10);
  CHECK(s.select_warp(0) == 1u);
}

TEST_CASE("nothing to issue once every warp finished") {
  auto s = make(SchedPolicy::TBAS_E, 2, 2);
  for (std::uint32_t w = 0; w < 4; ++w) s.mark_finished(w);
  CHECK(s.unfinished() == 0);
  CHECK_FALSE(s.select_warp(0));
}

TEST_CASE("ccws demotes the stalled warp and promotes in arrival order") {
  auto s = make(SchedPolicy::CCWS, 4, 2, 2);
  CHECK(s.running_warps() == std::vector<std::uint32_t>{0, 1});
  s.mark_waiting(0);
  s.demote_and_promote(0, 0);
  CHECK(s.running_warps() == std::vector<std::uint32_t>{1, 2});
  CHECK(s.pending_warps().back() == 0u);
}

TEST_CASE("tbas keeps the batch while it has active warps") {
  auto s = make(SchedPolicy::TBAS_C, 3, 2);
  CHECK(s.running_batch() == 0u);
  s.mark_waiting(0);
  s.demote_and_promote(0, 0);
  CHECK(s.running_batch() == 0u);
  s.mark_waiting(1);
  s.demote_and_promote(1, 0);
  CHECK(s.running_batch() == 1u);
  CHECK(s.pending_batches() == std::vector<std::uint64_t>{2, 0});
}

TEST_CASE("tbas_d promotes the successor of the demoted batch") {
  SchedulerOptions o;
  o.policy = SchedPolicy::TBAS_D;
  WarpScheduler s(o);
  // Arrival order 2, 0, 1; running batch 2 first.
  s.add_warp(0, 2, 0, 0);
  s.add_warp(1, 0, 1, 0);
  s.add_warp(2, 1, 2, 0);
  s.mark_waiting(0);
  s.demote_and_promote(0, 0);
  CHECK(s.running_batch() == 0u);  // wraps to the smallest id
  s.mark_waiting(1);
  s.demote_and_promote(1, 1);
  CHECK(s.running_batch() == 1u);
}

TEST_CASE("tbas_e promotes the oldest ready batch") {
  SchedulerOptions o;
  o.policy = SchedPolicy::TBAS_E;
  WarpScheduler s(o);
  s.add_warp(0, 0, 0, 0);
  s.add_warp(1, 2, 10, 0);
  s.add_warp(2, 1, 5, 0);
  s.mark_waiting(0);
  s.demote_and_promote(0, 0);
  CHECK(s.running_batch() == 1u);
  const auto& p = s.promotions().back();
  CHECK(p.age == 5);
  CHECK(p.min_candidate_age == 5);
}

TEST_CASE("waiting batches are skipped") {
  auto s = make(SchedPolicy::TBAS_E, 3, 1);
  s.mark_waiting(1);
  s.mark_waiting(0);
  s.demote_and_promote(0, 0);
  CHECK(s.running_batch() == 2u);
}

TEST_CASE("sufficient active warps") {
  std::vector<WarpState> w(2);
  w[0].status = WarpStatus::WaitingMemory;
  w[1].status = WarpStatus::WaitingMemory;
  CHECK_FALSE(sufficient_active(w, 1));
  w[1].status = WarpStatus::Ready;
  CHECK(sufficient_active(w, 1));
  CHECK_FALSE(sufficient_active(w, 2));
}

TEST_CASE("tbas_e issues both warps of a batch before the next batch") {
  auto s = make(SchedPolicy::TBAS_E, 4, 2);
  const auto order = issue_all_once(s, 40);
  REQUIRE(order.size() == 8);
  for (std::size_t i = 0; i < 8; i += 2) CHECK(order[i] / 2 == order[i + 1] / 2);
}

TEST_CASE("promotions take effect one cycle later") {
  auto s = make(SchedPolicy::TBAS_E, 2, 1);
  CHECK(s.select_warp(0) == 0u);
  s.mark_issued(0);
  s.mark_waiting(0);
  s.demote_and_promote(0, 0);
  CHECK(s.running_batch() == 1u);
  CHECK_FALSE(s.select_warp(0));
  CHECK(s.select_warp(1) == 1u);
}

TEST_CASE("every-cycle checks promote without a stall event") {
  SchedulerOptions o;
  o.policy = SchedPolicy::TBAS_C;
  o.check = PromotionCheck::EveryCycle;
  WarpScheduler s(o);
  s.add_warp(0, 0, 0, 0);
  s.add_warp(1, 1, 1, 0);
  s.mark_waiting(0);
  s.end_cycle(0);
  CHECK(s.running_batch() == 1u);
}

TEST_CASE("random event streams never mix batches in the running set") {
  for (auto p : {SchedPolicy::TBAS_C, SchedPolicy::TBAS_D, SchedPolicy::TBAS_E}) {
    std::mt19937_64 rng(static_cast<unsigned>(p) + 3);
    auto s = make(p, 5, 3);
    std::vector<std::uint64_t> back(15, 0);
    for (std::uint64_t c = 0; c < 2000 && s.unfinished() > 0; ++c) {
      for (std::uint32_t w = 0; w < 15; ++w) {
        if (back[w] == c && back[w] != 0 && s.warp(w).status == WarpStatus::WaitingMemory) {
          s.mark_stalled(w, c + 1);
        }
      }
      if (auto w = s.select_warp(c)) {
        s.mark_issued(*w);
        if (s.warp(*w).next_slot >= 6) {
          s.mark_finished(*w);
        } else if (rng() % 2) {
          s.mark_waiting(*w);
          back[*w] = c + 1 + rng() % 20;
          s.demote_and_promote(*w, c);
        } else {
          s.mark_stalled(*w, c + 1 + rng() % 3);
        }
      }
      const auto rb = s.running_batch();
      for (auto w : s.running_warps()) CHECK(s.warp(w).batch_id == *rb);
      if (p == SchedPolicy::TBAS_E && !s.promotions().empty()) {
        CHECK(s.promotions().back().age == s.promotions().back().min_candidate_age);
      }
    }
    CHECK(s.unfinished() == 0);
  }
}

TEST_CASE("scheduler names") {
  CHECK(sched_policy_from_string("TBAS_D", "x") == SchedPolicy::TBAS_D);
  CHECK(std::string(to_string(SchedPolicy::CCWS)) == "CCWS");
  CHECK_THROWS_AS(sched_policy_from_string("GTO", "x"), ConfigError);
}
