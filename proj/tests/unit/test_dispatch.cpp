#include <doctest.h>

#include <numeric>
#include <random>

#include <gms/dispatch.hpp>
#include <gms/error.hpp>

#include "helpers.hpp"
#include "oracles/batching_oracle.hpp"

using namespace gms;

TEST_CASE("queue registers") {
  DispatchQueue q{0, 3, 5};
  CHECK(q.remaining() == 2);
  CHECK(q.next_block() == 3u);
  CHECK(q.next_block() == 4u);
  CHECK_FALSE(q.next_block());
  CHECK(q.exhausted());
  CHECK(q.head == 5);
}

TEST_CASE("unit partition reaches the brute-force optimum") {
  std::mt19937_64 rng(17);
  for (int it = 0; it < 300; ++it) {
    const std::size_t n = 1 + rng() % 8;
    const std::uint32_t sms = static_cast<std::uint32_t>(1 + rng() % 4);
    std::vector<std::uint64_t> sizes(n);
    for (auto& s : sizes) s = 1 + rng() % 6;
    const auto counts = partition_units(sizes, sms);
    REQUIRE(counts.size() == sms);
    CHECK(std::accumulate(counts.begin(), counts.end(), std::uint64_t{0}) == n);
    std::uint64_t worst = 0;
    std::size_t u = 0;
    for (auto c : counts) {
      std::uint64_t load = 0;
      for (std::uint64_t i = 0; i < c; ++i) load += sizes[u++];
      worst = std::max(worst, load);
    }
    CHECK(worst == oracle::best_max_load(sizes, sms));
  }
}

TEST_CASE("block partition keeps batches whole") {
  auto k = testutil::clustered(8, 1, 4, 4, 1);
  const auto plan = form_batches(k, 2, 4096);
  const auto qs = partition_blocks(8, 2, plan);
  REQUIRE(qs.size() == 2);
  CHECK(qs[0].head == 0);
  CHECK(qs[0].tail == 4);
  CHECK(qs[1].head == 4);
  CHECK(qs[1].tail == 8);

  const auto three = partition_blocks(8, 3, plan);
  std::uint64_t covered = 0;
  for (const auto& q : three) {
    CHECK(q.head % 2 == 0);
    CHECK(q.tail % 2 == 0);
    covered += q.remaining();
  }
  CHECK(covered == 8);
  CHECK_THROWS_AS(partition_blocks(9, 2, plan), Error);
}

TEST_CASE("oversized batches are cut into even chunks") {
  auto k = testutil::clustered(8, 1, 4, 4, 1);
  const auto plan = form_batches(k, 8, 4096);
  const auto qs = partition_blocks(8, 4, plan);
  for (const auto& q : qs) CHECK(q.remaining() == 2);
}

TEST_CASE("interleaved dispatcher fills round by round") {
  InterleavedDispatcher d(7);
  std::vector<std::uint32_t> idle{2, 2, 2};
  const auto a = d.fill(idle);
  REQUIRE(a.size() == 6);
  std::vector<std::uint32_t> sms;
  for (const auto& x : a) sms.push_back(x.sm_id);
  CHECK(sms == std::vector<std::uint32_t>{0, 1, 2, 0, 1, 2});
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i].ordinal == i);
  CHECK_FALSE(d.exhausted());
  idle = {0, 1, 0};
  const auto b = d.fill(idle);
  REQUIRE(b.size() == 1);
  CHECK(b[0].sm_id == 1);
  CHECK(d.exhausted());
}

TEST_CASE("random dispatcher is seeded") {
  auto run = [](std::uint64_t seed) {
    InterleavedDispatcher d(32, seed);
    std::vector<std::uint32_t> idle{8, 8, 8, 8};
    std::vector<std::uint32_t> out;
    for (const auto& a : d.fill(idle)) out.push_back(a.sm_id);
    return out;
  };
  CHECK(run(3) == run(3));
  CHECK(run(3) != run(4));
}
