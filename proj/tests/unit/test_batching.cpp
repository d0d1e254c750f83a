#include <doctest.h>

#include <random>

#include <gms/batching.hpp>
#include <gms/error.hpp>

#include "helpers.hpp"
#include "oracles/batching_oracle.hpp"

using namespace gms;

TEST_CASE("fixed stride groups consecutive blocks") {
  // 4 blocks of 4 threads, 512-byte elements: one block per 2 KB, two per page.
  auto k = testutil::clustered(2, 2, 4, 512, 1, 4);
  const auto plan = form_batches(k, 2, 4096);
  REQUIRE(plan.batches.size() == 2);
  CHECK(plan.batches[0].block_ids == std::vector<std::uint64_t>{0, 1});
  CHECK(plan.batches[1].block_ids == std::vector<std::uint64_t>{2, 3});
  CHECK(plan.batches[0].page_set == std::set<std::uint64_t>{0});
  CHECK(plan.batches[1].page_set == std::set<std::uint64_t>{1});
  CHECK(plan.dispatch_order() == std::vector<std::uint64_t>{0, 1, 2, 3});
  CHECK(plan.batch_of_block() == std::vector<std::uint64_t>{0, 0, 1, 1});
  CHECK(profile_stride(k, 4096).stride == 2);
}

TEST_CASE("stride above the block count forms one batch") {
  auto k = testutil::clustered(2, 1, 4, 4, 1);
  const auto plan = form_batches(k, 9, 4096);
  CHECK(plan.batches.size() == 1);
  CHECK(plan.warnings.size() == 1);
  CHECK_THROWS_AS(form_batches(k, 0, 4096), Error);
}

TEST_CASE("kernel without accesses cannot be profiled") {
  auto k = testutil::clustered(2, 1, 4, 4, 1);
  k.matrices.clear();
  CHECK_THROWS_AS(profile_stride(k, 4096), Error);
}

TEST_CASE("shared page counts match thread-level enumeration") {
  std::mt19937_64 rng(5);
  for (int it = 0; it < 40; ++it) {
    KernelSpec k;
    k.name = "r";
    k.grid_dim = {static_cast<std::uint32_t>(1 + rng() % 6), static_cast<std::uint32_t>(1 + rng() % 4)};
    k.block_dim = {static_cast<std::uint32_t>(1u << (rng() % 4)), static_cast<std::uint32_t>(1 + rng() % 2)};
    k.warp_size = 4;
    MatrixMapping m;
    m.element_size = 1u << (2 + rng() % 6);
    m.accesses_per_thread = static_cast<std::uint32_t>(1 + rng() % 4);
    m.mapping_kind = rng() % 2 ? MappingKind::Clustered : MappingKind::Interleaved;
    m.row_len = std::uint64_t{k.grid_dim.x} * k.block_dim.x * m.accesses_per_thread;
    k.matrices.push_back(m);
    const std::uint64_t page = 1024;
    const auto o = testutil::to_oracle(k);
    for (std::uint64_t s = 1; s <= 6; ++s) {
      CHECK(shared_pages_for_stride(k, page, s) == oracle::shared_pages(o, page, s));
    }
  }
}

TEST_CASE("profiled stride matches brute force on clustered kernels") {
  for (std::uint64_t k_ranges : {1u, 2u, 4u, 8u}) {
    for (std::uint32_t threads : {16u, 32u, 64u}) {
      const std::uint32_t elem = 4;
      const std::uint64_t block_bytes = 4096 / k_ranges;
      const std::uint32_t apt = static_cast<std::uint32_t>(block_bytes / (threads * elem));
      if (apt == 0) continue;
      auto k = testutil::clustered(16, 2, threads, elem, apt);
      const auto o = testutil::to_oracle(k);
      const auto prof = profile_stride(k, 4096);
      CHECK(prof.stride == k_ranges);
      CHECK(prof.shared_pages == 0);
      CHECK(prof.stride == oracle::best_stride(o, 4096));
    }
  }
}

TEST_CASE("sharing histogram matches enumeration") {
  KernelSpec k;
  k.name = "h";
  k.grid_dim = {4, 4};
  k.block_dim = {8, 2};
  k.warp_size = 8;
  k.matrices.push_back({0, 64, 4 * 8 * 2, MappingKind::Interleaved, 2, 1.0});
  const auto o = testutil::to_oracle(k);
  for (std::uint64_t s : {1u, 2u, 3u, 4u, 8u}) {
    const auto plan = form_batches(k, s, 2048);
    std::vector<std::vector<std::uint64_t>> groups;
    for (const auto& b : plan.batches) groups.push_back(b.block_ids);
    const auto h = sharing_histogram(plan);
    CHECK(h.bins == oracle::sharing_bins(o, 2048, groups));
  }
}

TEST_CASE("modulo batches") {
  auto k = testutil::clustered(4, 1, 4, 4, 1);
  const auto plan = form_modulo_batches(k, 2, 4096);
  REQUIRE(plan.batches.size() == 2);
  CHECK(plan.batches[0].block_ids == std::vector<std::uint64_t>{0, 2});
  CHECK(plan.batches[1].block_ids == std::vector<std::uint64_t>{1, 3});
  CHECK(plan.formation == Formation::Modulation);
}

TEST_CASE("plan json round trip") {
  auto k = testutil::clustered(4, 2, 8, 256, 1, 4);
  const auto plan = plan_kernel(k, 4096);
  const auto back = plan_from_json(to_json(plan));
  CHECK(back.stride == plan.stride);
  CHECK(back.formation == plan.formation);
  REQUIRE(back.batches.size() == plan.batches.size());
  for (std::size_t i = 0; i < plan.batches.size(); ++i) {
    CHECK(back.batches[i].block_ids == plan.batches[i].block_ids);
    CHECK(back.batches[i].page_set == plan.batches[i].page_set);
  }
}
