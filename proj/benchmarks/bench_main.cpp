#include <filesystem>
#include <random>

#include <benchmark/benchmark.h>

#include <gms/batching.hpp>
#include <gms/config.hpp>
#include <gms/dram.hpp>
#include <gms/engine.hpp>

using namespace gms;

static void BM_McPick(benchmark::State& state) {
  std::mt19937_64 rng(1);
  std::vector<BankState> banks(16);
  for (auto& b : banks) b.open_row = rng() % 8;
  std::vector<MemoryRequest> q(static_cast<std::size_t>(state.range(0)));
  for (auto& r : q) {
    r.bank = static_cast<std::uint32_t>(rng() % 16);
    r.row = rng() % 8;
  }
  for (auto _ : state) benchmark::DoNotOptimize(mc_pick(q, banks, 0, Arbitration::FrFcfs));
}
BENCHMARK(BM_McPick)->Arg(8)->Arg(64);

static void BM_ProfileStride(benchmark::State& state) {
  KernelSpec k;
  k.name = "k";
  k.grid_dim = {64, 8};
  k.block_dim = {128, 1};
  MatrixMapping m;
  m.element_size = 4;
  m.accesses_per_thread = 4;
  m.row_len = 128 * 4;
  k.matrices.push_back(m);
  for (auto _ : state) benchmark::DoNotOptimize(profile_stride(k, 4096));
}
BENCHMARK(BM_ProfileStride);

static void BM_RunFixture(benchmark::State& state) {
  const auto cfg = load_config(std::filesystem::path(GMS_FIXTURE_DIR) / "configs/mixed_hetero.json");
  for (auto _ : state) benchmark::DoNotOptimize(run(cfg).report.cycles);
}
BENCHMARK(BM_RunFixture)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
