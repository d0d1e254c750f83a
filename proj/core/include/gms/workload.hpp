#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace gms {

inline constexpr int kWorkloadSchemaVersion = 1;

struct Extent2 {
  std::uint32_t x = 1;
  std::uint32_t y = 1;
  std::uint64_t count() const { return std::uint64_t{x} * y; }
  bool operator==(const Extent2&) const = default;
};

// CUDA-style block coordinate. z is always 0; 3D grids are rejected at load.
struct BlockId {
  std::uint32_t x = 0;
  std::uint32_t y = 0;
  std::uint32_t z = 0;
  auto operator<=>(const BlockId&) const = default;
};

enum class MappingKind { Clustered, Interleaved };

// How one data matrix is touched by the thread hierarchy.
//
// Clustered: block b (row-major linear id) owns the contiguous element range
//   [b*T*A, (b+1)*T*A) where T is threads per block and A is
//   accesses_per_thread. Access k of thread t reads element b*T*A + k*T + t,
//   so lanes of a warp touch consecutive elements.
// Interleaved: thread (tx,ty) of block (bx,by), access k, touches matrix
//   element (row = by*block.y + ty, col = bx*block.x*A + tx + k*block.x).
struct MatrixMapping {
  std::uint64_t base_addr = 0;
  std::uint32_t element_size = 4;
  std::uint64_t row_len = 1;  // elements per matrix row
  MappingKind mapping_kind = MappingKind::Clustered;
  std::uint32_t accesses_per_thread = 1;
  double read_fraction = 1.0;

  bool operator==(const MatrixMapping&) const = default;
};

struct KernelSpec {
  std::string name;
  Extent2 grid_dim;
  Extent2 block_dim;
  std::uint32_t warp_size = 32;
  std::uint32_t compute_gap = 0;
  std::vector<MatrixMapping> matrices;

  std::uint64_t total_blocks() const { return grid_dim.count(); }
  std::uint32_t threads_per_block() const { return static_cast<std::uint32_t>(block_dim.count()); }
  std::uint32_t warps_per_block() const {
    return (threads_per_block() + warp_size - 1) / warp_size;
  }
  bool operator==(const KernelSpec&) const = default;
};

struct AddressRegion {
  std::uint64_t base = 0;
  std::uint64_t size = 0;
  bool operator==(const AddressRegion&) const = default;
};

struct CpuTrafficSpec {
  double request_rate = 0.0;  // requests per 1000 cycles, at most 1000
  AddressRegion address_region;
  double rw_ratio = 1.0;  // fraction of reads
  std::uint32_t burstiness = 1;
  std::uint64_t seed = 0;
  bool operator==(const CpuTrafficSpec&) const = default;
};

struct AccessEvent {
  std::uint64_t virtual_addr = 0;
  bool is_read = true;
  std::uint32_t warp_id = 0;   // warp index within the block
  std::uint64_t block_id = 0;  // linear block id
  std::uint64_t batch_id = 0;
  std::uint32_t issue_slot = 0;  // memory-instruction ordinal within the warp
  std::uint32_t matrix = 0;
};

// Per-lane events of one warp. Lanes of the same memory instruction share an
// issue_slot; slots increase strictly from one instruction to the next.
struct WarpTrace {
  std::uint32_t warp_id = 0;
  std::uint32_t active_lanes = 0;
  std::vector<AccessEvent> events;
};

struct CpuRequestEvent {
  std::uint64_t cycle = 0;
  std::uint64_t addr = 0;
  bool is_read = true;
  bool operator==(const CpuRequestEvent&) const = default;
};

struct Workload {
  std::vector<KernelSpec> kernels;
  std::optional<CpuTrafficSpec> cpu_traffic;
};

// Granularity of synthetic CPU requests (one CPU cache line).
inline constexpr std::uint64_t kCpuAccessBytes = 64;

// Throws ConfigError on any violated invariant.
void validate(const KernelSpec& spec);
void validate(const CpuTrafficSpec& spec);
void validate(const Workload& workload);

std::vector<BlockId> enumerate_blocks(const KernelSpec& spec);
std::uint64_t linear_block(const KernelSpec& spec, BlockId id);
BlockId block_at(const KernelSpec& spec, std::uint64_t linear);

// Bytes spanned by one matrix given its mapping.
std::uint64_t matrix_footprint(const KernelSpec& spec, const MatrixMapping& m);

// True when access k (0-based) of a matrix with the given read fraction is a
// read. ceil(k * read_fraction) of the first k accesses are reads.
bool access_is_read(std::uint32_t k, double read_fraction);

std::vector<WarpTrace> gen_block_trace(const KernelSpec& spec, BlockId block,
                                       std::uint64_t batch_id = 0);

// Incremental form of gen_cpu_traffic. At most one request per cycle; bursts
// are runs of `burstiness` back-to-back requests.
class CpuTrafficGenerator {
 public:
  explicit CpuTrafficGenerator(const CpuTrafficSpec& spec);
  std::optional<CpuRequestEvent> tick(std::uint64_t cycle);

 private:
  double uniform();

  CpuTrafficSpec spec_;
  std::mt19937_64 rng_;
  double start_prob_ = 0.0;
  std::uint32_t burst_left_ = 0;
  std::uint64_t lines_ = 1;
};

std::vector<CpuRequestEvent> gen_cpu_traffic(const CpuTrafficSpec& spec, std::uint64_t horizon);

// --- JSON ---------------------------------------------------------------
nlohmann::json to_json(const KernelSpec& spec);
nlohmann::json to_json(const CpuTrafficSpec& spec);
nlohmann::json to_json(const Workload& workload);
KernelSpec kernel_from_json(const nlohmann::json& j, const std::string& path = "kernel");
CpuTrafficSpec cpu_traffic_from_json(const nlohmann::json& j, const std::string& path = "cpu_traffic");
Workload workload_from_json(const nlohmann::json& j);
Workload load_workload(const std::filesystem::path& file);

const char* to_string(MappingKind kind);

}  // namespace gms
