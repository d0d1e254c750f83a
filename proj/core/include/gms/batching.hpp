#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "gms/workload.hpp"

namespace gms {

inline constexpr int kBatchPlanSchemaVersion = 1;

enum class Formation { FixedStride, Modulation, Fallback };

const char* to_string(Formation f);

struct ThreadBatch {
  std::uint64_t batch_id = 0;
  std::vector<std::uint64_t> block_ids;  // linear ids, dispatch order
  std::set<std::uint64_t> page_set;      // virtual page numbers
};

// Grouping of a kernel's blocks into thread batches.
//
// FixedStride and Fallback plans group `stride` consecutive blocks; a
// Modulation plan groups block b into batch (b mod modulus).
struct BatchPlan {
  std::string kernel;
  std::uint64_t stride = 1;
  std::uint64_t modulus = 0;
  Formation formation = Formation::FixedStride;
  std::uint64_t page_size = 4096;
  std::vector<ThreadBatch> batches;
  std::vector<std::string> warnings;

  std::uint64_t total_blocks() const;
  // Blocks in batch order; this is the order serial dispatch walks.
  std::vector<std::uint64_t> dispatch_order() const;
  // batch index for every linear block id.
  std::vector<std::uint64_t> batch_of_block() const;
};

struct SharingHistogram {
  std::map<std::uint64_t, std::uint64_t> bins;  // distance -> page count
  std::uint64_t total_pages = 0;

  double exclusive_fraction() const;
  bool operator==(const SharingHistogram&) const = default;
};

struct ProfileOptions {
  std::uint64_t max_stride = 64;        // cap for row-derived candidates
  std::uint64_t exhaustive_limit = 16;  // every stride 1..limit is tried
  std::uint64_t max_modulus = 16;
  bool try_modulation = true;
  double fallback_threshold = 0.5;  // shared-page fraction above which a plan is Fallback
};

struct StrideProfile {
  std::uint64_t stride = 1;
  std::uint64_t modulus = 0;
  Formation formation = Formation::FixedStride;
  std::uint64_t shared_pages = 0;
  std::uint64_t total_pages = 0;
};

// Candidate strides: 1..exhaustive_limit plus divisors and multiples of the
// blocks-per-matrix-row count up to max_stride, clipped to the block count.
std::vector<std::uint64_t> stride_candidates(const KernelSpec& spec, std::uint64_t page_size,
                                             const ProfileOptions& opts = {});

// Number of pages touched by more than one batch when blocks are grouped
// with the given fixed stride. Matrix base addresses are taken as zero and
// pages are keyed per matrix.
std::uint64_t shared_pages_for_stride(const KernelSpec& spec, std::uint64_t page_size,
                                      std::uint64_t stride);

// Throws gms::Error("kernel issues no memory accesses") for an empty trace.
StrideProfile profile_stride(const KernelSpec& spec, std::uint64_t page_size,
                             const ProfileOptions& opts = {});

BatchPlan form_batches(const KernelSpec& spec, std::uint64_t stride, std::uint64_t page_size);
BatchPlan form_modulo_batches(const KernelSpec& spec, std::uint64_t modulus, std::uint64_t page_size);

// profile_stride followed by the matching form_* call.
BatchPlan plan_kernel(const KernelSpec& spec, std::uint64_t page_size, const ProfileOptions& opts = {});

SharingHistogram sharing_histogram(const BatchPlan& plan);

nlohmann::json to_json(const BatchPlan& plan);
nlohmann::json to_json(const SharingHistogram& h);
BatchPlan plan_from_json(const nlohmann::json& j);

}  // namespace gms
