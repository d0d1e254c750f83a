#pragma once

#include <filesystem>
#include <string>

#include <gms/config.hpp>
#include <gms/workload.hpp>

#include "oracles/batching_oracle.hpp"

namespace testutil {

inline std::filesystem::path fixture(const std::string& rel) { return std::filesystem::path(GMS_FIXTURE_DIR) / rel; }

inline gms::KernelSpec clustered(std::uint32_t gx, std::uint32_t gy, std::uint32_t threads, std::uint32_t elem,
                                 std::uint32_t apt, std::uint32_t warp = 32) {
  gms::KernelSpec k;
  k.name = "k";
  k.grid_dim = {gx, gy};
  k.block_dim = {threads, 1};
  k.warp_size = warp;
  gms::MatrixMapping m;
  m.element_size = elem;
  m.accesses_per_thread = apt;
  m.row_len = std::uint64_t{threads} * apt;
  m.mapping_kind = gms::MappingKind::Clustered;
  k.matrices.push_back(m);
  return k;
}

inline oracle::Kernel to_oracle(const gms::KernelSpec& k) {
  oracle::Kernel o;
  o.gx = k.grid_dim.x;
  o.gy = k.grid_dim.y;
  o.bx = k.block_dim.x;
  o.by = k.block_dim.y;
  for (const auto& m : k.matrices) {
    o.matrices.push_back({0, m.element_size, m.row_len, m.mapping_kind == gms::MappingKind::Clustered,
                          m.accesses_per_thread});
  }
  return o;
}

}  // namespace testutil
