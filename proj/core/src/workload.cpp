#include "gms/workload.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "gms/error.hpp"
#include "gms/json_fields.hpp"

namespace gms {

namespace {

std::uint64_t matrix_elements_clustered(const KernelSpec& spec, const MatrixMapping& m) {
  return spec.total_blocks() * spec.threads_per_block() * m.accesses_per_thread;
}

std::uint64_t element_index(const KernelSpec& spec, const MatrixMapping& m, BlockId b,
                            std::uint32_t tx, std::uint32_t ty, std::uint32_t k) {
  const std::uint64_t threads = spec.threads_per_block();
  if (m.mapping_kind == MappingKind::Clustered) {
    const std::uint64_t lb = linear_block(spec, b);
    const std::uint64_t t = std::uint64_t{ty} * spec.block_dim.x + tx;
    return lb * threads * m.accesses_per_thread + std::uint64_t{k} * threads + t;
  }
  const std::uint64_t col = std::uint64_t{b.x} * spec.block_dim.x * m.accesses_per_thread + tx +
                            std::uint64_t{k} * spec.block_dim.x;
  const std::uint64_t row = std::uint64_t{b.y} * spec.block_dim.y + ty;
  return row * m.row_len + col;
}

}  // namespace

const char* to_string(MappingKind kind) {
  return kind == MappingKind::Clustered ? "Clustered" : "Interleaved";
}

void validate(const KernelSpec& spec) {
  const std::string at = "kernel '" + spec.name + "'";
  if (spec.grid_dim.count() < 1) throw ConfigError(at + ".grid_dim", "must contain at least one block");
  if (spec.block_dim.count() < 1) throw ConfigError(at + ".block_dim", "must contain at least one thread");
  if (spec.warp_size < 1) throw ConfigError(at + ".warp_size", "must be >= 1");
  for (std::size_t i = 0; i < spec.matrices.size(); ++i) {
    const auto& m = spec.matrices[i];
    const std::string mp = at + ".matrices[" + std::to_string(i) + "]";
    if (m.element_size < 1) throw ConfigError(mp + ".element_size", "must be >= 1");
    if (m.row_len < 1) throw ConfigError(mp + ".row_len", "must be >= 1");
    if (!(m.read_fraction >= 0.0 && m.read_fraction <= 1.0)) {
      throw ConfigError(mp + ".read_fraction", "must lie in [0,1]");
    }
    if (m.mapping_kind == MappingKind::Interleaved) {
      const std::uint64_t need =
          std::uint64_t{spec.grid_dim.x} * spec.block_dim.x * m.accesses_per_thread;
      if (m.accesses_per_thread > 0 && need > m.row_len) {
        throw ConfigError(mp + ".row_len", "interleaved mapping needs row_len >= grid.x*block.x*accesses_per_thread = " +
                                               std::to_string(need));
      }
    }
  }
  // Matrices must not overlap in the virtual address space.
  std::vector<std::pair<std::uint64_t, std::uint64_t>> ranges;
  for (const auto& m : spec.matrices) {
    const auto fp = matrix_footprint(spec, m);
    if (fp > 0) ranges.emplace_back(m.base_addr, m.base_addr + fp);
  }
  std::sort(ranges.begin(), ranges.end());
  for (std::size_t i = 1; i < ranges.size(); ++i) {
    if (ranges[i].first < ranges[i - 1].second) {
      throw ConfigError(at + ".matrices", "matrix address ranges overlap");
    }
  }
}

void validate(const CpuTrafficSpec& spec) {
  if (!(spec.request_rate >= 0.0 && spec.request_rate <= 1000.0)) {
    throw ConfigError("cpu_traffic.request_rate", "must lie in [0,1000] requests per 1000 cycles");
  }
  if (spec.address_region.size < kCpuAccessBytes) {
    throw ConfigError("cpu_traffic.address_region.size", "region must hold at least one access");
  }
  if (!(spec.rw_ratio >= 0.0 && spec.rw_ratio <= 1.0)) {
    throw ConfigError("cpu_traffic.rw_ratio", "must lie in [0,1]");
  }
  if (spec.burstiness < 1) throw ConfigError("cpu_traffic.burstiness", "must be >= 1");
}

void validate(const Workload& workload) {
  for (const auto& k : workload.kernels) validate(k);
  if (workload.cpu_traffic) {
    validate(*workload.cpu_traffic);
    const auto& r = workload.cpu_traffic->address_region;
    for (const auto& k : workload.kernels) {
      for (const auto& m : k.matrices) {
        const auto fp = matrix_footprint(k, m);
        if (fp > 0 && r.base < m.base_addr + fp && m.base_addr < r.base + r.size) {
          throw ConfigError("cpu_traffic.address_region", "overlaps a matrix of kernel '" + k.name + "'");
        }
      }
    }
  }
}

std::vector<BlockId> enumerate_blocks(const KernelSpec& spec) {
  std::vector<BlockId> out;
  out.reserve(spec.total_blocks());
  for (std::uint32_t y = 0; y < spec.grid_dim.y; ++y) {
    for (std::uint32_t x = 0; x < spec.grid_dim.x; ++x) out.push_back({x, y, 0});
  }
  return out;
}

std::uint64_t linear_block(const KernelSpec& spec, BlockId id) {
  return std::uint64_t{id.y} * spec.grid_dim.x + id.x;
}

BlockId block_at(const KernelSpec& spec, std::uint64_t linear) {
  return {static_cast<std::uint32_t>(linear % spec.grid_dim.x),
          static_cast<std::uint32_t>(linear / spec.grid_dim.x), 0};
}

std::uint64_t matrix_footprint(const KernelSpec& spec, const MatrixMapping& m) {
  if (m.accesses_per_thread == 0) return 0;
  if (m.mapping_kind == MappingKind::Clustered) {
    return matrix_elements_clustered(spec, m) * m.element_size;
  }
  return std::uint64_t{spec.grid_dim.y} * spec.block_dim.y * m.row_len * m.element_size;
}

bool access_is_read(std::uint32_t k, double read_fraction) {
  // Reads are spread evenly: the read count among the first n accesses is
  // ceil(n * read_fraction), so the very first access is a read whenever
  // read_fraction > 0.
  constexpr double eps = 1e-9;
  const auto reads_upto = [&](double n) { return std::ceil(n * read_fraction - eps); };
  return reads_upto(k + 1.0) > reads_upto(static_cast<double>(k));
}

std::vector<WarpTrace> gen_block_trace(const KernelSpec& spec, BlockId block, std::uint64_t batch_id) {
  const std::uint32_t threads = spec.threads_per_block();
  const std::uint32_t nwarps = spec.warps_per_block();
  const std::uint64_t lb = linear_block(spec, block);

  std::uint32_t max_apt = 0;
  for (const auto& m : spec.matrices) max_apt = std::max(max_apt, m.accesses_per_thread);

  std::vector<WarpTrace> warps(nwarps);
  for (std::uint32_t w = 0; w < nwarps; ++w) {
    auto& wt = warps[w];
    wt.warp_id = w;
    const std::uint32_t first = w * spec.warp_size;
    const std::uint32_t last = std::min(threads, first + spec.warp_size);
    wt.active_lanes = last - first;

    std::uint32_t slot = 0;
    for (std::uint32_t k = 0; k < max_apt; ++k) {
      for (std::uint32_t mi = 0; mi < spec.matrices.size(); ++mi) {
        const auto& m = spec.matrices[mi];
        if (k >= m.accesses_per_thread) continue;
        const bool rd = access_is_read(k, m.read_fraction);
        for (std::uint32_t t = first; t < last; ++t) {
          const std::uint32_t tx = t % spec.block_dim.x;
          const std::uint32_t ty = t / spec.block_dim.x;
          const std::uint64_t e = element_index(spec, m, block, tx, ty, k);
          wt.events.push_back({m.base_addr + e * m.element_size, rd, w, lb, batch_id, slot, mi});
        }
        ++slot;
      }
    }
  }
  return warps;
}

CpuTrafficGenerator::CpuTrafficGenerator(const CpuTrafficSpec& spec) : spec_(spec), rng_(spec.seed) {
  lines_ = std::max<std::uint64_t>(1, spec.address_region.size / kCpuAccessBytes);
  const double r = spec.request_rate / 1000.0;
  const double b = spec.burstiness;
  // A burst occupies b cycles; idle gaps are geometric in the start
  // probability p. Long-run rate b / ((1-p)/p + b) equals r for
  // p = 1 / (b/r - b + 1).
  if (r <= 0.0) {
    start_prob_ = 0.0;
  } else if (r >= 1.0) {
    start_prob_ = 1.0;
  } else {
    start_prob_ = 1.0 / (b / r - b + 1.0);
  }
}

double CpuTrafficGenerator::uniform() {
  return static_cast<double>(rng_() >> 11) * 0x1.0p-53;
}

std::optional<CpuRequestEvent> CpuTrafficGenerator::tick(std::uint64_t cycle) {
  if (start_prob_ <= 0.0) return std::nullopt;
  if (burst_left_ == 0) {
    if (uniform() >= start_prob_) return std::nullopt;
    burst_left_ = spec_.burstiness;
  }
  --burst_left_;
  const std::uint64_t line = rng_() % lines_;
  const bool rd = uniform() < spec_.rw_ratio;
  return CpuRequestEvent{cycle, spec_.address_region.base + line * kCpuAccessBytes, rd};
}

std::vector<CpuRequestEvent> gen_cpu_traffic(const CpuTrafficSpec& spec, std::uint64_t horizon) {
  std::vector<CpuRequestEvent> out;
  CpuTrafficGenerator gen(spec);
  for (std::uint64_t c = 0; c < horizon; ++c) {
    if (auto ev = gen.tick(c)) out.push_back(*ev);
  }
  return out;
}

// --- JSON ---------------------------------------------------------------

namespace {

Extent2 extent_from_json(const json& j, const std::string& path) {
  if (!j.is_array() || j.empty() || j.size() > 3) {
    throw ConfigError(path, "expected an array [x, y]");
  }
  Extent2 e;
  e.x = FieldReader::convert<std::uint32_t>(j[0], path + "[0]");
  e.y = j.size() > 1 ? FieldReader::convert<std::uint32_t>(j[1], path + "[1]") : 1;
  if (j.size() == 3 && FieldReader::convert<std::uint32_t>(j[2], path + "[2]") != 1) {
    throw ConfigError(path, "3D shapes are not supported");
  }
  return e;
}

MappingKind mapping_from_string(const std::string& s, const std::string& path) {
  if (s == "Clustered") return MappingKind::Clustered;
  if (s == "Interleaved") return MappingKind::Interleaved;
  throw ConfigError(path, "expected Clustered or Interleaved, got '" + s + "'");
}

}  // namespace

json to_json(const KernelSpec& spec) {
  json mats = json::array();
  for (const auto& m : spec.matrices) {
    mats.push_back({{"base_addr", m.base_addr},
                    {"element_size", m.element_size},
                    {"row_len", m.row_len},
                    {"mapping_kind", to_string(m.mapping_kind)},
                    {"accesses_per_thread", m.accesses_per_thread},
                    {"read_fraction", m.read_fraction}});
  }
  return {{"name", spec.name},
          {"grid_dim", {spec.grid_dim.x, spec.grid_dim.y}},
          {"block_dim", {spec.block_dim.x, spec.block_dim.y}},
          {"warp_size", spec.warp_size},
          {"compute_gap", spec.compute_gap},
          {"matrices", mats}};
}

json to_json(const CpuTrafficSpec& spec) {
  return {{"request_rate", spec.request_rate},
          {"address_region", {{"base", spec.address_region.base}, {"size", spec.address_region.size}}},
          {"rw_ratio", spec.rw_ratio},
          {"burstiness", spec.burstiness},
          {"seed", spec.seed}};
}

json to_json(const Workload& workload) {
  json j{{"schema_version", kWorkloadSchemaVersion}, {"kernels", json::array()}};
  for (const auto& k : workload.kernels) j["kernels"].push_back(to_json(k));
  if (workload.cpu_traffic) j["cpu_traffic"] = to_json(*workload.cpu_traffic);
  return j;
}

KernelSpec kernel_from_json(const json& j, const std::string& path) {
  FieldReader r(j, path);
  KernelSpec k;
  k.name = r.get<std::string>("name");
  k.grid_dim = extent_from_json(r.raw("grid_dim"), r.field_path("grid_dim"));
  k.block_dim = extent_from_json(r.raw("block_dim"), r.field_path("block_dim"));
  k.warp_size = r.get_or<std::uint32_t>("warp_size", 32);
  k.compute_gap = r.get_or<std::uint32_t>("compute_gap", 0);
  const json& mats = r.raw("matrices");
  if (!mats.is_array()) throw ConfigError(r.field_path("matrices"), "expected an array");
  for (std::size_t i = 0; i < mats.size(); ++i) {
    FieldReader mr(mats[i], r.field_path("matrices") + "[" + std::to_string(i) + "]");
    MatrixMapping m;
    m.base_addr = mr.get<std::uint64_t>("base_addr");
    m.element_size = mr.get<std::uint32_t>("element_size");
    m.row_len = mr.get<std::uint64_t>("row_len");
    m.mapping_kind = mapping_from_string(mr.get<std::string>("mapping_kind"), mr.field_path("mapping_kind"));
    m.accesses_per_thread = mr.get_or<std::uint32_t>("accesses_per_thread", 1);
    m.read_fraction = mr.get_or<double>("read_fraction", 1.0);
    mr.finish();
    k.matrices.push_back(m);
  }
  r.finish();
  return k;
}

CpuTrafficSpec cpu_traffic_from_json(const json& j, const std::string& path) {
  FieldReader r(j, path);
  CpuTrafficSpec s;
  s.request_rate = r.get<double>("request_rate");
  FieldReader ar(r.raw("address_region"), r.field_path("address_region"));
  s.address_region.base = ar.get<std::uint64_t>("base");
  s.address_region.size = ar.get<std::uint64_t>("size");
  ar.finish();
  s.rw_ratio = r.get_or<double>("rw_ratio", 1.0);
  s.burstiness = r.get_or<std::uint32_t>("burstiness", 1);
  s.seed = r.get_or<std::uint64_t>("seed", 0);
  r.finish();
  return s;
}

Workload workload_from_json(const json& j) {
  FieldReader r(j, "");
  const int version = r.get_or<int>("schema_version", kWorkloadSchemaVersion);
  if (version != kWorkloadSchemaVersion) {
    throw ConfigError("schema_version", "unsupported workload schema " + std::to_string(version));
  }
  Workload w;
  const json& ks = r.raw("kernels");
  if (!ks.is_array()) throw ConfigError("kernels", "expected an array");
  for (std::size_t i = 0; i < ks.size(); ++i) {
    w.kernels.push_back(kernel_from_json(ks[i], "kernels[" + std::to_string(i) + "]"));
  }
  if (auto c = r.optional("cpu_traffic")) w.cpu_traffic = cpu_traffic_from_json(*c);
  r.ignore({"description"});
  r.finish();
  validate(w);
  return w;
}

Workload load_workload(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw ConfigError(file.string(), "cannot open workload file");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(file.string(), e.what());
  }
  return workload_from_json(j);
}

}  // namespace gms
