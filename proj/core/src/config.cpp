#include "gms/config.hpp"

#include <fstream>

#include "gms/error.hpp"
#include "gms/json_fields.hpp"

namespace gms {

namespace {

L1Config l1_from_json(const json& j, const std::string& path, L1Config d) {
  FieldReader r(j, path);
  L1Config l;
  l.size_bytes = r.get_or<std::uint32_t>("size_bytes", d.size_bytes);
  l.assoc = r.get_or<std::uint32_t>("assoc", d.assoc);
  l.line_bytes = r.get_or<std::uint32_t>("line_bytes", d.line_bytes);
  r.finish();
  if (l.assoc == 0) throw ConfigError(path + ".assoc", "must be >= 1");
  if (l.line_bytes == 0 || (l.line_bytes & (l.line_bytes - 1))) {
    throw ConfigError(path + ".line_bytes", "must be a power of two");
  }
  if (l.size_bytes < l.line_bytes * l.assoc || l.size_bytes % (l.line_bytes * l.assoc)) {
    throw ConfigError(path + ".size_bytes", "must be a multiple of line_bytes * assoc");
  }
  return l;
}

GpuConfig gpu_from_json(const json& j, const std::string& path) {
  FieldReader r(j, path);
  GpuConfig d, g;
  g.num_sms = r.get_or<std::uint32_t>("num_sms", d.num_sms);
  g.max_blocks_per_sm = r.get_or<std::uint32_t>("max_blocks_per_sm", d.max_blocks_per_sm);
  g.max_threads_per_sm = r.get_or<std::uint32_t>("max_threads_per_sm", d.max_threads_per_sm);
  if (auto l1 = r.optional("l1")) g.l1 = l1_from_json(*l1, r.field_path("l1"), d.l1);
  g.ccws_capacity = r.get_or<std::uint32_t>("ccws_capacity", d.ccws_capacity);
  g.tbas_threshold = r.get_or<std::uint32_t>("tbas_threshold", d.tbas_threshold);
  g.icnt_latency = r.get_or<std::uint32_t>("icnt_latency", d.icnt_latency);
  g.outbound_capacity = r.get_or<std::uint32_t>("outbound_capacity", d.outbound_capacity);
  g.reply_queue_capacity = r.get_or<std::uint32_t>("reply_queue_capacity", d.reply_queue_capacity);
  g.reply_drain_per_cycle = r.get_or<std::uint32_t>("reply_drain_per_cycle", d.reply_drain_per_cycle);
  g.reply_latency = r.get_or<std::uint32_t>("reply_latency", d.reply_latency);
  r.finish();
  auto at_least_one = [&](std::uint32_t v, const char* name) {
    if (v == 0) throw ConfigError(path + "." + name, "must be >= 1");
  };
  at_least_one(g.num_sms, "num_sms");
  at_least_one(g.max_blocks_per_sm, "max_blocks_per_sm");
  at_least_one(g.max_threads_per_sm, "max_threads_per_sm");
  at_least_one(g.ccws_capacity, "ccws_capacity");
  at_least_one(g.tbas_threshold, "tbas_threshold");
  at_least_one(g.outbound_capacity, "outbound_capacity");
  at_least_one(g.reply_queue_capacity, "reply_queue_capacity");
  at_least_one(g.reply_drain_per_cycle, "reply_drain_per_cycle");
  return g;
}

PoolConfig pool_from_json(const json& j, const std::string& path, const PoolConfig& d) {
  FieldReader r(j, path);
  PoolConfig p = d;
  if (auto v = r.optional("layout")) p.layout = layout_from_json(*v, r.field_path("layout"), d.layout);
  if (auto v = r.optional("timing")) p.timing = timing_from_json(*v, r.field_path("timing"), d.timing);
  if (auto v = r.optional("energy")) p.energy = energy_from_json(*v, r.field_path("energy"), d.energy);
  p.queue_capacity = r.get_or<std::uint32_t>("queue_capacity", d.queue_capacity);
  r.finish();
  if (p.queue_capacity == 0 || p.queue_capacity > 64) {
    throw ConfigError(path + ".queue_capacity", "must be in [1, 64]");
  }
  return p;
}

MemoryConfig memory_from_json(const json& j, const std::string& path) {
  FieldReader r(j, path);
  MemoryConfig d, m;
  if (auto v = r.optional("gddr")) m.gddr = pool_from_json(*v, r.field_path("gddr"), d.gddr);
  if (auto v = r.optional("ddr")) m.ddr = pool_from_json(*v, r.field_path("ddr"), d.ddr);
  m.bw_gddr = r.get_or<std::uint32_t>("bw_gddr", d.bw_gddr);
  m.bw_ddr = r.get_or<std::uint32_t>("bw_ddr", d.bw_ddr);
  m.cpu_row_fraction = r.get_or<double>("cpu_row_fraction", d.cpu_row_fraction);
  if (auto v = r.optional("aging_cap")) m.aging_cap = FieldReader::convert<std::uint32_t>(*v, r.field_path("aging_cap"));
  m.cpu_pool = pool_from_string(r.get_or<std::string>("cpu_pool", to_string(d.cpu_pool)), r.field_path("cpu_pool"));
  r.finish();
  if (m.bw_gddr + m.bw_ddr == 0) throw ConfigError(path + ".bw_gddr", "bandwidth ratio must not be 0:0");
  if (!(m.cpu_row_fraction > 0.0 && m.cpu_row_fraction < 1.0)) {
    throw ConfigError(path + ".cpu_row_fraction", "must lie in (0, 1)");
  }
  if (m.aging_cap && *m.aging_cap == 0) throw ConfigError(path + ".aging_cap", "must be >= 1");
  return m;
}

PolicyConfig policy_from_json(const json& j, const std::string& path) {
  FieldReader r(j, path);
  PolicyConfig d, p;
  p.dispatch = dispatch_from_string(r.get_or<std::string>("dispatch", to_string(d.dispatch)), r.field_path("dispatch"));
  p.allocator =
      alloc_policy_from_string(r.get_or<std::string>("allocator", to_string(d.allocator)), r.field_path("allocator"));
  p.scheduler =
      sched_policy_from_string(r.get_or<std::string>("scheduler", to_string(d.scheduler)), r.field_path("scheduler"));
  p.arbitration = arbitration_from_string(r.get_or<std::string>("arbitration", to_string(d.arbitration)),
                                          r.field_path("arbitration"));
  p.promotion_check = promotion_check_from_string(
      r.get_or<std::string>("promotion_check", to_string(d.promotion_check)), r.field_path("promotion_check"));
  r.finish();
  return p;
}

BatchingConfig batching_from_json(const json& j, const std::string& path, const std::filesystem::path& base) {
  FieldReader r(j, path);
  BatchingConfig b;
  if (auto v = r.optional("stride")) {
    b.stride = FieldReader::convert<std::uint64_t>(*v, r.field_path("stride"));
    if (*b.stride == 0) throw ConfigError(r.field_path("stride"), "must be >= 1");
  }
  b.profile.max_stride = r.get_or<std::uint64_t>("max_stride", b.profile.max_stride);
  b.profile.max_modulus = r.get_or<std::uint64_t>("max_modulus", b.profile.max_modulus);
  b.profile.try_modulation = r.get_or<bool>("try_modulation", b.profile.try_modulation);
  b.profile.fallback_threshold = r.get_or<double>("fallback_threshold", b.profile.fallback_threshold);
  if (auto v = r.optional("plan_file")) {
    std::filesystem::path p = FieldReader::convert<std::string>(*v, r.field_path("plan_file"));
    b.plan_file = p.is_absolute() ? p : base / p;
  }
  r.finish();
  if (b.profile.fallback_threshold < 0 || b.profile.fallback_threshold > 1) {
    throw ConfigError(path + ".fallback_threshold", "must lie in [0, 1]");
  }
  return b;
}

}  // namespace

const char* to_string(PromotionCheck p) { return p == PromotionCheck::OnStall ? "OnStall" : "EveryCycle"; }

PromotionCheck promotion_check_from_string(const std::string& s, const std::string& where) {
  if (s == "OnStall") return PromotionCheck::OnStall;
  if (s == "EveryCycle") return PromotionCheck::EveryCycle;
  throw ConfigError(where, "unknown promotion check '" + s + "'");
}

DispatchKind dispatch_from_string(const std::string& s, const std::string& where) {
  if (s == "Interleaved") return DispatchKind::Interleaved;
  if (s == "InterleavedRandom") return DispatchKind::InterleavedRandom;
  if (s == "Serial") return DispatchKind::Serial;
  throw ConfigError(where, "unknown dispatch policy '" + s + "'");
}

json read_json_file(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw ConfigError(file.string(), "cannot open file");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(file.string(), std::string("invalid JSON: ") + e.what());
  }
}

void RunConfig::validate() const {
  const bool coloring = policy.allocator == AllocPolicy::Coloring || policy.allocator == AllocPolicy::ColoringHetero;
  memory.gddr.layout.validate(coloring, "memory.gddr.layout");
  memory.ddr.layout.validate(false, "memory.ddr.layout");
  if (memory.gddr.layout.page_offset_bits != memory.ddr.layout.page_offset_bits) {
    throw ConfigError("memory.ddr.layout.page_offset_bits", "both pools must use the same page size");
  }
  if (policy.allocator == AllocPolicy::ColoringHetero && memory.cpu_pool != Pool::GDDR) {
    throw ConfigError("memory.cpu_pool", "ColoringHetero splits GDDR rows and needs cpu_pool GDDR");
  }
  const std::uint64_t colors =
      std::uint64_t{memory.gddr.layout.num_channels()} * memory.gddr.layout.banks_per_channel();
  if (colors < gpu.num_sms) {
    throw ConfigError("gpu.num_sms", "needs at least one (channel, bank) color per SM; layout has " +
                                         std::to_string(colors));
  }
  if (gpu.l1.line_bytes > memory.gddr.layout.page_size()) {
    throw ConfigError("gpu.l1.line_bytes", "cache line larger than a page");
  }
  for (std::size_t i = 0; i < workload.kernels.size(); ++i) {
    const auto& k = workload.kernels[i];
    const std::string where = "workload.kernels[" + std::to_string(i) + "]";
    if (k.threads_per_block() > gpu.max_threads_per_sm) {
      throw ConfigError(where + ".block_dim", "block larger than gpu.max_threads_per_sm");
    }
    if (gpu.outbound_capacity < k.warp_size) {
      throw ConfigError("gpu.outbound_capacity", "must hold one request per lane (>= warp_size " +
                                                     std::to_string(k.warp_size) + ")");
    }
  }
  if (batching.plan_file && workload.kernels.size() != 1) {
    throw ConfigError("batching.plan_file", "only valid for single-kernel workloads");
  }
}

PageTableConfig RunConfig::page_table_config() const {
  PageTableConfig p;
  p.policy = policy.allocator;
  p.gddr = memory.gddr.layout;
  p.ddr = memory.ddr.layout;
  p.num_sms = gpu.num_sms;
  p.bw_gddr = memory.bw_gddr;
  p.bw_ddr = memory.bw_ddr;
  p.cpu_row_fraction = memory.cpu_row_fraction;
  p.cpu_pool = memory.cpu_pool;
  return p;
}

RunConfig config_from_json(const json& j, const std::filesystem::path& base_dir) {
  FieldReader r(j, "");
  const auto version = r.get<int>("schema_version");
  if (version != kConfigSchemaVersion) {
    throw ConfigError("schema_version", "unsupported config schema " + std::to_string(version));
  }
  RunConfig c;
  const json& w = r.raw("workload");
  if (w.is_string()) {
    std::filesystem::path p = w.get<std::string>();
    c.workload_ref = p.string();
    c.workload = load_workload(p.is_absolute() ? p : base_dir / p);
  } else if (w.is_object()) {
    c.workload_ref = "inline";
    c.workload = workload_from_json(w);
  } else {
    throw ConfigError("workload", "expected a file path or an inline workload object");
  }
  c.seed = r.get_or<std::uint64_t>("seed", c.seed);
  c.horizon_cycles = r.get_or<std::uint64_t>("horizon_cycles", c.horizon_cycles);
  c.checks = r.get_or<bool>("checks", c.checks);
  if (auto v = r.optional("policy")) c.policy = policy_from_json(*v, "policy");
  if (auto v = r.optional("batching")) c.batching = batching_from_json(*v, "batching", base_dir);
  if (auto v = r.optional("gpu")) c.gpu = gpu_from_json(*v, "gpu");
  if (auto v = r.optional("memory")) c.memory = memory_from_json(*v, "memory");
  r.ignore({"description"});
  r.finish();
  if (c.horizon_cycles == 0) throw ConfigError("horizon_cycles", "must be >= 1");
  c.validate();
  return c;
}

RunConfig load_config(const std::filesystem::path& file) {
  const json j = read_json_file(file);
  return config_from_json(j, file.parent_path());
}

}  // namespace gms
