#include "gms/batching.hpp"

#include <algorithm>
#include <limits>
#include <unordered_map>

#include "gms/error.hpp"
#include "gms/json_fields.hpp"

namespace gms {

namespace {

constexpr unsigned kMatrixKeyShift = 48;

// Pages touched by each block with matrix bases forced to zero. Keys carry
// the matrix index in the high bits so matrices never alias.
std::vector<std::vector<std::uint64_t>> profile_block_pages(const KernelSpec& spec, std::uint64_t page_size) {
  KernelSpec zeroed = spec;
  for (auto& m : zeroed.matrices) m.base_addr = 0;
  std::vector<std::vector<std::uint64_t>> pages(spec.total_blocks());
  for (std::uint64_t b = 0; b < spec.total_blocks(); ++b) {
    std::set<std::uint64_t> set;
    for (const auto& w : gen_block_trace(zeroed, block_at(spec, b))) {
      for (const auto& ev : w.events) {
        set.insert((std::uint64_t{ev.matrix} << kMatrixKeyShift) | (ev.virtual_addr / page_size));
      }
    }
    pages[b].assign(set.begin(), set.end());
  }
  return pages;
}

// page -> sorted list of accessor blocks
std::map<std::uint64_t, std::vector<std::uint64_t>> page_accessors(
    const std::vector<std::vector<std::uint64_t>>& block_pages) {
  std::map<std::uint64_t, std::vector<std::uint64_t>> acc;
  for (std::uint64_t b = 0; b < block_pages.size(); ++b) {
    for (auto p : block_pages[b]) acc[p].push_back(b);
  }
  return acc;
}

std::uint64_t shared_fixed(const std::map<std::uint64_t, std::vector<std::uint64_t>>& acc,
                           std::uint64_t stride) {
  std::uint64_t shared = 0;
  for (const auto& [page, blocks] : acc) {
    if (blocks.front() / stride != blocks.back() / stride) ++shared;
  }
  return shared;
}

std::uint64_t shared_modulo(const std::map<std::uint64_t, std::vector<std::uint64_t>>& acc,
                            std::uint64_t modulus) {
  std::uint64_t shared = 0;
  for (const auto& [page, blocks] : acc) {
    const std::uint64_t first = blocks.front() % modulus;
    for (auto b : blocks) {
      if (b % modulus != first) {
        ++shared;
        break;
      }
    }
  }
  return shared;
}

std::uint64_t blocks_per_matrix_row(const KernelSpec& spec) {
  for (const auto& m : spec.matrices) {
    if (m.accesses_per_thread == 0) continue;
    if (m.mapping_kind == MappingKind::Interleaved) return spec.grid_dim.x;
    const std::uint64_t per_block = std::uint64_t{spec.threads_per_block()} * m.accesses_per_thread;
    return std::max<std::uint64_t>(1, m.row_len / per_block);
  }
  return 1;
}

void fill_page_sets(const KernelSpec& spec, BatchPlan& plan) {
  for (auto& batch : plan.batches) {
    for (auto b : batch.block_ids) {
      for (const auto& w : gen_block_trace(spec, block_at(spec, b), batch.batch_id)) {
        for (const auto& ev : w.events) batch.page_set.insert(ev.virtual_addr / plan.page_size);
      }
    }
  }
}

}  // namespace

const char* to_string(Formation f) {
  switch (f) {
    case Formation::FixedStride: return "FixedStride";
    case Formation::Modulation: return "Modulation";
    case Formation::Fallback: return "Fallback";
  }
  return "?";
}

std::uint64_t BatchPlan::total_blocks() const {
  std::uint64_t n = 0;
  for (const auto& b : batches) n += b.block_ids.size();
  return n;
}

std::vector<std::uint64_t> BatchPlan::dispatch_order() const {
  std::vector<std::uint64_t> order;
  order.reserve(total_blocks());
  for (const auto& b : batches) order.insert(order.end(), b.block_ids.begin(), b.block_ids.end());
  return order;
}

std::vector<std::uint64_t> BatchPlan::batch_of_block() const {
  std::vector<std::uint64_t> out(total_blocks(), 0);
  for (std::uint64_t i = 0; i < batches.size(); ++i) {
    for (auto b : batches[i].block_ids) out.at(b) = i;
  }
  return out;
}

double SharingHistogram::exclusive_fraction() const {
  if (total_pages == 0) return 0.0;
  auto it = bins.find(0);
  return it == bins.end() ? 0.0 : static_cast<double>(it->second) / static_cast<double>(total_pages);
}

std::vector<std::uint64_t> stride_candidates(const KernelSpec& spec, std::uint64_t /*page_size*/,
                                             const ProfileOptions& opts) {
  const std::uint64_t total = spec.total_blocks();
  std::set<std::uint64_t> c;
  for (std::uint64_t s = 1; s <= opts.exhaustive_limit; ++s) c.insert(s);
  const std::uint64_t bpr = blocks_per_matrix_row(spec);
  for (std::uint64_t d = 1; d <= bpr; ++d) {
    if (bpr % d == 0 && d <= opts.max_stride) c.insert(d);
  }
  for (std::uint64_t m = bpr; m <= opts.max_stride; m += bpr) c.insert(m);
  std::vector<std::uint64_t> out;
  for (auto s : c) {
    if (s >= 1 && s <= total) out.push_back(s);
  }
  if (out.empty()) out.push_back(1);
  return out;
}

std::uint64_t shared_pages_for_stride(const KernelSpec& spec, std::uint64_t page_size, std::uint64_t stride) {
  if (stride == 0) throw Error("stride must be >= 1");
  return shared_fixed(page_accessors(profile_block_pages(spec, page_size)), stride);
}

StrideProfile profile_stride(const KernelSpec& spec, std::uint64_t page_size, const ProfileOptions& opts) {
  if (page_size == 0) throw Error("page size must be > 0");
  const auto acc = page_accessors(profile_block_pages(spec, page_size));
  if (acc.empty()) throw Error("kernel issues no memory accesses");

  StrideProfile best;
  best.total_pages = acc.size();
  best.shared_pages = std::numeric_limits<std::uint64_t>::max();
  for (auto s : stride_candidates(spec, page_size, opts)) {
    const auto shared = shared_fixed(acc, s);
    if (shared < best.shared_pages) {  // strict: ties keep the smaller stride
      best.shared_pages = shared;
      best.stride = s;
    }
  }
  best.formation = Formation::FixedStride;

  if (opts.try_modulation && best.shared_pages > 0) {
    const std::uint64_t limit = std::min<std::uint64_t>(opts.max_modulus, spec.total_blocks() - 1);
    for (std::uint64_t m = 2; m <= limit; ++m) {
      const auto shared = shared_modulo(acc, m);
      if (shared < best.shared_pages) {
        best.shared_pages = shared;
        best.modulus = m;
        best.formation = Formation::Modulation;
      }
    }
  }

  const double frac = static_cast<double>(best.shared_pages) / static_cast<double>(best.total_pages);
  if (frac > opts.fallback_threshold) {
    best.formation = Formation::Fallback;
    best.modulus = 0;
  }
  return best;
}

BatchPlan form_batches(const KernelSpec& spec, std::uint64_t stride, std::uint64_t page_size) {
  if (stride == 0) throw Error("stride must be >= 1");
  if (page_size == 0) throw Error("page size must be > 0");
  BatchPlan plan;
  plan.kernel = spec.name;
  plan.page_size = page_size;
  plan.formation = Formation::FixedStride;
  const std::uint64_t total = spec.total_blocks();
  if (stride > total) {
    plan.warnings.push_back("stride " + std::to_string(stride) + " exceeds block count " +
                            std::to_string(total) + "; forming a single batch");
    stride = total;
  }
  plan.stride = stride;
  for (std::uint64_t b = 0; b < total; ++b) {
    if (b % stride == 0) plan.batches.push_back({plan.batches.size(), {}, {}});
    plan.batches.back().block_ids.push_back(b);
  }
  fill_page_sets(spec, plan);
  return plan;
}

BatchPlan form_modulo_batches(const KernelSpec& spec, std::uint64_t modulus, std::uint64_t page_size) {
  if (modulus == 0) throw Error("modulus must be >= 1");
  BatchPlan plan;
  plan.kernel = spec.name;
  plan.page_size = page_size;
  plan.formation = Formation::Modulation;
  const std::uint64_t total = spec.total_blocks();
  modulus = std::min(modulus, total);
  plan.modulus = modulus;
  plan.stride = (total + modulus - 1) / modulus;
  plan.batches.resize(modulus);
  for (std::uint64_t i = 0; i < modulus; ++i) plan.batches[i].batch_id = i;
  for (std::uint64_t b = 0; b < total; ++b) plan.batches[b % modulus].block_ids.push_back(b);
  fill_page_sets(spec, plan);
  return plan;
}

BatchPlan plan_kernel(const KernelSpec& spec, std::uint64_t page_size, const ProfileOptions& opts) {
  const auto prof = profile_stride(spec, page_size, opts);
  BatchPlan plan = prof.formation == Formation::Modulation
                       ? form_modulo_batches(spec, prof.modulus, page_size)
                       : form_batches(spec, prof.stride, page_size);
  if (prof.formation == Formation::Fallback) {
    plan.formation = Formation::Fallback;
    plan.warnings.push_back("no grouping keeps shared pages under the fallback threshold (" +
                            std::to_string(prof.shared_pages) + " of " + std::to_string(prof.total_pages) +
                            " pages shared)");
  }
  return plan;
}

SharingHistogram sharing_histogram(const BatchPlan& plan) {
  std::unordered_map<std::uint64_t, std::pair<std::uint64_t, std::uint64_t>> span;
  for (std::uint64_t i = 0; i < plan.batches.size(); ++i) {
    for (auto p : plan.batches[i].page_set) {
      auto [it, inserted] = span.try_emplace(p, i, i);
      if (!inserted) {
        it->second.first = std::min(it->second.first, i);
        it->second.second = std::max(it->second.second, i);
      }
    }
  }
  SharingHistogram h;
  h.total_pages = span.size();
  for (const auto& [page, mm] : span) ++h.bins[mm.second - mm.first];
  return h;
}

json to_json(const SharingHistogram& h) {
  json bins = json::object();
  for (const auto& [d, n] : h.bins) bins[std::to_string(d)] = n;
  return {{"bins", bins}, {"total_pages", h.total_pages}, {"exclusive_fraction", h.exclusive_fraction()}};
}

json to_json(const BatchPlan& plan) {
  json batches = json::array();
  for (const auto& b : plan.batches) {
    batches.push_back({{"batch_id", b.batch_id}, {"block_ids", b.block_ids}, {"page_set", b.page_set}});
  }
  return {{"schema_version", kBatchPlanSchemaVersion},
          {"kernel", plan.kernel},
          {"stride", plan.stride},
          {"modulus", plan.modulus},
          {"formation", to_string(plan.formation)},
          {"page_size", plan.page_size},
          {"warnings", plan.warnings},
          {"batches", batches}};
}

BatchPlan plan_from_json(const json& j) {
  FieldReader r(j, "plan");
  const int version = r.get<int>("schema_version");
  if (version != kBatchPlanSchemaVersion) {
    throw ConfigError("plan.schema_version", "unsupported plan schema " + std::to_string(version));
  }
  BatchPlan plan;
  plan.kernel = r.get<std::string>("kernel");
  plan.stride = r.get<std::uint64_t>("stride");
  plan.modulus = r.get_or<std::uint64_t>("modulus", 0);
  const auto f = r.get<std::string>("formation");
  if (f == "FixedStride") plan.formation = Formation::FixedStride;
  else if (f == "Modulation") plan.formation = Formation::Modulation;
  else if (f == "Fallback") plan.formation = Formation::Fallback;
  else throw ConfigError("plan.formation", "unknown formation '" + f + "'");
  plan.page_size = r.get<std::uint64_t>("page_size");
  plan.warnings = r.get_or<std::vector<std::string>>("warnings", {});
  const json& bs = r.raw("batches");
  if (!bs.is_array()) throw ConfigError("plan.batches", "expected an array");
  for (std::size_t i = 0; i < bs.size(); ++i) {
    FieldReader br(bs[i], "plan.batches[" + std::to_string(i) + "]");
    ThreadBatch tb;
    tb.batch_id = br.get<std::uint64_t>("batch_id");
    tb.block_ids = br.get<std::vector<std::uint64_t>>("block_ids");
    const auto pages = br.get<std::vector<std::uint64_t>>("page_set");
    tb.page_set.insert(pages.begin(), pages.end());
    br.finish();
    plan.batches.push_back(std::move(tb));
  }
  r.ignore({"histogram"});
  r.finish();
  return plan;
}

}  // namespace gms
