#include "gms/memmap.hpp"

#include <cmath>

#include "gms/error.hpp"
#include "gms/json_fields.hpp"

namespace gms {

namespace {

std::uint64_t mask(std::uint32_t bits) {
  return bits >= 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << bits) - 1;
}

}  // namespace

const char* to_string(Pool p) { return p == Pool::GDDR ? "GDDR" : "DDR"; }

const char* to_string(AllocPolicy p) {
  switch (p) {
    case AllocPolicy::LocalFirstTouch: return "LocalFirstTouch";
    case AllocPolicy::Coloring: return "Coloring";
    case AllocPolicy::BwAware: return "BwAware";
    case AllocPolicy::ColoringHetero: return "ColoringHetero";
  }
  return "?";
}

AllocPolicy alloc_policy_from_string(const std::string& s, const std::string& where) {
  if (s == "LocalFirstTouch") return AllocPolicy::LocalFirstTouch;
  if (s == "Coloring") return AllocPolicy::Coloring;
  if (s == "BwAware") return AllocPolicy::BwAware;
  if (s == "ColoringHetero") return AllocPolicy::ColoringHetero;
  throw ConfigError(where, "unknown allocator '" + s + "'");
}

Pool pool_from_string(const std::string& s, const std::string& where) {
  if (s == "GDDR") return Pool::GDDR;
  if (s == "DDR") return Pool::DDR;
  throw ConfigError(where, "unknown pool '" + s + "'");
}

void AddressLayout::validate(bool require_coloring, const std::string& where) const {
  if (address_width() > 48) throw ConfigError(where, "address width above 48 bits");
  if (row_bits == 0) throw ConfigError(where + ".row_bits", "must be >= 1");
  if (page_offset_bits < byte_offset_bits) {
    throw ConfigError(where + ".page_offset_bits", "page must cover the byte offset field");
  }
  if (page_offset_bits + row_bits > address_width()) {
    throw ConfigError(where + ".page_offset_bits", "page may not reach into the row field");
  }
  if (address_width() - page_offset_bits > 28) {
    throw ConfigError(where, "more than 2^28 frames per pool");
  }
  if (require_coloring && !coloring_feasible()) {
    throw ConfigError(where + ".page_offset_bits",
                      "page coloring needs page_offset_bits <= column_bits + byte_offset_bits (" +
                          std::to_string(page_offset_bits) + " > " +
                          std::to_string(column_bits + byte_offset_bits) + ")");
  }
}

DramCoord decompose(std::uint64_t addr, const AddressLayout& l) {
  if (l.address_width() < 64 && (addr >> l.address_width()) != 0) {
    throw Error("address " + std::to_string(addr) + " outside the " + std::to_string(l.address_width()) +
                "-bit physical space");
  }
  DramCoord c;
  unsigned shift = 0;
  c.byte = static_cast<std::uint32_t>((addr >> shift) & mask(l.byte_offset_bits));
  shift += l.byte_offset_bits;
  c.column = static_cast<std::uint32_t>((addr >> shift) & mask(l.column_bits));
  shift += l.column_bits;
  c.channel = static_cast<std::uint32_t>((addr >> shift) & mask(l.channel_bits));
  shift += l.channel_bits;
  c.bank = static_cast<std::uint32_t>((addr >> shift) & mask(l.bank_bits));
  shift += l.bank_bits;
  c.row = (addr >> shift) & mask(l.row_bits);
  return c;
}

std::uint64_t compose(const DramCoord& c, const AddressLayout& l) {
  std::uint64_t addr = 0;
  unsigned shift = 0;
  addr |= (std::uint64_t{c.byte} & mask(l.byte_offset_bits)) << shift;
  shift += l.byte_offset_bits;
  addr |= (std::uint64_t{c.column} & mask(l.column_bits)) << shift;
  shift += l.column_bits;
  addr |= (std::uint64_t{c.channel} & mask(l.channel_bits)) << shift;
  shift += l.channel_bits;
  addr |= (std::uint64_t{c.bank} & mask(l.bank_bits)) << shift;
  shift += l.bank_bits;
  addr |= (c.row & mask(l.row_bits)) << shift;
  return addr;
}

ColorMap::ColorMap(const AddressLayout& layout, std::uint32_t num_sms) : by_sm_(num_sms) {
  if (num_sms == 0) throw ConfigError("num_sms", "must be >= 1");
  const std::uint32_t channels = layout.num_channels();
  const std::uint64_t ncolors = std::uint64_t{channels} * layout.banks_per_channel();
  if (ncolors < num_sms) {
    throw ConfigError("memory.gddr.layout", "fewer (channel,bank) colors (" + std::to_string(ncolors) +
                                                ") than SMs (" + std::to_string(num_sms) + ")");
  }
  for (std::uint64_t ci = 0; ci < ncolors; ++ci) {
    const Color c{static_cast<std::uint32_t>(ci % channels), static_cast<std::uint32_t>(ci / channels)};
    const auto sm = static_cast<std::uint32_t>(ci * num_sms / ncolors);
    by_sm_[sm].push_back(c);
    owner_[c] = sm;
  }
}

std::optional<std::uint32_t> ColorMap::owner(Color c) const {
  auto it = owner_.find(c);
  if (it == owner_.end()) return std::nullopt;
  return it->second;
}

bool ColorMap::contains(std::uint32_t sm, Color c) const {
  auto o = owner(c);
  return o && *o == sm;
}

PageTable::PageTable(PageTableConfig cfg) : cfg_(std::move(cfg)), colors_(cfg_.gddr, cfg_.num_sms) {
  const bool coloring = cfg_.policy == AllocPolicy::Coloring || cfg_.policy == AllocPolicy::ColoringHetero;
  cfg_.gddr.validate(coloring, "memory.gddr.layout");
  cfg_.ddr.validate(false, "memory.ddr.layout");
  if (cfg_.gddr.page_offset_bits != cfg_.ddr.page_offset_bits) {
    throw ConfigError("memory.ddr.layout.page_offset_bits", "both pools must use the same page size");
  }
  if (cfg_.policy == AllocPolicy::BwAware && cfg_.bw_gddr + cfg_.bw_ddr == 0) {
    throw ConfigError("memory.bw_ratio", "ratio must not be all zero");
  }
  used_[0].assign(cfg_.gddr.num_frames(), false);
  used_[1].assign(cfg_.ddr.num_frames(), false);
  color_cursor_.assign(cfg_.num_sms, 0);

  const AddressLayout& hl = cfg_.gddr;
  region_.total_rows = hl.num_rows();
  region_.gpu_row_end = hl.num_rows();
  if (cfg_.policy == AllocPolicy::ColoringHetero) {
    if (cfg_.cpu_pool != Pool::GDDR) {
      throw ConfigError("memory.cpu_pool", "the heterogeneous row split needs CPU pages in the GDDR pool");
    }
    if (!(cfg_.cpu_row_fraction > 0.0 && cfg_.cpu_row_fraction < 1.0)) {
      throw ConfigError("memory.cpu_row_fraction", "must lie strictly between 0 and 1");
    }
    const auto cpu_rows = static_cast<std::uint64_t>(
        std::llround(static_cast<double>(hl.num_rows()) * cfg_.cpu_row_fraction));
    region_.gpu_row_end = hl.num_rows() - std::max<std::uint64_t>(1, cpu_rows);
    if (region_.gpu_row_end == 0) throw ConfigError("memory.cpu_row_fraction", "leaves no GPU rows");
  }
}

bool PageTable::used(PhysFrame f) const { return used_[static_cast<int>(f.pool)][f.frame]; }

void PageTable::mark(PhysFrame f) { used_[static_cast<int>(f.pool)][f.frame] = true; }

std::uint64_t PageTable::frame_index(Pool pool, std::uint64_t row, Color c, std::uint64_t half) const {
  const AddressLayout& l = layout(pool);
  DramCoord coord;
  coord.channel = c.channel;
  coord.bank = c.bank;
  coord.row = row;
  coord.column = static_cast<std::uint32_t>(half << (l.page_offset_bits - l.byte_offset_bits));
  return compose(coord, l) >> l.page_offset_bits;
}

PhysFrame PageTable::take_any(Pool pool, std::uint64_t row_lo, std::uint64_t row_hi) {
  const AddressLayout& l = layout(pool);
  const unsigned row_shift = l.address_width() - l.row_bits - l.page_offset_bits;
  const std::uint64_t lo = row_lo << row_shift;
  const std::uint64_t hi = row_hi << row_shift;
  // One forward-only cursor per (pool, region start).
  std::uint64_t& cursor = any_cursor_[{static_cast<int>(pool), row_lo}];
  std::uint64_t f = std::max(cursor, lo);
  while (f < hi && used({pool, f})) ++f;
  if (f >= hi) {
    throw AllocationFault(std::string(to_string(pool)) + " pool exhausted in rows [" + std::to_string(row_lo) +
                          "," + std::to_string(row_hi) + ")");
  }
  cursor = f + 1;
  return {pool, f};
}

std::optional<PhysFrame> PageTable::take_colored(std::uint32_t sm, std::uint64_t row_lo, std::uint64_t row_hi) {
  const auto& mine = colors_.colors_of(sm);
  const std::uint64_t per_row = cfg_.gddr.frames_per_row();
  const std::uint64_t per_sweep = mine.size() * per_row;
  std::uint64_t& k = color_cursor_[sm];
  while (true) {
    const std::uint64_t row = row_lo + k / per_sweep;
    if (row >= row_hi) return std::nullopt;
    const Color c = mine[(k / per_row) % mine.size()];
    const std::uint64_t half = k % per_row;
    ++k;
    const PhysFrame f{Pool::GDDR, frame_index(Pool::GDDR, row, c, half)};
    if (!used(f)) return f;
  }
}

PhysFrame PageTable::allocate_page(std::uint64_t vpn, Agent agent, std::optional<std::uint32_t> owner_sm) {
  if (auto it = entries_.find(vpn); it != entries_.end()) return it->second.frame;

  PageEntry e;
  e.vpn = vpn;
  e.agent = agent;
  e.owner_sm = owner_sm;

  if (agent == Agent::Cpu) {
    const std::uint64_t rows = layout(cfg_.cpu_pool).num_rows();
    e.frame = cfg_.policy == AllocPolicy::ColoringHetero ? take_any(cfg_.cpu_pool, region_.gpu_row_end, rows)
                                                         : take_any(cfg_.cpu_pool, 0, rows);
  } else {
    const std::uint64_t rows = cfg_.gddr.num_rows();
    switch (cfg_.policy) {
      case AllocPolicy::LocalFirstTouch:
        e.frame = take_any(Pool::GDDR, 0, rows);
        break;
      case AllocPolicy::Coloring:
      case AllocPolicy::ColoringHetero: {
        if (!owner_sm || *owner_sm >= cfg_.num_sms) {
          throw Error("coloring allocation of vpn " + std::to_string(vpn) + " without a valid owner SM");
        }
        const std::uint64_t hi = cfg_.policy == AllocPolicy::ColoringHetero ? region_.gpu_row_end : rows;
        if (auto f = take_colored(*owner_sm, 0, hi)) {
          e.frame = *f;
        } else {
          e.frame = take_any(Pool::GDDR, 0, hi);
          e.spilled = true;
          ++spills_;
          events_.push_back("remote-able page: vpn " + std::to_string(vpn) + " of SM " +
                            std::to_string(*owner_sm) + " spilled outside its colors");
        }
        break;
      }
      case AllocPolicy::BwAware: {
        const std::uint64_t g = cfg_.bw_gddr, d = cfg_.bw_ddr, k = gpu_pages_;
        const bool to_ddr = ((k + 1) * d) / (g + d) > (k * d) / (g + d);
        const Pool pool = to_ddr ? Pool::DDR : Pool::GDDR;
        e.frame = take_any(pool, 0, layout(pool).num_rows());
        break;
      }
    }
    ++gpu_pages_;
  }
  mark(e.frame);
  entries_.emplace(vpn, e);
  return e.frame;
}

void PageTable::allocate_batches(const BatchPlan& plan, std::span<const std::uint32_t> owner_of_batch) {
  if (owner_of_batch.size() != plan.batches.size()) {
    throw Error("allocate_batches: one owner SM per batch required");
  }
  for (std::size_t i = 0; i < plan.batches.size(); ++i) {
    for (auto vpn : plan.batches[i].page_set) allocate_page(vpn, Agent::Gpu, owner_of_batch[i]);
  }
}

std::optional<PhysFrame> PageTable::lookup(std::uint64_t vpn) const {
  auto it = entries_.find(vpn);
  if (it == entries_.end()) return std::nullopt;
  return it->second.frame;
}

const PageEntry* PageTable::entry(std::uint64_t vpn) const {
  auto it = entries_.find(vpn);
  return it == entries_.end() ? nullptr : &it->second;
}

std::uint64_t PageTable::physical_address(PhysFrame f, std::uint64_t page_offset) const {
  const AddressLayout& l = layout(f.pool);
  return (f.frame << l.page_offset_bits) | (page_offset & mask(l.page_offset_bits));
}

DramCoord PageTable::frame_coord(PhysFrame f) const {
  return decompose(physical_address(f, 0), layout(f.pool));
}

Color PageTable::color_of(PhysFrame f) const {
  const auto c = frame_coord(f);
  return {c.channel, c.bank};
}

Locality PageTable::classify_access(std::uint32_t sm, PhysFrame f) const {
  if (f.pool != Pool::GDDR) return Locality::Remote;
  return colors_.contains(sm, color_of(f)) ? Locality::Local : Locality::Remote;
}

void PageTable::write_csv(std::ostream& os) const {
  os << "vpn,agent,pool,channel,bank,row,owner_sm,spilled\n";
  for (const auto& [vpn, e] : entries_) {
    const auto c = frame_coord(e.frame);
    os << vpn << ',' << (e.agent == Agent::Gpu ? "GPU" : "CPU") << ',' << to_string(e.frame.pool) << ','
       << c.channel << ',' << c.bank << ',' << c.row << ',';
    if (e.owner_sm) os << *e.owner_sm;
    os << ',' << (e.spilled ? 1 : 0) << '\n';
  }
}

json to_json(const AddressLayout& l) {
  return {{"byte_offset_bits", l.byte_offset_bits}, {"column_bits", l.column_bits},
          {"channel_bits", l.channel_bits},         {"bank_bits", l.bank_bits},
          {"row_bits", l.row_bits},                 {"page_offset_bits", l.page_offset_bits}};
}

AddressLayout layout_from_json(const json& j, const std::string& path, AddressLayout d) {
  FieldReader r(j, path);
  AddressLayout l;
  l.byte_offset_bits = r.get_or<std::uint32_t>("byte_offset_bits", d.byte_offset_bits);
  l.column_bits = r.get_or<std::uint32_t>("column_bits", d.column_bits);
  l.channel_bits = r.get_or<std::uint32_t>("channel_bits", d.channel_bits);
  l.bank_bits = r.get_or<std::uint32_t>("bank_bits", d.bank_bits);
  l.row_bits = r.get_or<std::uint32_t>("row_bits", d.row_bits);
  l.page_offset_bits = r.get_or<std::uint32_t>("page_offset_bits", d.page_offset_bits);
  r.finish();
  return l;
}

}  // namespace gms
