#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "gms/batching.hpp"

namespace gms {

// Physical address bit fields, least significant first:
//   | row | bank | channel | column | byte |
// A page covers the low page_offset_bits. When page_offset_bits does not
// exceed column_bits + byte_offset_bits, every frame lies inside a single
// (channel, bank, row), so the OS can pick the bank by picking the frame.
struct AddressLayout {
  std::uint32_t byte_offset_bits = 6;
  std::uint32_t column_bits = 7;
  std::uint32_t channel_bits = 1;
  std::uint32_t bank_bits = 4;
  std::uint32_t row_bits = 14;
  std::uint32_t page_offset_bits = 12;

  std::uint32_t address_width() const {
    return byte_offset_bits + column_bits + channel_bits + bank_bits + row_bits;
  }
  std::uint32_t num_channels() const { return 1u << channel_bits; }
  std::uint32_t banks_per_channel() const { return 1u << bank_bits; }
  std::uint64_t num_rows() const { return std::uint64_t{1} << row_bits; }
  std::uint64_t page_size() const { return std::uint64_t{1} << page_offset_bits; }
  std::uint64_t num_frames() const { return std::uint64_t{1} << (address_width() - page_offset_bits); }
  bool coloring_feasible() const { return page_offset_bits <= column_bits + byte_offset_bits; }
  // Frames that share one DRAM row of one bank.
  std::uint64_t frames_per_row() const {
    return coloring_feasible() ? std::uint64_t{1} << (column_bits + byte_offset_bits - page_offset_bits) : 1;
  }

  // Throws ConfigError. require_coloring additionally enforces the
  // coloring feasibility condition.
  void validate(bool require_coloring, const std::string& where = "layout") const;
  bool operator==(const AddressLayout&) const = default;
};

struct DramCoord {
  std::uint32_t channel = 0;
  std::uint32_t bank = 0;
  std::uint64_t row = 0;
  std::uint32_t column = 0;
  std::uint32_t byte = 0;
  auto operator<=>(const DramCoord&) const = default;
};

// Pure bit slicing. decompose throws Error for addresses >= 2^width.
DramCoord decompose(std::uint64_t addr, const AddressLayout& layout);
std::uint64_t compose(const DramCoord& c, const AddressLayout& layout);

enum class Pool : std::uint8_t { GDDR = 0, DDR = 1 };
enum class AllocPolicy { LocalFirstTouch, Coloring, BwAware, ColoringHetero };
enum class Agent : std::uint8_t { Gpu, Cpu };
enum class Locality { Local, Remote };

const char* to_string(Pool p);
const char* to_string(AllocPolicy p);

struct Color {
  std::uint32_t channel = 0;
  std::uint32_t bank = 0;
  auto operator<=>(const Color&) const = default;
};

struct PhysFrame {
  Pool pool = Pool::GDDR;
  std::uint64_t frame = 0;
  auto operator<=>(const PhysFrame&) const = default;
};

// (channel, bank) colors of the GDDR pool divided evenly and contiguously
// among SMs. Color index = bank * channels + channel, so every SM gets
// banks in all channels when the division allows it.
class ColorMap {
 public:
  ColorMap(const AddressLayout& layout, std::uint32_t num_sms);
  const std::vector<Color>& colors_of(std::uint32_t sm) const { return by_sm_.at(sm); }
  std::optional<std::uint32_t> owner(Color c) const;
  bool contains(std::uint32_t sm, Color c) const;
  std::uint32_t num_sms() const { return static_cast<std::uint32_t>(by_sm_.size()); }

 private:
  std::vector<std::vector<Color>> by_sm_;
  std::map<Color, std::uint32_t> owner_;
};

// Row split of every bank for the heterogeneous allocator: GPU frames use
// rows [0, gpu_row_end), CPU frames use rows [gpu_row_end, total_rows).
struct FrameRegion {
  std::uint64_t gpu_row_end = 0;
  std::uint64_t total_rows = 0;
  bool is_cpu_row(std::uint64_t row) const { return row >= gpu_row_end; }
};

struct PageTableConfig {
  AllocPolicy policy = AllocPolicy::LocalFirstTouch;
  AddressLayout gddr;
  AddressLayout ddr{6, 7, 0, 3, 14, 12};
  std::uint32_t num_sms = 8;
  std::uint32_t bw_gddr = 2;  // placement ratio for BwAware
  std::uint32_t bw_ddr = 1;
  double cpu_row_fraction = 0.25;  // share of each bank's rows reserved for CPU
  Pool cpu_pool = Pool::GDDR;
};

struct PageEntry {
  std::uint64_t vpn = 0;
  PhysFrame frame;
  Agent agent = Agent::Gpu;
  std::optional<std::uint32_t> owner_sm;
  bool spilled = false;
};

class PageTable {
 public:
  explicit PageTable(PageTableConfig cfg);

  // Allocates a frame for vpn under the configured policy. owner_sm is the
  // SM the page is bound to (required for GPU pages under coloring
  // policies). Throws AllocationFault when the pool is exhausted; returns the
  // existing frame if vpn is already mapped.
  PhysFrame allocate_page(std::uint64_t vpn, Agent agent, std::optional<std::uint32_t> owner_sm);

  // Allocates every page of every batch in batch order, binding batch i to
  // owner_of_batch[i]. Pages shared with an earlier batch keep their frame.
  void allocate_batches(const BatchPlan& plan, std::span<const std::uint32_t> owner_of_batch);

  std::optional<PhysFrame> lookup(std::uint64_t vpn) const;
  const PageEntry* entry(std::uint64_t vpn) const;

  const AddressLayout& layout(Pool p) const { return p == Pool::GDDR ? cfg_.gddr : cfg_.ddr; }
  std::uint64_t physical_address(PhysFrame f, std::uint64_t page_offset) const;
  DramCoord frame_coord(PhysFrame f) const;
  Color color_of(PhysFrame f) const;

  // Local iff the frame's (channel, bank) belongs to sm under the color map.
  // The color map is defined for every policy so runs stay comparable.
  Locality classify_access(std::uint32_t sm, PhysFrame f) const;

  const ColorMap& color_map() const { return colors_; }
  const FrameRegion& region() const { return region_; }
  const PageTableConfig& config() const { return cfg_; }
  std::uint64_t spills() const { return spills_; }
  const std::vector<std::string>& events() const { return events_; }
  std::size_t size() const { return entries_.size(); }
  const std::map<std::uint64_t, PageEntry>& entries() const { return entries_; }

  // CSV: vpn,agent,pool,channel,bank,row,owner_sm,spilled
  void write_csv(std::ostream& os) const;

 private:
  PhysFrame take_any(Pool pool, std::uint64_t row_lo, std::uint64_t row_hi);
  std::optional<PhysFrame> take_colored(std::uint32_t sm, std::uint64_t row_lo, std::uint64_t row_hi);
  std::uint64_t frame_index(Pool pool, std::uint64_t row, Color c, std::uint64_t half) const;
  bool used(PhysFrame f) const;
  void mark(PhysFrame f);

  PageTableConfig cfg_;
  ColorMap colors_;
  FrameRegion region_;
  std::map<std::uint64_t, PageEntry> entries_;
  std::vector<bool> used_[2];
  std::map<std::pair<int, std::uint64_t>, std::uint64_t> any_cursor_;
  std::vector<std::uint64_t> color_cursor_;  // per SM slot sequence position
  std::uint64_t gpu_pages_ = 0;
  std::uint64_t spills_ = 0;
  std::vector<std::string> events_;
};

AllocPolicy alloc_policy_from_string(const std::string& s, const std::string& where);
Pool pool_from_string(const std::string& s, const std::string& where);
nlohmann::json to_json(const AddressLayout& l);
AddressLayout layout_from_json(const nlohmann::json& j, const std::string& path, AddressLayout defaults);

}  // namespace gms
