#include "gms/dram.hpp"

#include <tuple>

#include "gms/error.hpp"
#include "gms/json_fields.hpp"

namespace gms {

void TimingParams::validate(const std::string& where) const {
  auto positive = [&](std::uint32_t v, const char* name) {
    if (v < 1) throw ConfigError(where + "." + name, "must be >= 1");
  };
  positive(tRCD, "tRCD");
  positive(tRP, "tRP");
  positive(tCAS, "tCAS");
  positive(tRC, "tRC");
  positive(tBURST, "tBURST");
  if (tRC < tRCD) throw ConfigError(where + ".tRC", "must be >= tRCD");
  if (!(clock_period > 0)) throw ConfigError(where + ".clock_period", "must be > 0");
}

void EnergyParams::validate(const std::string& where) const {
  if (e_activate < 0) throw ConfigError(where + ".e_activate", "must be >= 0");
  if (e_read < 0) throw ConfigError(where + ".e_read", "must be >= 0");
  if (e_write < 0) throw ConfigError(where + ".e_write", "must be >= 0");
  if (p_background < 0) throw ConfigError(where + ".p_background", "must be >= 0");
}

BankCounters& BankCounters::operator+=(const BankCounters& o) {
  activates += o.activates;
  reads += o.reads;
  writes += o.writes;
  row_hits += o.row_hits;
  row_switches += o.row_switches;
  return *this;
}

const char* to_string(Arbitration a) {
  return a == Arbitration::FrFcfs ? "FrFcfs" : "FrFcfsCpuPrio";
}

Arbitration arbitration_from_string(const std::string& s, const std::string& where) {
  if (s == "FrFcfs") return Arbitration::FrFcfs;
  if (s == "FrFcfsCpuPrio") return Arbitration::FrFcfsCpuPrio;
  throw ConfigError(where, "unknown arbitration '" + s + "'");
}

std::optional<std::size_t> mc_pick(std::span<const MemoryRequest> queue, std::span<const BankState> banks,
                                   std::uint64_t cycle, Arbitration arb, std::optional<std::uint32_t> aging_cap) {
  std::optional<std::size_t> best;
  std::tuple<int, int, int> best_key{};
  for (std::size_t i = 0; i < queue.size(); ++i) {
    const auto& r = queue[i];
    const auto& b = banks[r.bank];
    if (!b.ready(cycle)) continue;
    const int aged = aging_cap && r.bypassed >= *aging_cap ? 0 : 1;
    const int cls = arb == Arbitration::FrFcfsCpuPrio && r.agent == Agent::Cpu ? 0 : 1;
    const int hit = b.open_row && *b.open_row == r.row ? 0 : 1;
    const std::tuple<int, int, int> key{aged, cls, hit};
    // Strict comparison keeps the oldest among equal keys.
    if (!best || key < best_key) {
      best = i;
      best_key = key;
    }
  }
  return best;
}

BankAdvance bank_advance(BankState& bank, const MemoryRequest& req, const TimingParams& t, std::uint64_t cycle) {
  if (!bank.ready(cycle)) {
    throw SimFault(cycle, "request " + std::to_string(req.id) + " issued to bank " + std::to_string(req.bank) +
                              " busy until " + std::to_string(bank.busy_until));
  }
  BankAdvance out;
  std::uint64_t lat = t.tCAS + t.tBURST;
  if (bank.open_row && *bank.open_row == req.row) {
    out.row_hit = true;
    ++bank.counters.row_hits;
  } else {
    if (bank.open_row) {
      lat += t.tRP;
      ++bank.counters.row_switches;
    }
    lat += t.tRCD;
    ++bank.counters.activates;
    bank.open_row = req.row;
  }
  if (req.is_read) ++bank.counters.reads;
  else ++bank.counters.writes;
  out.complete = cycle + lat;
  bank.busy_until = out.complete;
  return out;
}

MemoryController::MemoryController(Pool pool, std::uint32_t channel, std::uint32_t num_banks, std::size_t capacity,
                                   TimingParams timing, Arbitration arb, std::optional<std::uint32_t> aging_cap)
    : pool_(pool),
      channel_(channel),
      capacity_(capacity),
      timing_(timing),
      arb_(arb),
      aging_cap_(aging_cap),
      banks_(num_banks) {
  if (capacity_ == 0) throw ConfigError("memory.queue_capacity", "must be >= 1");
}

bool MemoryController::try_enqueue(MemoryRequest req, std::uint64_t cycle) {
  if (full()) return false;
  req.t_enqueue = cycle;
  if (req.bank >= banks_.size()) throw SimFault(cycle, "bank index out of range");
  queue_.push_back(std::move(req));
  if (queue_.size() > peak_) peak_ = queue_.size();
  return true;
}

std::optional<MemoryRequest> MemoryController::step(std::uint64_t cycle) {
  if (queue_.empty()) return std::nullopt;
  const auto idx = mc_pick(queue_, banks_, cycle, arb_, aging_cap_);
  if (!idx) return std::nullopt;
  for (std::size_t j = 0; j < *idx; ++j) {
    if (banks_[queue_[j].bank].ready(cycle)) ++queue_[j].bypassed;
  }
  MemoryRequest r = std::move(queue_[*idx]);
  queue_.erase(queue_.begin() + static_cast<std::ptrdiff_t>(*idx));
  const auto adv = bank_advance(banks_[r.bank], r, timing_, cycle);
  r.t_issue = cycle;
  r.t_complete = adv.complete;
  r.row_hit = adv.row_hit;
  return r;
}

EnergyBreakdown& EnergyBreakdown::operator+=(const EnergyBreakdown& o) {
  activate += o.activate;
  read_write += o.read_write;
  background += o.background;
  return *this;
}

EnergyBreakdown energy_total(const BankCounters& c, const EnergyParams& p, std::uint64_t num_banks,
                             std::uint64_t runtime_cycles) {
  EnergyBreakdown e;
  e.activate = static_cast<double>(c.activates) * p.e_activate;
  e.read_write = static_cast<double>(c.reads) * p.e_read + static_cast<double>(c.writes) * p.e_write;
  e.background = static_cast<double>(num_banks) * p.p_background * static_cast<double>(runtime_cycles);
  return e;
}

json to_json(const TimingParams& t) {
  return {{"tRCD", t.tRCD}, {"tRP", t.tRP},       {"tCAS", t.tCAS},
          {"tRC", t.tRC},   {"tBURST", t.tBURST}, {"clock_period", t.clock_period}};
}

TimingParams timing_from_json(const json& j, const std::string& path, TimingParams d) {
  FieldReader r(j, path);
  TimingParams t;
  t.tRCD = r.get_or<std::uint32_t>("tRCD", d.tRCD);
  t.tRP = r.get_or<std::uint32_t>("tRP", d.tRP);
  t.tCAS = r.get_or<std::uint32_t>("tCAS", d.tCAS);
  t.tRC = r.get_or<std::uint32_t>("tRC", d.tRC);
  t.tBURST = r.get_or<std::uint32_t>("tBURST", d.tBURST);
  t.clock_period = r.get_or<double>("clock_period", d.clock_period);
  r.finish();
  t.validate(path);
  return t;
}

json to_json(const EnergyParams& e) {
  return {{"e_activate", e.e_activate}, {"e_read", e.e_read}, {"e_write", e.e_write}, {"p_background", e.p_background}};
}

EnergyParams energy_from_json(const json& j, const std::string& path, EnergyParams d) {
  FieldReader r(j, path);
  EnergyParams e;
  e.e_activate = r.get_or<double>("e_activate", d.e_activate);
  e.e_read = r.get_or<double>("e_read", d.e_read);
  e.e_write = r.get_or<double>("e_write", d.e_write);
  e.p_background = r.get_or<double>("p_background", d.p_background);
  r.finish();
  e.validate(path);
  return e;
}

}  // namespace gms
