#include "gms/engine.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <optional>
#include <queue>

#include "gms/dispatch.hpp"
#include "gms/error.hpp"
#include "gms/sched.hpp"

namespace gms {

namespace {

constexpr std::uint64_t kEmpty = ~std::uint64_t{0};

class L1Cache {
 public:
  explicit L1Cache(const L1Config& c) : sets_(c.num_sets()), assoc_(c.assoc), ways_(std::size_t{sets_} * assoc_) {}

  bool probe(std::uint64_t line) const {
    const std::size_t base = set_base(line);
    for (std::uint32_t w = 0; w < assoc_; ++w) {
      if (ways_[base + w].tag == line) return true;
    }
    return false;
  }

  // Lookup with LRU update.
  bool access(std::uint64_t line) {
    const std::size_t base = set_base(line);
    for (std::uint32_t w = 0; w < assoc_; ++w) {
      if (ways_[base + w].tag == line) {
        ways_[base + w].stamp = ++clock_;
        return true;
      }
    }
    return false;
  }

  void fill(std::uint64_t line) {
    if (access(line)) return;
    const std::size_t base = set_base(line);
    std::size_t victim = base;
    for (std::uint32_t w = 0; w < assoc_; ++w) {
      const auto& way = ways_[base + w];
      if (way.tag == kEmpty) {
        victim = base + w;
        break;
      }
      if (way.stamp < ways_[victim].stamp) victim = base + w;
    }
    ways_[victim] = {line, ++clock_};
  }

 private:
  struct Way {
    std::uint64_t tag = kEmpty;
    std::uint64_t stamp = 0;
  };
  std::size_t set_base(std::uint64_t line) const { return static_cast<std::size_t>(line % sets_) * assoc_; }

  std::uint32_t sets_;
  std::uint32_t assoc_;
  std::vector<Way> ways_;
  std::uint64_t clock_ = 0;
};

struct Instr {
  std::vector<std::uint64_t> vlines;  // distinct virtual line addresses
  bool is_read = true;
};

struct WarpRun {
  std::uint64_t block = 0;
  std::uint64_t batch = 0;
  std::vector<Instr> instrs;
  std::size_t pc = 0;
  std::uint32_t pending = 0;
};

struct InFlightLine {
  MemoryRequest req;
  std::uint64_t ready_at = 0;
};

struct SmUnit {
  std::uint32_t id = 0;
  WarpScheduler sched;
  L1Cache l1;
  std::map<std::uint32_t, WarpRun> warps;
  std::map<std::uint64_t, std::uint32_t> block_warps_left;
  std::uint32_t resident_blocks = 0;
  std::uint32_t resident_threads = 0;
  std::deque<InFlightLine> outbound;  // ready_at = arrival at the controller
  std::deque<InFlightLine> replies;   // ready_at = arrival at the SM
  std::deque<MemoryRequest> blocked;  // completed, waiting for reply-queue space
  std::map<std::uint64_t, std::vector<std::uint32_t>> mshr;
  std::uint32_t next_warp = 0;
  std::uint64_t dispatch_seq = 0;

  SmUnit(std::uint32_t sm, SchedulerOptions so, const L1Config& l1c) : id(sm), sched(so), l1(l1c) {}
};

struct CompletionOrder {
  bool operator()(const MemoryRequest& a, const MemoryRequest& b) const {
    if (a.t_complete != b.t_complete) return a.t_complete > b.t_complete;
    return a.id > b.id;
  }
};

bool has_accesses(const KernelSpec& k) {
  for (const auto& m : k.matrices) {
    if (m.accesses_per_thread > 0) return true;
  }
  return false;
}

class Simulator {
 public:
  Simulator(const RunConfig& cfg, const RunOptions& opts)
      : cfg_(cfg), opts_(opts), pt_(std::make_shared<PageTable>(cfg.page_table_config())) {
    const auto& g = cfg_.memory.gddr;
    const auto& d = cfg_.memory.ddr;
    for (std::uint32_t c = 0; c < g.layout.num_channels(); ++c) {
      mcs_.emplace_back(Pool::GDDR, c, g.layout.banks_per_channel(), g.queue_capacity, g.timing,
                        cfg_.policy.arbitration, cfg_.memory.aging_cap);
    }
    ddr_base_ = mcs_.size();
    for (std::uint32_t c = 0; c < d.layout.num_channels(); ++c) {
      mcs_.emplace_back(Pool::DDR, c, d.layout.banks_per_channel(), d.queue_capacity, d.timing,
                        cfg_.policy.arbitration, cfg_.memory.aging_cap);
    }
    SchedulerOptions so;
    so.policy = cfg_.policy.scheduler;
    so.ccws_capacity = cfg_.gpu.ccws_capacity;
    so.active_threshold = cfg_.gpu.tbas_threshold;
    so.check = cfg_.policy.promotion_check;
    for (std::uint32_t s = 0; s < cfg_.gpu.num_sms; ++s) sms_.emplace_back(s, so, cfg_.gpu.l1);
    promo_seen_.assign(cfg_.gpu.num_sms, 0);
    if (cfg_.workload.cpu_traffic) {
      CpuTrafficSpec spec = *cfg_.workload.cpu_traffic;
      spec.seed += cfg_.seed * 0x9E3779B97F4A7C15ull;
      cpu_gen_.emplace(spec);
    }
    line_bytes_ = cfg_.gpu.l1.line_bytes;
  }

  RunResult run() {
    const auto& kernels = cfg_.workload.kernels;
    std::uint64_t cycle = 0;
    std::size_t k = 0;
    if (!kernels.empty()) start_kernel(0, cycle);
    bool truncated = false;
    while (true) {
      if (k < kernels.size() && kernel_done()) {
        stats_.back().end_cycle = cycle;
        ++k;
        if (k < kernels.size()) start_kernel(k, cycle);
      }
      if (k >= kernels.size() && cpu_out_.empty() && cpu_outstanding_ == 0 && inflight_.empty()) break;
      if (cycle >= cfg_.horizon_cycles) {
        truncated = true;
        if (k < kernels.size()) stats_.back().end_cycle = cycle;
        break;
      }
      step(cycle, k < kernels.size());
      ++cycle;
    }
    return finish(cycle, truncated);
  }

 private:
  // ---- kernel setup -------------------------------------------------------
  void start_kernel(std::size_t k, std::uint64_t cycle) {
    spec_ = &cfg_.workload.kernels[k];
    result_.plans.push_back(plan_for_kernel(cfg_, *spec_));
    const BatchPlan& plan = result_.plans.back();
    for (const auto& w : plan.warnings) result_.warnings.push_back(spec_->name + ": " + w);
    batch_of_block_ = plan.batch_of_block();
    blocks_left_ = spec_->total_blocks();
    KernelStats ks;
    ks.name = spec_->name;
    ks.start_cycle = cycle;
    stats_.push_back(ks);

    queues_.clear();
    interleaved_.reset();
    if (cfg_.policy.dispatch == DispatchKind::Serial) {
      order_ = plan.dispatch_order();
      queues_ = partition_blocks(spec_->total_blocks(), cfg_.gpu.num_sms, plan);
      const auto alloc = cfg_.policy.allocator;
      if (alloc == AllocPolicy::Coloring || alloc == AllocPolicy::ColoringHetero) {
        // Each batch is bound to the SM that receives its first block.
        std::vector<std::uint32_t> owner(plan.batches.size(), 0);
        std::vector<bool> set(plan.batches.size(), false);
        for (const auto& q : queues_) {
          for (std::uint64_t pos = q.head; pos < q.tail; ++pos) {
            const auto b = batch_of_block_[order_[pos]];
            if (!set[b]) {
              owner[b] = q.sm_id;
              set[b] = true;
            }
          }
        }
        pt_->allocate_batches(plan, owner);
      }
    } else {
      std::optional<std::uint64_t> seed;
      if (cfg_.policy.dispatch == DispatchKind::InterleavedRandom) seed = cfg_.seed;
      interleaved_.emplace(spec_->total_blocks(), seed);
    }
  }

  bool kernel_done() const {
    if (blocks_left_ > 0 || gpu_outstanding_ > 0) return false;
    for (const auto& s : sms_) {
      if (!s.warps.empty() || !s.outbound.empty()) return false;
    }
    return true;
  }

  // ---- phase 1: dispatch --------------------------------------------------
  std::uint32_t idle_slots(const SmUnit& s) const {
    const std::uint32_t by_blocks = cfg_.gpu.max_blocks_per_sm - s.resident_blocks;
    const std::uint32_t by_threads = (cfg_.gpu.max_threads_per_sm - s.resident_threads) / spec_->threads_per_block();
    return std::min(by_blocks, by_threads);
  }

  void dispatch(std::uint64_t cycle) {
    if (cfg_.policy.dispatch == DispatchKind::Serial) {
      for (auto& s : sms_) {
        auto& q = queues_[s.id];
        for (std::uint32_t n = idle_slots(s); n > 0 && !q.exhausted(); --n) {
          admit(s, order_[*q.next_block()], cycle);
        }
      }
      return;
    }
    if (interleaved_->exhausted()) return;
    std::vector<std::uint32_t> idle(sms_.size());
    for (const auto& s : sms_) idle[s.id] = idle_slots(s);
    for (const auto& a : interleaved_->fill(idle)) admit(sms_[a.sm_id], a.ordinal, cycle);
  }

  void admit(SmUnit& s, std::uint64_t block, std::uint64_t cycle) {
    const std::uint64_t batch = batch_of_block_[block];
    const std::uint64_t age = s.dispatch_seq++;
    auto traces = gen_block_trace(*spec_, block_at(*spec_, block), batch);
    std::uint32_t live = 0;
    for (auto& t : traces) {
      if (t.events.empty()) continue;
      WarpRun wr;
      wr.block = block;
      wr.batch = batch;
      std::size_t i = 0;
      while (i < t.events.size()) {
        Instr in;
        in.is_read = t.events[i].is_read;
        const auto slot = t.events[i].issue_slot;
        for (; i < t.events.size() && t.events[i].issue_slot == slot; ++i) {
          const std::uint64_t vl = t.events[i].virtual_addr / line_bytes_ * line_bytes_;
          if (std::find(in.vlines.begin(), in.vlines.end(), vl) == in.vlines.end()) in.vlines.push_back(vl);
        }
        wr.instrs.push_back(std::move(in));
      }
      const std::uint32_t uid = s.next_warp++;
      s.warps.emplace(uid, std::move(wr));
      s.sched.add_warp(uid, batch, age, cycle);
      ++live;
    }
    if (live == 0) {
      --blocks_left_;
      return;
    }
    s.block_warps_left[block] = live;
    ++s.resident_blocks;
    s.resident_threads += spec_->threads_per_block();
  }

  // ---- address translation ---------------------------------------------------
  struct Translated {
    PhysFrame frame;
    std::uint64_t phys = 0;
    std::uint64_t key = 0;  // pool-qualified line id
  };

  Translated translate(std::uint64_t vaddr, Agent agent, std::optional<std::uint32_t> sm) {
    const auto& l = cfg_.memory.gddr.layout;
    const std::uint64_t vpn = vaddr >> l.page_offset_bits;
    auto f = pt_->lookup(vpn);
    if (!f) f = pt_->allocate_page(vpn, agent, sm);
    Translated t;
    t.frame = *f;
    t.phys = pt_->physical_address(*f, vaddr & (l.page_size() - 1));
    t.key = (std::uint64_t{static_cast<std::uint8_t>(f->pool)} << 62) | (t.phys / line_bytes_);
    return t;
  }

  MemoryRequest make_request(const Translated& t, bool is_read, Agent agent, std::uint64_t cycle) {
    MemoryRequest r;
    r.id = next_id_++;
    r.pool = t.frame.pool;
    const auto c = decompose(t.phys, pt_->layout(t.frame.pool));
    r.channel = c.channel;
    r.bank = c.bank;
    r.row = c.row;
    r.column = c.column;
    r.phys_addr = t.phys;
    r.is_read = is_read;
    r.agent = agent;
    r.t_created = cycle;
    ++created_;
    return r;
  }

  std::size_t mc_index(const MemoryRequest& r) const {
    return r.pool == Pool::GDDR ? r.channel : ddr_base_ + r.channel;
  }

  // ---- phase 2/3: issue ---------------------------------------------------------
  void issue(SmUnit& s, std::uint64_t cycle, std::uint32_t& issued) {
    const auto pick = s.sched.select_warp(cycle);
    if (!pick) return;
    const std::uint32_t w = *pick;
    WarpRun& wr = s.warps.at(w);
    const Instr& in = wr.instrs[wr.pc];

    std::vector<Translated> lines;
    lines.reserve(in.vlines.size());
    std::size_t new_requests = 0;
    for (auto vl : in.vlines) {
      lines.push_back(translate(vl, Agent::Gpu, s.id));
      const auto& t = lines.back();
      if (!in.is_read) ++new_requests;
      else if (!s.l1.probe(t.key) && !s.mshr.count(t.key)) ++new_requests;
    }
    if (s.outbound.size() + new_requests > cfg_.gpu.outbound_capacity) {
      ++backpressure_stalls_;
      return;
    }

    auto& ks = stats_.back();
    std::uint32_t waits = 0;
    for (const auto& t : lines) {
      const bool local = pt_->classify_access(s.id, t.frame) == Locality::Local;
      if (!in.is_read) {
        s.l1.access(t.key);  // write-through, no allocate
        MemoryRequest r = make_request(t, false, Agent::Gpu, cycle);
        r.sm_id = s.id;
        r.warp_id = w;
        r.batch_id = wr.batch;
        r.local = local;
        s.outbound.push_back({std::move(r), cycle + cfg_.gpu.icnt_latency});
        ++gpu_outstanding_;
        continue;
      }
      if (s.l1.access(t.key)) continue;
      ++waits;
      auto it = s.mshr.find(t.key);
      if (it != s.mshr.end()) {
        it->second.push_back(w);
        continue;
      }
      s.mshr[t.key].push_back(w);
      MemoryRequest r = make_request(t, true, Agent::Gpu, cycle);
      r.sm_id = s.id;
      r.warp_id = w;
      r.batch_id = wr.batch;
      r.local = local;
      s.outbound.push_back({std::move(r), cycle + cfg_.gpu.icnt_latency});
      ++gpu_outstanding_;
      ++ks.l1_misses;
    }
    ++ks.mem_instructions;
    ++issued;
    s.sched.mark_issued(w);
    if (opts_.record_issues) {
      result_.issues.push_back({cycle, s.id, w, wr.batch, wr.block, static_cast<std::uint32_t>(wr.pc), waits > 0});
    }
    ++wr.pc;
    if (waits > 0) {
      wr.pending = waits;
      s.sched.mark_waiting(w);
      s.sched.demote_and_promote(w, cycle);
    } else if (wr.pc == wr.instrs.size()) {
      finish_warp(s, w);
    } else {
      s.sched.mark_stalled(w, cycle + 1 + spec_->compute_gap);
    }
  }

  void finish_warp(SmUnit& s, std::uint32_t w) {
    const std::uint64_t block = s.warps.at(w).block;
    s.sched.mark_finished(w);
    s.warps.erase(w);
    if (--s.block_warps_left[block] == 0) {
      s.block_warps_left.erase(block);
      --s.resident_blocks;
      s.resident_threads -= spec_->threads_per_block();
      --blocks_left_;
    }
  }

  void inject(std::uint64_t cycle, bool gpu_active) {
    const std::size_t n = sms_.size();
    for (std::size_t i = 0; i < n; ++i) {
      auto& s = sms_[(cycle + i) % n];
      while (!s.outbound.empty() && s.outbound.front().ready_at <= cycle) {
        auto& front = s.outbound.front();
        if (!mcs_[mc_index(front.req)].try_enqueue(front.req, cycle)) {
          ++backpressure_stalls_;
          break;
        }
        s.outbound.pop_front();
      }
    }
    if (cpu_gen_ && gpu_active) {
      if (auto ev = cpu_gen_->tick(cycle)) {
        const auto t = translate(ev->addr, Agent::Cpu, std::nullopt);
        cpu_out_.push_back(make_request(t, ev->is_read, Agent::Cpu, cycle));
        ++cpu_outstanding_;
      }
    }
    while (!cpu_out_.empty()) {
      if (!mcs_[mc_index(cpu_out_.front())].try_enqueue(cpu_out_.front(), cycle)) {
        ++backpressure_stalls_;
        break;
      }
      cpu_out_.pop_front();
    }
  }

  // ---- phase 5: completions and replies ---------------------------------------
  void complete(std::uint64_t cycle) {
    const std::uint32_t cap = cfg_.gpu.reply_queue_capacity;
    for (auto& s : sms_) {
      while (!s.blocked.empty() && s.replies.size() < cap) {
        s.replies.push_back({std::move(s.blocked.front()), cycle + cfg_.gpu.reply_latency});
        s.blocked.pop_front();
      }
    }
    while (!inflight_.empty() && inflight_.top().t_complete <= cycle) {
      MemoryRequest r = inflight_.top();
      inflight_.pop();
      if (r.t_complete < r.t_issue || r.t_issue < r.t_enqueue) {
        throw SimFault(cycle, "request " + std::to_string(r.id) + " timestamps out of order");
      }
      result_.log.push_back(r);
      if (r.agent == Agent::Cpu) {
        --cpu_outstanding_;
        continue;
      }
      if (!r.is_read) {
        --gpu_outstanding_;
        continue;
      }
      auto& s = sms_[r.sm_id];
      if (s.blocked.empty() && s.replies.size() < cap) {
        s.replies.push_back({std::move(r), cycle + cfg_.gpu.reply_latency});
      } else {
        s.blocked.push_back(std::move(r));
      }
    }
    for (auto& s : sms_) {
      reply_stalls_ += s.blocked.size();
      for (std::uint32_t n = 0; n < cfg_.gpu.reply_drain_per_cycle; ++n) {
        if (s.replies.empty() || s.replies.front().ready_at > cycle) break;
        const MemoryRequest r = std::move(s.replies.front().req);
        s.replies.pop_front();
        if (r.t_complete > cycle) throw SimFault(cycle, "reply delivered before bank completion");
        deliver(s, r, cycle);
      }
    }
  }

  void deliver(SmUnit& s, const MemoryRequest& r, std::uint64_t cycle) {
    --gpu_outstanding_;
    const std::uint64_t key =
        (std::uint64_t{static_cast<std::uint8_t>(r.pool)} << 62) | (r.phys_addr / line_bytes_);
    s.l1.fill(key);
    auto it = s.mshr.find(key);
    if (it == s.mshr.end()) throw SimFault(cycle, "reply without a waiting miss entry");
    const auto waiters = std::move(it->second);
    s.mshr.erase(it);
    for (auto w : waiters) {
      auto& wr = s.warps.at(w);
      if (--wr.pending > 0) continue;
      if (wr.pc == wr.instrs.size()) finish_warp(s, w);
      else s.sched.mark_stalled(w, cycle + 1 + spec_->compute_gap);
    }
  }

  // ---- one cycle ---------------------------------------------------------------------
  void step(std::uint64_t cycle, bool gpu_active) {
    if (gpu_active) dispatch(cycle);
    std::uint32_t issued = 0;
    if (gpu_active) {
      for (auto& s : sms_) issue(s, cycle, issued);
    }
    inject(cycle, gpu_active);
    for (auto& mc : mcs_) {
      if (auto r = mc.step(cycle)) inflight_.push(std::move(*r));
    }
    complete(cycle);
    for (auto& s : sms_) s.sched.end_cycle(cycle);
    if (cfg_.checks) check(cycle);
    if (opts_.record_trace) sample(cycle, issued);
  }

  void check(std::uint64_t cycle) {
    std::uint64_t queued = 0, outbound = cpu_out_.size();
    for (const auto& mc : mcs_) {
      if (mc.size() > 64) throw SimFault(cycle, "controller queue above 64 entries");
      queued += mc.size();
    }
    for (auto& s : sms_) {
      outbound += s.outbound.size();
      if (s.replies.size() > cfg_.gpu.reply_queue_capacity) throw SimFault(cycle, "reply queue over capacity");
      if (is_tbas(cfg_.policy.scheduler)) {
        const auto running = s.sched.running_warps();
        for (auto w : running) {
          if (s.sched.warp(w).batch_id != *s.sched.running_batch()) {
            throw SimFault(cycle, "SM " + std::to_string(s.id) + " running set mixes batches");
          }
        }
      }
      if (cfg_.policy.scheduler == SchedPolicy::TBAS_E) {
        const auto& p = s.sched.promotions();
        for (; promo_seen_[s.id] < p.size(); ++promo_seen_[s.id]) {
          const auto& e = p[promo_seen_[s.id]];
          if (e.age != e.min_candidate_age) {
            throw SimFault(cycle, "SM " + std::to_string(s.id) + " promoted batch " + std::to_string(e.id) +
                                      " over an older ready batch");
          }
        }
      }
    }
    if (created_ != result_.log.size() + outbound + queued + inflight_.size()) {
      throw SimFault(cycle, "request conservation violated");
    }
  }

  void sample(std::uint64_t cycle, std::uint32_t issued) {
    CycleSample c;
    c.cycle = cycle;
    c.issued = issued;
    c.outbound = cpu_out_.size();
    for (const auto& s : sms_) {
      c.outbound += s.outbound.size();
      c.reply_queued += s.replies.size();
      c.completions_waiting += s.blocked.size();
    }
    for (const auto& mc : mcs_) c.mc_queued += mc.size();
    c.in_dram = inflight_.size();
    result_.trace.push_back(c);
  }

  // ---- report --------------------------------------------------------------------
  RunResult finish(std::uint64_t cycles, bool truncated) {
    MetricsReport& r = result_.report;
    r.truncated = truncated;
    r.cycles = cycles;
    fill_log_metrics(r, result_.log);
    BankCounters totals;
    BankCounters per_pool[2];
    for (const auto& mc : mcs_) {
      for (std::uint32_t b = 0; b < mc.banks().size(); ++b) {
        const auto& c = mc.banks()[b].counters;
        result_.banks.push_back({mc.pool(), mc.channel(), b, c});
        totals += c;
        per_pool[static_cast<int>(mc.pool())] += c;
      }
    }
    if (cfg_.checks && totals.activates + totals.row_hits != totals.accesses()) {
      throw SimFault(cycles, "activates + row hits differ from accesses");
    }
    r.activates = totals.activates;
    r.row_hits = totals.row_hits;
    r.row_switches = totals.row_switches;
    const auto& g = cfg_.memory.gddr;
    const auto& d = cfg_.memory.ddr;
    r.energy = energy_total(per_pool[0], g.energy,
                            std::uint64_t{g.layout.num_channels()} * g.layout.banks_per_channel(), cycles);
    r.energy += energy_total(per_pool[1], d.energy,
                             std::uint64_t{d.layout.num_channels()} * d.layout.banks_per_channel(), cycles);
    r.reply_stalls = reply_stalls_;
    r.backpressure_stalls = backpressure_stalls_;
    r.spills = pt_->spills();
    for (std::size_t i = 0; i < stats_.size(); ++i) {
      stats_[i].warp_instructions = stats_[i].mem_instructions * (1 + cfg_.workload.kernels[i].compute_gap);
      r.warp_instructions += stats_[i].warp_instructions;
    }
    r.kernels = stats_;
    r.ipc = cycles ? static_cast<double>(r.warp_instructions) / static_cast<double>(cycles) : 0.0;
    result_.page_table = pt_;
    return std::move(result_);
  }

  const RunConfig& cfg_;
  RunOptions opts_;
  std::shared_ptr<PageTable> pt_;
  std::vector<MemoryController> mcs_;
  std::size_t ddr_base_ = 0;
  std::vector<SmUnit> sms_;
  std::optional<CpuTrafficGenerator> cpu_gen_;
  std::deque<MemoryRequest> cpu_out_;
  std::priority_queue<MemoryRequest, std::vector<MemoryRequest>, CompletionOrder> inflight_;
  std::uint64_t line_bytes_ = 128;

  const KernelSpec* spec_ = nullptr;
  std::vector<std::uint64_t> batch_of_block_;
  std::vector<std::uint64_t> order_;
  std::vector<DispatchQueue> queues_;
  std::optional<InterleavedDispatcher> interleaved_;
  std::uint64_t blocks_left_ = 0;

  std::uint64_t next_id_ = 0;
  std::uint64_t created_ = 0;
  std::uint64_t gpu_outstanding_ = 0;
  std::uint64_t cpu_outstanding_ = 0;
  std::uint64_t reply_stalls_ = 0;
  std::uint64_t backpressure_stalls_ = 0;
  std::vector<std::size_t> promo_seen_;
  std::vector<KernelStats> stats_;
  RunResult result_;
};

}  // namespace

BatchPlan plan_for_kernel(const RunConfig& cfg, const KernelSpec& kernel) {
  const std::uint64_t page = cfg.memory.gddr.layout.page_size();
  if (cfg.batching.plan_file) {
    BatchPlan p = plan_from_json(read_json_file(*cfg.batching.plan_file));
    if (p.total_blocks() != kernel.total_blocks()) {
      throw ConfigError("batching.plan_file", "plan covers " + std::to_string(p.total_blocks()) +
                                                  " blocks, kernel has " + std::to_string(kernel.total_blocks()));
    }
    return p;
  }
  if (cfg.batching.stride) return form_batches(kernel, *cfg.batching.stride, page);
  if (!has_accesses(kernel)) return form_batches(kernel, 1, page);
  return plan_kernel(kernel, page, cfg.batching.profile);
}

RunResult run(const RunConfig& config, const RunOptions& options) {
  config.validate();
  Simulator sim(config, options);
  return sim.run();
}

void write_bank_csv(std::ostream& os, const std::vector<BankCounterRow>& banks) {
  os << "pool,channel,bank,activates,reads,writes,row_hits,row_switches\n";
  for (const auto& b : banks) {
    os << to_string(b.pool) << ',' << b.channel << ',' << b.bank << ',' << b.counters.activates << ','
       << b.counters.reads << ',' << b.counters.writes << ',' << b.counters.row_hits << ','
       << b.counters.row_switches << '\n';
  }
}

void write_trace_csv(std::ostream& os, const std::vector<CycleSample>& trace) {
  os << "cycle,issued,outbound,mc_queued,in_dram,reply_queued,completions_waiting\n";
  for (const auto& c : trace) {
    os << c.cycle << ',' << c.issued << ',' << c.outbound << ',' << c.mc_queued << ',' << c.in_dram << ','
       << c.reply_queued << ',' << c.completions_waiting << '\n';
  }
}

void write_issue_csv(std::ostream& os, const std::vector<IssueRecord>& issues) {
  os << "cycle,sm,warp,batch,block,slot,miss\n";
  for (const auto& i : issues) {
    os << i.cycle << ',' << i.sm << ',' << i.warp << ',' << i.batch << ',' << i.block << ',' << i.slot << ','
       << (i.miss ? 1 : 0) << '\n';
  }
}

}  // namespace gms
