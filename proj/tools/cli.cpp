#include "cli.hpp"

#include <atomic>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <thread>

#include "gms/batching.hpp"
#include "gms/config.hpp"
#include "gms/engine.hpp"
#include "gms/error.hpp"
#include "gms/json_fields.hpp"
#include "gms/workload.hpp"

namespace gms::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream f(p, std::ios::binary);
  if (!f) throw Error("cannot write " + p.string());
  f << text;
}

std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(10) << v;
  return os.str();
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) {
    if (c == '"') q += '"';
    q += c;
  }
  return q + "\"";
}

std::string axis_text(const json& v) { return v.is_string() ? v.get<std::string>() : v.dump(); }

json report_json(const RunConfig& c, const RunResult& r) {
  json j = to_json(r.report);
  j["run"] = {{"workload", c.workload_ref},
              {"seed", c.seed},
              {"dispatch", to_string(c.policy.dispatch)},
              {"allocator", to_string(c.policy.allocator)},
              {"scheduler", to_string(c.policy.scheduler)},
              {"arbitration", to_string(c.policy.arbitration)},
              {"promotion_check", to_string(c.policy.promotion_check)}};
  json plans = json::array();
  for (const auto& p : r.plans) {
    plans.push_back({{"kernel", p.kernel},
                     {"stride", p.stride},
                     {"modulus", p.modulus},
                     {"formation", to_string(p.formation)},
                     {"batches", p.batches.size()}});
  }
  j["plans"] = plans;
  j["warnings"] = r.warnings;
  return j;
}

template <typename F>
int guarded(std::ostream& err, F&& body, const std::string& prefix = {}) {
  try {
    return body();
  } catch (const ConfigError& e) {
    err << prefix << "error: " << e.what() << '\n';
    return kConfigError;
  } catch (const SimFault& e) {
    err << prefix << "fault: " << e.what() << '\n';
    return kFault;
  } catch (const AllocationFault& e) {
    err << prefix << "fault: " << e.what() << '\n';
    return kFault;
  } catch (const Error& e) {
    err << prefix << "error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::exception& e) {
    err << prefix << "fault: " << e.what() << '\n';
    return kFault;
  }
}

const std::vector<std::string>& summary_metrics() {
  static const std::vector<std::string> m = {
      "cycles",           "warp_instructions", "ipc",           "blp",
      "rbhr",             "gpu_rbhr",          "cpu_rbhr",      "local_ratio",
      "mean_access_delay", "gpu_mean_latency", "cpu_mean_latency", "reply_stalls",
      "backpressure_stalls", "row_switches",   "peak_window_requests", "energy_total"};
  return m;
}

double metric(const json& report, const std::string& name) {
  if (name == "energy_total") return report.at("energy").at("total").get<double>();
  return report.at(name).get<double>();
}

}  // namespace

fs::path output_dir(const std::optional<fs::path>& flag) {
  if (flag) return *flag;
  if (const char* env = std::getenv("GMS_OUT_DIR"); env && *env) return env;
  return "gms-out";
}

int cmd_run(const RunArgs& args, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    json j = read_json_file(args.config);
    if (args.seed) j["seed"] = *args.seed;
    const RunConfig c = config_from_json(j, args.config.parent_path());
    RunOptions o;
    o.record_trace = args.trace;
    o.record_issues = args.trace;
    const RunResult r = run(c, o);

    const fs::path dir = output_dir(args.out);
    fs::create_directories(dir);
    write_file(dir / "report.json", report_json(c, r).dump(2) + "\n");
    {
      std::ostringstream os;
      write_bank_csv(os, r.banks);
      write_file(dir / "counters.csv", os.str());
    }
    {
      std::ostringstream os;
      r.page_table->write_csv(os);
      write_file(dir / "page_table.csv", os.str());
    }
    if (args.trace) {
      std::ostringstream ts, is;
      write_trace_csv(ts, r.trace);
      write_issue_csv(is, r.issues);
      write_file(dir / "trace.csv", ts.str());
      write_file(dir / "issues.csv", is.str());
    }
    for (const auto& w : r.warnings) err << "warning: " << w << '\n';
    const auto& m = r.report;
    out << "cycles=" << m.cycles << " ipc=" << fmt(m.ipc) << " blp=" << fmt(m.blp) << " rbhr=" << fmt(m.rbhr)
        << " local=" << fmt(m.local_ratio) << " energy=" << fmt(m.energy.total())
        << (m.truncated ? " TRUNCATED" : "") << " -> " << (dir / "report.json").string() << '\n';
    return m.truncated ? kTruncated : kOk;
  });
}

int cmd_profile(const ProfileArgs& args, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    if (args.page_size == 0 || (args.page_size & (args.page_size - 1))) {
      throw ConfigError("page_size", "must be a power of two");
    }
    const Workload w = load_workload(args.workload);
    const fs::path dir = output_dir(args.out);
    fs::create_directories(dir);
    for (const auto& k : w.kernels) {
      const BatchPlan plan = plan_kernel(k, args.page_size);
      json j = to_json(plan);
      j["histogram"] = to_json(sharing_histogram(plan));
      const fs::path file = dir / (k.name + ".plan.json");
      write_file(file, j.dump(2) + "\n");
      for (const auto& warn : plan.warnings) err << "warning: " << k.name << ": " << warn << '\n';
      out << k.name << ": stride=" << plan.stride << " formation=" << to_string(plan.formation)
          << " batches=" << plan.batches.size() << " -> " << file.string() << '\n';
    }
    return kOk;
  });
}

int cmd_validate(const std::vector<fs::path>& files, std::ostream& out, std::ostream& err) {
  int worst = kOk;
  for (const auto& f : files) {
    const int rc = guarded(err, [&] {
      const json j = read_json_file(f);
      std::string kind;
      if (j.is_object() && j.contains("axes")) {
        load_experiment(f);
        kind = "experiment";
      } else if (j.is_object() && j.contains("kernels")) {
        workload_from_json(j);
        kind = "workload";
      } else if (j.is_object() && j.contains("batches")) {
        plan_from_json(j);
        kind = "plan";
      } else {
        config_from_json(j, f.parent_path());
        kind = "config";
      }
      out << f.string() << ": ok (" << kind << ")\n";
      return kOk;
    }, f.string() + ": ");
    worst = std::max(worst, rc);
  }
  return worst;
}

void set_dotted(json& root, const std::string& key, const json& value) {
  json* node = &root;
  std::size_t start = 0;
  while (true) {
    const auto dot = key.find('.', start);
    const std::string part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (part.empty()) throw ConfigError(key, "empty path segment");
    if (!node->is_object()) throw ConfigError(key, "path runs through a non-object value");
    if (dot == std::string::npos) {
      (*node)[part] = value;
      return;
    }
    if (!node->contains(part) || (*node)[part].is_null()) (*node)[part] = json::object();
    node = &(*node)[part];
    start = dot + 1;
  }
}

Experiment load_experiment(const fs::path& file) {
  const json j = read_json_file(file);
  FieldReader r(j, "experiment");
  const int version = r.get<int>("schema_version");
  if (version != 1) throw ConfigError("experiment.schema_version", "unsupported schema " + std::to_string(version));
  Experiment e;
  e.name = r.get<std::string>("name");
  const fs::path here = file.parent_path();
  const json& base = r.raw("base_config");
  if (base.is_string()) {
    fs::path p = base.get<std::string>();
    if (!p.is_absolute()) p = here / p;
    e.base_config = read_json_file(p);
    e.base_dir = p.parent_path();
  } else if (base.is_object()) {
    e.base_config = base;
    e.base_dir = here;
  } else {
    throw ConfigError("experiment.base_config", "expected a path or an object");
  }
  const json& axes = r.raw("axes");
  if (!axes.is_array() || axes.empty()) throw ConfigError("experiment.axes", "expected a non-empty array");
  for (std::size_t i = 0; i < axes.size(); ++i) {
    FieldReader ar(axes[i], "experiment.axes[" + std::to_string(i) + "]");
    Axis a;
    a.key = ar.get<std::string>("key");
    const json& vals = ar.raw("values");
    if (!vals.is_array() || vals.empty()) throw ConfigError(ar.field_path("values"), "expected a non-empty array");
    a.values.assign(vals.begin(), vals.end());
    ar.finish();
    e.axes.push_back(std::move(a));
  }
  if (auto b = r.optional("baseline")) {
    if (!b->is_object()) throw ConfigError("experiment.baseline", "expected an object of axis key -> value");
    e.baseline = *b;
  } else {
    for (const auto& a : e.axes) {
      if (a.key == "policy.scheduler" &&
          std::find(a.values.begin(), a.values.end(), json("CCWS")) != a.values.end()) {
        e.baseline = {{a.key, "CCWS"}};
      }
    }
    if (e.baseline.empty()) e.baseline = {{e.axes.front().key, e.axes.front().values.front()}};
  }
  for (const auto& [k, v] : e.baseline.items()) {
    auto it = std::find_if(e.axes.begin(), e.axes.end(), [&](const Axis& a) { return a.key == k; });
    if (it == e.axes.end()) throw ConfigError("experiment.baseline." + k, "not an axis key");
    if (std::find(it->values.begin(), it->values.end(), v) == it->values.end()) {
      throw ConfigError("experiment.baseline." + k, "value not among the axis values");
    }
  }
  fs::path od = r.get_or<std::string>("output_dir", e.name);
  e.output_dir = od.is_absolute() ? od : here / od;
  e.max_cells = r.get_or<std::uint64_t>("max_cells", e.max_cells);
  e.workers = r.get_or<std::uint32_t>("workers", e.workers);
  r.ignore({"description"});
  r.finish();
  if (e.workers == 0) throw ConfigError("experiment.workers", "must be >= 1");
  std::uint64_t n = 1;
  for (const auto& a : e.axes) {
    n *= a.values.size();
    if (n > e.max_cells) {
      throw ConfigError("experiment.axes", "cross product exceeds max_cells (" + std::to_string(e.max_cells) + ")");
    }
  }
  return e;
}

std::vector<std::vector<json>> expand_cells(const Experiment& e) {
  std::vector<std::vector<json>> cells{{}};
  for (const auto& a : e.axes) {
    std::vector<std::vector<json>> next;
    for (const auto& c : cells) {
      for (const auto& v : a.values) {
        auto d = c;
        d.push_back(v);
        next.push_back(std::move(d));
      }
    }
    cells = std::move(next);
  }
  return cells;
}

int cmd_compare(const CompareArgs& args, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    Experiment e = load_experiment(args.experiment);
    if (args.out) e.output_dir = *args.out;
    if (args.workers) e.workers = std::max<std::uint32_t>(1, *args.workers);
    const auto cells = expand_cells(e);
    fs::create_directories(e.output_dir / "cells");

    struct Outcome {
      bool ok = false;
      std::string message;
      json report;
      std::string report_path;  // relative to the output dir
    };
    std::vector<Outcome> results(cells.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
      for (std::size_t i = next++; i < cells.size(); i = next++) {
        Outcome& o = results[i];
        try {
          json cj = e.base_config;
          for (std::size_t a = 0; a < e.axes.size(); ++a) set_dotted(cj, e.axes[a].key, cells[i][a]);
          const RunConfig c = config_from_json(cj, e.base_dir);
          const RunResult r = run(c);
          o.report = report_json(c, r);
          o.report_path = "cells/" + std::to_string(i) + "/report.json";
          fs::create_directories(e.output_dir / "cells" / std::to_string(i));
          write_file(e.output_dir / o.report_path, o.report.dump(2) + "\n");
          o.ok = !r.report.truncated;
          if (!o.ok) o.message = "truncated";
        } catch (const std::exception& ex) {
          o.ok = false;
          o.message = ex.what();
        }
      }
    };
    const std::uint32_t nthreads = std::min<std::uint32_t>(e.workers, static_cast<std::uint32_t>(cells.size()));
    std::vector<std::thread> pool;
    for (std::uint32_t t = 1; t < nthreads; ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();

    // Baseline of a cell: same values except on the baseline keys.
    auto baseline_of = [&](std::size_t i) -> std::optional<std::size_t> {
      auto want = cells[i];
      for (std::size_t a = 0; a < e.axes.size(); ++a) {
        if (e.baseline.contains(e.axes[a].key)) want[a] = e.baseline[e.axes[a].key];
      }
      for (std::size_t j = 0; j < cells.size(); ++j) {
        if (cells[j] == want) return j;
      }
      return std::nullopt;
    };

    std::ostringstream wide, lng;
    wide << "cell";
    lng << "cell";
    for (const auto& a : e.axes) {
      wide << ',' << csv_field(a.key);
      lng << ',' << csv_field(a.key);
    }
    wide << ",status";
    for (const auto& m : summary_metrics()) wide << ',' << m;
    for (const auto& m : summary_metrics()) wide << ",norm_" << m;
    wide << ",baseline_cell,report_path\n";
    lng << ",metric,value,normalized\n";

    bool baseline_failed = false;
    for (std::size_t i = 0; i < cells.size(); ++i) {
      std::string axes;
      for (const auto& v : cells[i]) axes += ',' + csv_field(axis_text(v));
      const Outcome& o = results[i];
      const auto b = baseline_of(i);
      const Outcome* base = b && results[*b].ok ? &results[*b] : nullptr;
      if (!base) baseline_failed = true;
      wide << i << axes << ',' << csv_field(o.ok ? "ok" : "failed: " + o.message);
      std::vector<std::string> vals, norms;
      for (const auto& m : summary_metrics()) {
        if (!o.ok) {
          vals.emplace_back();
          norms.emplace_back();
          continue;
        }
        const double v = metric(o.report, m);
        vals.push_back(fmt(v));
        const double bv = base ? metric(base->report, m) : 0.0;
        norms.push_back(base && bv != 0.0 ? fmt(v / bv) : "");
      }
      for (const auto& v : vals) wide << ',' << v;
      for (const auto& v : norms) wide << ',' << v;
      wide << ',' << (b ? std::to_string(*b) : "") << ',' << o.report_path << '\n';
      if (o.ok) {
        for (std::size_t k = 0; k < vals.size(); ++k) {
          lng << i << axes << ',' << summary_metrics()[k] << ',' << vals[k] << ',' << norms[k] << '\n';
        }
      }
    }
    write_file(e.output_dir / "summary.csv", wide.str());
    write_file(e.output_dir / "summary_long.csv", lng.str());

    std::size_t ok = 0;
    for (const auto& o : results) ok += o.ok ? 1 : 0;
    out << e.name << ": " << ok << "/" << cells.size() << " cells ok -> " << (e.output_dir / "summary.csv").string()
        << '\n';
    for (std::size_t i = 0; i < results.size(); ++i) {
      if (!results[i].ok) err << "cell " << i << " failed: " << results[i].message << '\n';
    }
    if (baseline_failed) {
      err << "error: a baseline cell failed; normalized columns are incomplete\n";
      return kFault;
    }
    return kOk;
  });
}

}  // namespace gms::cli
