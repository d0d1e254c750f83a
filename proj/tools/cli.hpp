#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace gms::cli {

enum ExitCode : int { kOk = 0, kUsage = 1, kTruncated = 2, kConfigError = 3, kFault = 4 };

struct RunArgs {
  std::filesystem::path config;
  std::optional<std::filesystem::path> out;
  std::optional<std::uint64_t> seed;
  bool trace = false;
};

struct ProfileArgs {
  std::filesystem::path workload;
  std::uint64_t page_size = 4096;
  std::optional<std::filesystem::path> out;
};

struct CompareArgs {
  std::filesystem::path experiment;
  std::optional<std::filesystem::path> out;
  std::optional<std::uint32_t> workers;
};

// Output directory: explicit flag, else $GMS_OUT_DIR, else ./gms-out.
std::filesystem::path output_dir(const std::optional<std::filesystem::path>& flag);

int cmd_run(const RunArgs& args, std::ostream& out, std::ostream& err);
int cmd_profile(const ProfileArgs& args, std::ostream& out, std::ostream& err);
int cmd_compare(const CompareArgs& args, std::ostream& out, std::ostream& err);
int cmd_validate(const std::vector<std::filesystem::path>& files, std::ostream& out, std::ostream& err);

// Sets a dotted key ("policy.scheduler", "gpu.l1.assoc") inside a JSON
// object, creating intermediate objects.
void set_dotted(nlohmann::json& root, const std::string& key, const nlohmann::json& value);

struct Axis {
  std::string key;
  std::vector<nlohmann::json> values;
};

struct Experiment {
  std::string name;
  nlohmann::json base_config;
  std::filesystem::path base_dir;  // relative paths in the base config resolve here
  std::vector<Axis> axes;
  nlohmann::json baseline = nlohmann::json::object();  // key -> value
  std::filesystem::path output_dir;
  std::uint64_t max_cells = 256;
  std::uint32_t workers = 1;
};

Experiment load_experiment(const std::filesystem::path& file);

// Cross product in row-major order (last axis fastest).
std::vector<std::vector<nlohmann::json>> expand_cells(const Experiment& e);

}  // namespace gms::cli
