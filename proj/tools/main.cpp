#include <iostream>

#include <CLI11.hpp>

#include "cli.hpp"

int main(int argc, char** argv) {
  namespace cli = gms::cli;
  CLI::App app{"gms: GPU memory-subsystem simulator"};
  app.require_subcommand(1);

  cli::RunArgs run;
  std::string run_out;
  auto* run_cmd = app.add_subcommand("run", "Run one simulation");
  run_cmd->add_option("--config,config", run.config, "Run config file")->required();
  run_cmd->add_option("--out", run_out, "Output directory");
  run_cmd->add_option("--seed", run.seed, "Override the config seed");
  run_cmd->add_flag("--trace", run.trace, "Write per-cycle trace.csv and issues.csv");

  cli::ProfileArgs profile;
  std::string profile_out;
  auto* prof_cmd = app.add_subcommand("profile", "Profile thread block stride and write batch plans");
  prof_cmd->add_option("--workload,workload", profile.workload, "Workload file")->required();
  prof_cmd->add_option("--page-size", profile.page_size, "Page size in bytes");
  prof_cmd->add_option("--out", profile_out, "Output directory");

  cli::CompareArgs compare;
  std::string compare_out;
  auto* cmp_cmd = app.add_subcommand("compare", "Run a policy sweep and write summary tables");
  cmp_cmd->add_option("--config,experiment", compare.experiment, "Experiment file")->required();
  cmp_cmd->add_option("--out", compare_out, "Output directory (overrides the experiment)");
  cmp_cmd->add_option("--workers", compare.workers, "Parallel cells");

  std::vector<std::filesystem::path> files;
  auto* val_cmd = app.add_subcommand("validate", "Check config, workload, plan or experiment files");
  val_cmd->add_option("--config,files", files, "Files to check")->required();

  CLI11_PARSE(app, argc, argv);

  if (*run_cmd) {
    if (!run_out.empty()) run.out = run_out;
    return cli::cmd_run(run, std::cout, std::cerr);
  }
  if (*prof_cmd) {
    if (!profile_out.empty()) profile.out = profile_out;
    return cli::cmd_profile(profile, std::cout, std::cerr);
  }
  if (*cmp_cmd) {
    if (!compare_out.empty()) compare.out = compare_out;
    return cli::cmd_compare(compare, std::cout, std::cerr);
  }
  return cli::cmd_validate(files, std::cout, std::cerr);
}
