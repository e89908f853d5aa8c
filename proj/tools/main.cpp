#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "trapwalk/config.hpp"
#include "trapwalk/experiment.hpp"
#include "trapwalk/oracles.hpp"

namespace fs = std::filesystem;
using namespace trapwalk;

namespace {

constexpr const char* kRootVar = "TRAPWALK_OUTPUT_ROOT";

// Explicit flag, then the config's directory, then $TRAPWALK_OUTPUT_ROOT/<run id>.
std::string resolve_out(const std::string& flag, const RunConfig& cfg) {
  if (!flag.empty()) return flag;
  if (!cfg.outputs.directory.empty()) return cfg.outputs.directory;
  const char* root = std::getenv(kRootVar);
  if (root && *root) return (fs::path(root) / run_id_of(cfg)).string();
  return (fs::path("runs") / run_id_of(cfg)).string();
}

std::optional<RunConfig> load(const std::string& path, bool echo) {
  ConfigResult r = load_config(path);
  for (const auto& n : r.notices) std::cerr << "notice: " << n << '\n';
  for (const auto& e : r.errors) std::cerr << "error: " << e << '\n';
  if (r.config && echo) std::cout << to_ini(*r.config);
  return r.config;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"trapwalk: biased random walk among heavy-tailed random conductances"};
  app.require_subcommand(1);

  std::string config_path, out_dir, manifest_path;
  int workers = 1;
  bool overwrite = false;
  auto* run = app.add_subcommand("run", "run an experiment from a config or a manifest");
  auto* cfg_opt = run->add_option("-c,--config", config_path, "config file")->check(CLI::ExistingFile);
  run->add_option("-m,--manifest", manifest_path, "rerun the run recorded in this manifest")
      ->check(CLI::ExistingFile)
      ->excludes(cfg_opt);
  run->add_option("-o,--out", out_dir, "output directory");
  run->add_option("-j,--workers", workers, "worker threads")->check(CLI::PositiveNumber);
  run->add_flag("--overwrite", overwrite, "replace outputs in a non-empty directory");

  std::string validate_path;
  auto* validate = app.add_subcommand("validate", "check a config and echo it with defaults resolved");
  validate->add_option("config", validate_path, "config file")->required()->check(CLI::ExistingFile);

  std::vector<std::string> merge_dirs;
  std::string merge_out;
  bool merge_overwrite = false;
  auto* merge = app.add_subcommand("merge", "combine runs over disjoint replica sets");
  merge->add_option("runs", merge_dirs, "run directories")->required()->expected(2, -1);
  merge->add_option("-o,--out", merge_out, "output directory")->required();
  merge->add_flag("--overwrite", merge_overwrite, "replace outputs in a non-empty directory");

  std::uint64_t oracle_seed = 1;
  auto* oracle = app.add_subcommand("oracle", "exact-formula checks, no simulation");
  oracle->add_option("-s,--seed", oracle_seed, "seed for the randomized instances");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*validate) return load(validate_path, true) ? 0 : 2;

    if (*oracle) {
      bool ok = true;
      for (const auto& c : run_oracle_suite(oracle_seed)) {
        std::cout << (c.passed ? "PASS " : "FAIL ") << c.name << "  " << c.detail << '\n';
        ok = ok && c.passed;
      }
      return ok ? 0 : 1;
    }

    if (*run) {
      RunOptions o{out_dir, workers, overwrite};
      RunSummary s;
      if (!manifest_path.empty()) {
        if (o.out_dir.empty()) {
          std::cerr << "error: --out is required with --manifest\n";
          return 2;
        }
        s = rerun_from_manifest(manifest_path, o);
      } else {
        if (config_path.empty()) {
          std::cerr << "error: one of --config or --manifest is required\n";
          return 2;
        }
        auto cfg = load(config_path, false);
        if (!cfg) return 2;
        o.out_dir = resolve_out(out_dir, *cfg);
        s = run_experiment(*cfg, o);
      }
      std::cout << "run " << s.run_id << " -> " << s.out_dir << '\n';
      for (const auto& f : s.files) std::cout << "  " << f << '\n';
      return s.all_passed ? 0 : 1;
    }

    if (*merge) {
      RunSummary s = merge_runs(merge_dirs, RunOptions{merge_out, 1, merge_overwrite});
      std::cout << "merged " << merge_dirs.size() << " runs -> " << s.out_dir << '\n';
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
