#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "trapwalk/env.hpp"
#include "trapwalk/regen.hpp"

namespace trapwalk {

enum class ExperimentKind { exponent, clock, fk, traps, oracle_suite };
std::string to_string(ExperimentKind k);

struct WalkSettings {
  std::int64_t steps = 1000000;
  int replicas = 1;
  int replica_offset = 0;  // first replica index; lets several runs cover disjoint seed ranges
  std::uint64_t master_seed = 1;
  double compress_threshold = 0.0;  // 0 disables run compression
  int checkpoints_per_decade = 4;
  std::int64_t first_checkpoint = 100;
  double stop_level = 0.0;  // > 0: stop once the level reaches it; steps becomes a cap
};

struct OutputSettings {
  std::string directory;
  bool csv = true;
  bool json = true;
};

struct ExperimentSettings {
  ExperimentKind kind = ExperimentKind::exponent;
  std::int64_t clock_n1 = 1000;
  std::int64_t clock_n2 = 4000;
  std::int64_t clock_replicas = 500;
};

struct RunConfig {
  FieldConfig field;
  WalkSettings walk;
  RegenConfig regen;
  OutputSettings outputs;
  ExperimentSettings experiment;
};

struct ConfigResult {
  std::optional<RunConfig> config;
  std::vector<std::string> errors;   // every violation, each naming its key
  std::vector<std::string> notices;  // defaults applied, normalizations
};

ConfigResult parse_config(const std::string& text);
ConfigResult load_config(const std::string& path);

// Fully resolved config as INI text; parsing it back yields the same config.
std::string to_ini(const RunConfig& cfg);

// Log-spaced checkpoint times up to `steps`, always including `steps`.
std::vector<std::int64_t> checkpoint_times(const WalkSettings& w);

}  // namespace trapwalk
