#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "trapwalk/config.hpp"

namespace trapwalk {

struct ReplicaSeeds {
  int index = 0;
  std::uint64_t env_seed = 0;   // environment of this replica
  std::uint64_t walk_seed = 0;  // walk steps
  std::uint64_t aux_seed = 0;   // exponentials for W_infty samples, kept apart from the walk
};
ReplicaSeeds replica_seeds(const RunConfig& cfg, int index);

struct ReplicaRow {
  int replica = 0;
  std::string source;
  ReplicaSeeds seeds;
  std::int64_t steps = 0;
  std::vector<int> end;
  double end_level = 0.0;
  std::int64_t regenerations = 0;
  std::int64_t tau1 = -1;
  std::int64_t stored_chunks = 0;
};

struct LevelRow {
  int replica = 0;
  std::string source;
  std::int64_t t = 0;
  std::vector<int> x;
  double level = 0.0;
};

struct BlockRow {
  int replica = 0;
  std::string source;
  std::int64_t block = 0;
  std::int64_t start = 0;
  std::int64_t end = 0;
  std::int64_t duration = 0;
  std::vector<int> disp;
  int chi = 0;
  double max_conductance = 0.0;
  std::int64_t vertices = 0;
  std::int64_t edges_met = 0;
  int LT = 0, SLT = 0, OLT = 0, NLT = 0;
  double trap_conductance = 0.0;
  std::int64_t time_on_trap = 0;
  std::int64_t V_n = 0;
  double pi_bar = 0.0;
  double W_n = 0.0;
  double W_infty = 0.0;
  std::int64_t time_below_n = 0;
};

struct Tables {
  int dim = 2;
  std::vector<ReplicaRow> replicas;
  std::vector<LevelRow> levels;
  std::vector<BlockRow> blocks;
};

struct ReplicaOutput {
  ReplicaRow row;
  std::vector<LevelRow> levels;
  std::vector<BlockRow> blocks;
  double seconds = 0.0;
};

// One replica: environment, walk, checkpoints and (for block experiments) the block table.
ReplicaOutput simulate_replica(const RunConfig& cfg, int index, const std::string& source = "");

// All replicas on a bounded worker pool; rows come back in replica order whatever the worker count.
Tables simulate(const RunConfig& cfg, int workers, const std::string& source, std::vector<double>* seconds = nullptr);

// Aggregate report (JSON text) for the experiment kind; deterministic in the tables.
std::string analyze(const RunConfig& cfg, const Tables& tables);

std::string replicas_csv(const Tables& t);
std::string levels_csv(const Tables& t);
std::string blocks_csv(const Tables& t);
Tables read_tables(const std::string& dir, int dim);

struct RunOptions {
  std::string out_dir;
  int workers = 1;
  bool overwrite = false;
};

struct RunSummary {
  std::string out_dir;
  std::string run_id;
  std::vector<std::string> files;
  bool all_passed = true;  // oracle suite only
};

std::string run_id_of(const RunConfig& cfg);
std::string artifact_version();

RunSummary run_experiment(const RunConfig& cfg, const RunOptions& opts);
// Re-executes the run recorded in a manifest.
RunSummary rerun_from_manifest(const std::string& manifest_path, const RunOptions& opts);
// Concatenates runs of one configuration that cover disjoint replica sets and recomputes the report.
RunSummary merge_runs(const std::vector<std::string>& dirs, const RunOptions& opts);

}  // namespace trapwalk
