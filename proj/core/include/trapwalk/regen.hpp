#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <utility>
#include <vector>

#include "trapwalk/env.hpp"
#include "trapwalk/walk.hpp"

namespace trapwalk {

struct RegenConfig {
  double alpha = 0.0;       // 0 selects d + 4
  int margin_steps = 0;     // 0 selects the geometry default
  double n_threshold = 1e4;
  double delta = 0.25;
  bool annotate = true;
  bool keep_notable = true;
  double notable_floor = 0.0;  // 0 selects n^delta
  std::size_t max_blocks = std::numeric_limits<std::size_t>::max();

  RegenConfig resolved(const Geometry& geo) const;
};

// Edge met in a block (met_time >= 0) or adjacent to a met edge (met_time == -1).
struct NotableEdge {
  LatticeEdge edge;
  double conductance = 0.0;
  std::int64_t met_time = -1;
};

struct TrapFlags {
  bool LT = false;
  bool SLT = false;
  bool OLT = false;
  int NLT = 0;
};

struct RegenBlock {
  std::size_t index = 0;
  std::int64_t start_time = 0;
  std::int64_t end_time = 0;
  std::int64_t duration = 0;
  Vertex start_position;
  Vertex displacement;
  int chi = 0;
  double max_conductance = 0.0;
  LatticeEdge max_edge;
  std::int64_t visits_V = 0;
  double pi_bar = 0.0;
  std::int64_t time_on_max_edge = 0;
  std::int64_t time_below_threshold = 0;
  TrapFlags flags;
  double threshold_n = 0.0;
  double delta = 0.0;
  // e^(n): first edge with c_* >= n met in the block.
  bool has_trap_edge = false;
  LatticeEdge trap_edge;
  double trap_conductance = 0.0;
  std::int64_t time_on_trap_edge = 0;
  std::size_t vertices_visited = 0;
  std::size_t edges_met = 0;
  bool certified = true;
  std::vector<NotableEdge> notable;
};

struct RegenSequence {
  std::vector<RegenBlock> blocks;
  std::vector<std::int64_t> taus;  // certified regeneration times, tau_1 first
  bool censored_tail = true;
  RegenConfig config;
};

// Relative index i of M^(K) on the walk shifted by `from`.
std::optional<std::int64_t> find_Mcal(const EnhancedTrajectory& traj, const ConductanceField& field,
                                      std::int64_t from);

RegenSequence detect_regenerations(const EnhancedTrajectory& traj, const ConductanceField& field,
                                   const RegenConfig& cfg);

RegenBlock annotate_block(const EnhancedTrajectory& traj, const ConductanceField& field, std::int64_t begin,
                          std::int64_t end, const RegenConfig& resolved_cfg, std::size_t index);

// (steps over edges with c_* < t, steps over edges with c_* >= t).
std::pair<std::int64_t, std::int64_t> split_block_time(const EnhancedTrajectory& traj,
                                                       const ConductanceField& field,
                                                       const RegenBlock& block, double t);

// Recomputes flags and e^(n) from the stored notable edges; needs n^delta >= the stored floor.
std::vector<RegenBlock> classify_traps(std::vector<RegenBlock> blocks, double n, double delta,
                                       const Geometry& geo, double alpha, double notable_floor);

// Smallest integer m with every vertex (relative) inside B(m, m^alpha).
int chi_of(const std::vector<Vertex>& relative, const Geometry& geo, double alpha);

// exp(-(e+ + e-).l) * pi(x_e): sum of the neighbour-edge weights of e.
double pi_bar_of(const ConductanceField& field, const LatticeEdge& e);

// Number of steps entering e from outside, and crossings of e, within [begin, end].
struct EdgeVisitCounts {
  std::int64_t entries = 0;
  std::int64_t crossings = 0;
};
EdgeVisitCounts count_edge_visits(const EnhancedTrajectory& traj, std::int64_t begin, std::int64_t end,
                                  const LatticeEdge& e);

}  // namespace trapwalk
