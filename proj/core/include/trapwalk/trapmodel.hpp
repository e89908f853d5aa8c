#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "trapwalk/env.hpp"
#include "trapwalk/regen.hpp"
#include "trapwalk/scan.hpp"
#include "trapwalk/walk.hpp"

namespace trapwalk {

enum class EdgeSide { plus, minus };

// e^- is the canonical first endpoint, e^+ the second. x_e is represented by e^-.
struct CollapsedPatch {
  struct Exit {
    Vertex y;
    EdgeSide side;      // endpoint of e that y is attached to
    double cstar;       // c_*([e^side, y])
    double weight;      // c([e^side, y]) / exp((e^+ + e^-).l)
  };
  LatticeEdge base_edge;
  Vertex collapsed_vertex;
  double pi_xe = 0.0;   // sum of exit weights
  double level_d = 0.0; // min endpoint level
  double level_m = 0.0; // max endpoint level
  std::vector<Exit> exits;  // plus-side exits first

  std::vector<double> collapsed_law() const;
  // Exact exit law of X from the given endpoint, in exit order.
  std::vector<double> exact_law(EdgeSide start) const;
  // Weight of e itself in the same normalization.
  double edge_weight = 0.0;
};

CollapsedPatch collapse(const ConductanceField& field, const LatticeEdge& e);

// Exit law of an edge from `start`: plus-side exits first, then minus-side exits.
std::vector<double> exact_exit_distribution(double c_e, const std::vector<double>& adj_plus,
                                            const std::vector<double>& adj_minus, EdgeSide start);

// q = 1 - c_e^2 / (pi_plus pi_minus).
double half_excursion_geometric_param(double c_e, double pi_plus, double pi_minus);

struct ExcursionRecord {
  Vertex entry_vertex;
  Vertex exit_vertex;
  std::int64_t steps_inside = 0;     // T^ex: time spent on the vertices of e
  std::int64_t crossings = 0;        // steps_inside - 1
  std::int64_t half_crossings = 0;   // floor(crossings / 2): completed round trips
  EdgeSide exit_side = EdgeSide::plus;
  int exit_index = 0;                // index into the exit list
};

// Step-by-step excursion on a bare edge with the given adjacent conductances.
ExcursionRecord simulate_excursion(double c_e, const std::vector<double>& adj_plus,
                                   const std::vector<double>& adj_minus, EdgeSide start, WalkRng& rng);
// Same on the lattice, starting on endpoint `entry`.
ExcursionRecord simulate_excursion(const ConductanceField& field, const LatticeEdge& e, const Vertex& entry,
                                   WalkRng& rng);

struct CoupledRun {
  PathTrack x_trace;  // X^e with x_e written as e^-
  PathTrack y_walk;   // Y^e
  std::optional<std::int64_t> decoupling_time;
  std::optional<std::int64_t> hit_time;  // T_e
  std::int64_t xe_visits_coupled = 0;    // visits to x_e while coupled
  double log_agreement = 0.0;            // sum of log(overlap mass) over coupled visits
};

// window_after_hit >= 0 stops the run at T_e + window_after_hit.
CoupledRun run_coupled(const ConductanceField& field, const LatticeEdge& e, const Vertex& start,
                       std::int64_t horizon, WalkRng& rng, std::int64_t window_after_hit = -1);

// Independent samplers for the two marginals.
PathTrack run_collapsed_walk(const ConductanceField& field, const LatticeEdge& e, const Vertex& start,
                             std::int64_t horizon, WalkRng& rng);
// Simulates X step by step and keeps its trace outside e until the trace has `horizon` steps.
PathTrack run_trace_direct(const ConductanceField& field, const LatticeEdge& e, const Vertex& start,
                           std::int64_t horizon, WalkRng& rng);
// Trace of a recorded trajectory outside e.
PathTrack trace_outside_edge(const EnhancedTrajectory& traj, const LatticeEdge& e, std::int64_t max_len);

// Conventions of the collapsed graph for the regeneration scans.
struct CollapsedPolicy {
  const ConductanceField* field;
  LatticeEdge e;
  Vertex rep;
  double lvl_min, lvl_max;
  explicit CollapsedPolicy(const ConductanceField& f, const LatticeEdge& edge);
  double level_d(const Vertex& v) const { return v == rep ? lvl_min : field->geometry().level(v); }
  double level_m(const Vertex& v) const { return v == rep ? lvl_max : field->geometry().level(v); }
  bool excluded(const Vertex& v) const { return v == rep; }
  bool open(const Vertex& v) const { return v != rep && is_open(*field, v); }
  bool forward_neighbour(const Vertex& v, const Vertex& x0) const;
  bool e1_step(const Vertex& a, const Vertex& b) const {
    return a != rep && b != rep && direction_between(a, b, field->dim()) == 0;
  }
};

RegenTimes collapsed_regenerations(const ConductanceField& field, const LatticeEdge& e, const PathTrack& y,
                                   int margin_steps);

struct TrapObservables {
  std::int64_t V_n = 0;
  double pi_bar = 0.0;
  std::int64_t T_on_edge = 0;
  double W_n = 0.0;
  double W_infty_sample = 0.0;
  double trap_conductance = 0.0;
};

// Block must carry e^(n) (LT). The exponentials come from `rng`, kept apart from walk streams.
TrapObservables collect_trap_observables(const EnhancedTrajectory& traj, const ConductanceField& field,
                                         const RegenBlock& block, WalkRng& rng);

}  // namespace trapwalk
