#include "trapwalk/trapmodel.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>

namespace trapwalk {

namespace {

int pick(const std::vector<double>& w, double u) {
  double total = std::accumulate(w.begin(), w.end(), 0.0);
  double target = u * total;
  double acc = 0.0;
  int last = 0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (w[i] <= 0.0) continue;
    last = static_cast<int>(i);
    acc += w[i];
    if (target <= acc) return static_cast<int>(i);
  }
  return last;
}

}  // namespace

CollapsedPatch collapse(const ConductanceField& field, const LatticeEdge& e) {
  const int d = field.dim();
  const Geometry& g = field.geometry();
  CollapsedPatch p;
  p.base_edge = e;
  p.collapsed_vertex = e.first();
  const Vertex minus = e.first();
  const Vertex plus = e.second();
  p.level_d = std::min(g.level(minus), g.level(plus));
  p.level_m = std::max(g.level(minus), g.level(plus));
  p.edge_weight = field.conductance_of(e);
  for (EdgeSide side : {EdgeSide::plus, EdgeSide::minus}) {
    const Vertex& u = side == EdgeSide::plus ? plus : minus;
    const Vertex& w = side == EdgeSide::plus ? minus : plus;
    for (int j = 0; j < 2 * d; ++j) {
      Vertex y = neighbour(u, j, d);
      if (y == w) continue;
      double c = field.conductance(u, j);
      double wt = c * std::exp(g.lambda() * g.level(y - w));
      p.exits.push_back({y, side, c, wt});
      p.pi_xe += wt;
    }
  }
  return p;
}

std::vector<double> CollapsedPatch::collapsed_law() const {
  std::vector<double> out;
  out.reserve(exits.size());
  for (const auto& x : exits) out.push_back(x.weight / pi_xe);
  return out;
}

std::vector<double> CollapsedPatch::exact_law(EdgeSide start) const {
  std::vector<double> ap, am;
  for (const auto& x : exits) (x.side == EdgeSide::plus ? ap : am).push_back(x.weight);
  return exact_exit_distribution(edge_weight, ap, am, start);
}

std::vector<double> exact_exit_distribution(double c_e, const std::vector<double>& adj_plus,
                                            const std::vector<double>& adj_minus, EdgeSide start) {
  if (!(c_e > 0.0)) throw std::invalid_argument("edge conductance must be positive");
  if (adj_plus.empty() || adj_plus.size() != adj_minus.size())
    throw std::invalid_argument("need the same positive number of adjacent weights per side");
  double sp = 0.0, sm = 0.0;
  for (double w : adj_plus) {
    if (!(w > 0.0)) throw std::invalid_argument("adjacent conductances must be positive");
    sp += w;
  }
  for (double w : adj_minus) {
    if (!(w > 0.0)) throw std::invalid_argument("adjacent conductances must be positive");
    sm += w;
  }
  const double pi_p = c_e + sp, pi_m = c_e + sm;
  // 1 - pp' = (c sp + c sm + sp sm) / (pi_p pi_m), free of cancellation.
  const double denom = (c_e * (sp + sm) + sp * sm) / (pi_p * pi_m);
  std::vector<double> out;
  out.reserve(adj_plus.size() * 2);
  const bool from_plus = start == EdgeSide::plus;
  const double near_pi = from_plus ? pi_p : pi_m;
  const double far_pi = from_plus ? pi_m : pi_p;
  const double p_cross = c_e / near_pi;
  for (double w : adj_plus) out.push_back(from_plus ? (w / near_pi) / denom : (w / far_pi) * p_cross / denom);
  for (double w : adj_minus) out.push_back(from_plus ? (w / far_pi) * p_cross / denom : (w / near_pi) / denom);
  return out;
}

double half_excursion_geometric_param(double c_e, double pi_plus, double pi_minus) {
  if (!(c_e > 0.0) || !(c_e < pi_plus) || !(c_e < pi_minus))
    throw std::invalid_argument("need 0 < c_e < min(pi_plus, pi_minus)");
  const double sp = pi_plus - c_e, sm = pi_minus - c_e;
  return (c_e * (sp + sm) + sp * sm) / (pi_plus * pi_minus);
}

ExcursionRecord simulate_excursion(double c_e, const std::vector<double>& adj_plus,
                                   const std::vector<double>& adj_minus, EdgeSide start, WalkRng& rng) {
  double sp = std::accumulate(adj_plus.begin(), adj_plus.end(), 0.0);
  double sm = std::accumulate(adj_minus.begin(), adj_minus.end(), 0.0);
  ExcursionRecord r;
  EdgeSide at = start;
  r.steps_inside = 1;
  for (;;) {
    double s = at == EdgeSide::plus ? sp : sm;
    if (rng.uniform() * (c_e + s) <= c_e) {
      at = at == EdgeSide::plus ? EdgeSide::minus : EdgeSide::plus;
      ++r.crossings;
      ++r.steps_inside;
      continue;
    }
    break;
  }
  r.exit_side = at;
  const auto& adj = at == EdgeSide::plus ? adj_plus : adj_minus;
  int idx = pick(adj, rng.uniform());
  r.exit_index = (at == EdgeSide::plus ? 0 : static_cast<int>(adj_plus.size())) + idx;
  r.half_crossings = r.crossings / 2;
  return r;
}

ExcursionRecord simulate_excursion(const ConductanceField& field, const LatticeEdge& e, const Vertex& entry,
                                   WalkRng& rng) {
  if (!e.contains(entry)) throw std::invalid_argument("entry is not an endpoint of the edge");
  const int d = field.dim();
  ExcursionRecord r;
  r.entry_vertex = entry;
  Vertex at = entry;
  r.steps_inside = 1;
  for (;;) {
    TransitionKernel k = kernel_at(field, at);
    StepDraw s = sample_step(k, rng.uniform());
    Vertex next = neighbour(at, s.dir, d);
    if (e.contains(next)) {
      at = next;
      ++r.crossings;
      ++r.steps_inside;
      continue;
    }
    r.exit_vertex = next;
    break;
  }
  r.exit_side = at == e.first() ? EdgeSide::minus : EdgeSide::plus;
  r.half_crossings = r.crossings / 2;
  return r;
}

namespace {

struct CouplingTables {
  CollapsedPatch patch;
  std::vector<double> coll;
  std::vector<double> exact[2];    // [0] from plus, [1] from minus
  std::vector<double> overlap[2];
  std::vector<double> resid_x[2];
  std::vector<double> resid_y[2];
  double agree[2] = {0.0, 0.0};

  CouplingTables(const ConductanceField& field, const LatticeEdge& e) : patch(collapse(field, e)) {
    coll = patch.collapsed_law();
    for (int s = 0; s < 2; ++s) {
      exact[s] = patch.exact_law(s == 0 ? EdgeSide::plus : EdgeSide::minus);
      overlap[s].resize(coll.size());
      resid_x[s].resize(coll.size());
      resid_y[s].resize(coll.size());
      for (std::size_t i = 0; i < coll.size(); ++i) {
        overlap[s][i] = std::min(exact[s][i], coll[i]);
        resid_x[s][i] = exact[s][i] - overlap[s][i];
        resid_y[s][i] = coll[i] - overlap[s][i];
        agree[s] += overlap[s][i];
      }
    }
  }
};

int side_index(const LatticeEdge& e, const Vertex& endpoint) { return endpoint == e.first() ? 1 : 0; }

// One step of a walk off x_e; returns the new site (x_e written as rep) and the entry side if e was entered.
struct OffStep {
  Vertex site;
  bool z;
  int entry_side;  // -1 if e not entered
};

OffStep step_off(const ConductanceField& field, const LatticeEdge& e, const Vertex& at, WalkRng& rng) {
  TransitionKernel k = kernel_at(field, at);
  StepDraw s = sample_step(k, rng.uniform());
  Vertex next = neighbour(at, s.dir, field.dim());
  if (e.contains(next)) return {e.first(), s.z, side_index(e, next)};
  return {next, s.z, -1};
}

void push(PathTrack& p, const Vertex& v, bool z) {
  p.positions.push_back(v);
  p.zbits.push_back(z ? 1 : 0);
}

}  // namespace

CoupledRun run_coupled(const ConductanceField& field, const LatticeEdge& e, const Vertex& start,
                       std::int64_t horizon, WalkRng& rng, std::int64_t window_after_hit) {
  if (horizon < 1) throw std::invalid_argument("horizon must be at least 1");
  if (e.contains(start)) throw std::invalid_argument("start must lie off the edge");
  CouplingTables tab(field, e);
  const Vertex rep = e.first();
  CoupledRun out;
  push(out.x_trace, start, false);
  push(out.y_walk, start, false);
  Vertex x = start, y = start;
  int x_side = -1;
  bool coupled = true;
  for (std::int64_t k = 0; k < horizon; ++k) {
    if (window_after_hit >= 0 && out.hit_time && k >= *out.hit_time + window_after_hit) break;
    if (coupled) {
      if (x == rep) {
        const int s = x_side;
        ++out.xe_visits_coupled;
        out.log_agreement += std::log(tab.agree[s]);
        if (rng.uniform() <= tab.agree[s]) {
          int i = pick(tab.overlap[s], rng.uniform());
          x = y = tab.patch.exits[static_cast<std::size_t>(i)].y;
        } else {
          int ix = pick(tab.resid_x[s], rng.uniform());
          int iy = pick(tab.resid_y[s], rng.uniform());
          x = tab.patch.exits[static_cast<std::size_t>(ix)].y;
          y = tab.patch.exits[static_cast<std::size_t>(iy)].y;
          coupled = false;
          out.decoupling_time = k + 1;
        }
        push(out.x_trace, x, false);
        push(out.y_walk, y, false);
        x_side = -1;
        continue;
      }
      OffStep st = step_off(field, e, x, rng);
      if (st.entry_side >= 0 && !out.hit_time) out.hit_time = k + 1;
      x = y = st.site;
      x_side = st.entry_side;
      push(out.x_trace, x, st.z);
      push(out.y_walk, y, st.z);
      continue;
    }
    // Decoupled: independent moves.
    if (x == rep) {
      int i = pick(tab.exact[x_side], rng.uniform());
      x = tab.patch.exits[static_cast<std::size_t>(i)].y;
      x_side = -1;
      push(out.x_trace, x, false);
    } else {
      OffStep st = step_off(field, e, x, rng);
      x = st.site;
      x_side = st.entry_side;
      push(out.x_trace, x, st.z);
    }
    if (y == rep) {
      int i = pick(tab.coll, rng.uniform());
      y = tab.patch.exits[static_cast<std::size_t>(i)].y;
      push(out.y_walk, y, false);
    } else {
      OffStep st = step_off(field, e, y, rng);
      y = st.site;
      push(out.y_walk, y, st.z);
    }
  }
  return out;
}

PathTrack run_collapsed_walk(const ConductanceField& field, const LatticeEdge& e, const Vertex& start,
                             std::int64_t horizon, WalkRng& rng) {
  if (e.contains(start)) throw std::invalid_argument("start must lie off the edge");
  CollapsedPatch patch = collapse(field, e);
  std::vector<double> law = patch.collapsed_law();
  const Vertex rep = e.first();
  PathTrack p;
  push(p, start, false);
  Vertex y = start;
  for (std::int64_t k = 0; k < horizon; ++k) {
    if (y == rep) {
      y = patch.exits[static_cast<std::size_t>(pick(law, rng.uniform()))].y;
      push(p, y, false);
    } else {
      OffStep st = step_off(field, e, y, rng);
      y = st.site;
      push(p, y, st.z);
    }
  }
  return p;
}

PathTrack run_trace_direct(const ConductanceField& field, const LatticeEdge& e, const Vertex& start,
                           std::int64_t horizon, WalkRng& rng) {
  if (e.contains(start)) throw std::invalid_argument("start must lie off the edge");
  const int d = field.dim();
  const Vertex rep = e.first();
  PathTrack p;
  push(p, start, false);
  Vertex x = start;
  while (p.length() < horizon) {
    TransitionKernel k = kernel_at(field, x);
    StepDraw s = sample_step(k, rng.uniform());
    Vertex next = neighbour(x, s.dir, d);
    const bool in_now = e.contains(x), in_next = e.contains(next);
    x = next;
    if (in_now && in_next) continue;
    if (in_next)
      push(p, rep, s.z);
    else
      push(p, next, in_now ? false : s.z);
  }
  return p;
}

PathTrack trace_outside_edge(const EnhancedTrajectory& traj, const LatticeEdge& e, std::int64_t max_len) {
  const Vertex rep = e.first();
  PathTrack p;
  push(p, e.contains(traj.start()) ? rep : traj.start(), traj.start_z());
  TrajectoryCursor cur = traj.cursor();
  while (!cur.done() && p.length() < max_len) {
    Chunk c = cur.chunk();
    const bool in_from = e.contains(c.from), in_to = e.contains(c.to);
    if (in_from && in_to) {
      cur.advance(c.count);
      continue;
    }
    for (std::int64_t k = 0; k < c.count && p.length() < max_len; ++k) {
      const Vertex& a = c.pos_at(k);
      const Vertex& b = c.pos_at(k + 1);
      const bool ia = e.contains(a), ib = e.contains(b);
      push(p, ib ? rep : b, (ia && !ib) ? false : c.z_at(k));
    }
    cur.advance(c.count);
  }
  return p;
}

CollapsedPolicy::CollapsedPolicy(const ConductanceField& f, const LatticeEdge& edge)
    : field(&f), e(edge), rep(edge.first()) {
  const Geometry& g = f.geometry();
  lvl_min = std::min(g.level(edge.first()), g.level(edge.second()));
  lvl_max = std::max(g.level(edge.first()), g.level(edge.second()));
}

bool CollapsedPolicy::forward_neighbour(const Vertex& v, const Vertex& x0) const {
  const int d = field->dim();
  auto fwd = [&](const Vertex& w) {
    int j = direction_between(x0, w, d);
    return j >= 0 && j < d;
  };
  if (v == rep) return fwd(e.first()) || fwd(e.second());
  return fwd(v);
}

RegenTimes collapsed_regenerations(const ConductanceField& field, const LatticeEdge& e, const PathTrack& y,
                                   int margin_steps) {
  CollapsedPolicy pol(field, e);
  PathCursor cur(&y, 0);
  return scan_regenerations(cur, pol, margin_level(field.geometry(), margin_steps));
}

TrapObservables collect_trap_observables(const EnhancedTrajectory& traj, const ConductanceField& field,
                                         const RegenBlock& block, WalkRng& rng) {
  if (!block.flags.LT || !block.has_trap_edge) throw std::invalid_argument("block has no large trap");
  TrapObservables o;
  EdgeVisitCounts v = count_edge_visits(traj, block.start_time, block.end_time, block.trap_edge);
  o.V_n = v.entries;
  o.T_on_edge = v.crossings;
  o.trap_conductance = block.trap_conductance;
  o.pi_bar = pi_bar_of(field, block.trap_edge);
  o.W_n = static_cast<double>(o.T_on_edge) / block.trap_conductance;
  // Sum of V_n unit exponentials is Gamma(V_n, 1).
  double s = 0.0;
  if (o.V_n > 0) s = std::gamma_distribution<double>(static_cast<double>(o.V_n), 1.0)(rng);
  o.W_infty_sample = 2.0 * s / o.pi_bar;
  return o;
}

}  // namespace trapwalk
