#include "trapwalk/regen.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

#include "trapwalk/scan.hpp"

namespace trapwalk {

RegenConfig RegenConfig::resolved(const Geometry& geo) const {
  RegenConfig r = *this;
  if (r.alpha <= 0.0) r.alpha = geo.dim() + 4.0;
  if (r.margin_steps <= 0) r.margin_steps = default_margin_steps(geo);
  if (r.notable_floor <= 0.0) r.notable_floor = std::pow(r.n_threshold, r.delta);
  if (!(r.delta > 0.0 && r.delta < 1.0)) throw std::invalid_argument("delta must lie in (0,1)");
  return r;
}

std::optional<std::int64_t> find_Mcal(const EnhancedTrajectory& traj, const ConductanceField& field,
                                      std::int64_t from) {
  TrajectoryCursor cur = traj.cursor_at(from);
  LatticePolicy pol{&field};
  return scan_Mcal(cur, pol);
}

int chi_of(const std::vector<Vertex>& relative, const Geometry& geo, double alpha) {
  double L = 0.0, T = 0.0;
  for (const auto& v : relative) {
    L = std::max(L, std::abs(geo.level(v)));
    T = std::max(T, geo.transverse_extent(v));
  }
  auto fits = [&](int m) {
    return L <= m + kLevelEps && T <= std::pow(static_cast<double>(m), alpha) + kLevelEps;
  };
  int m = std::max(0, static_cast<int>(std::ceil(L - kLevelEps)));
  if (T > 0.0) m = std::max(m, static_cast<int>(std::ceil(std::pow(T, 1.0 / alpha) - 1e-12)));
  while (!fits(m)) ++m;
  while (m > 0 && fits(m - 1)) --m;
  return m;
}

double pi_bar_of(const ConductanceField& field, const LatticeEdge& e) {
  const int d = field.dim();
  const Geometry& g = field.geometry();
  const Vertex a = e.first();
  const Vertex b = e.second();
  double s = 0.0;
  for (int side = 0; side < 2; ++side) {
    const Vertex& u = side == 0 ? a : b;
    const Vertex& w = side == 0 ? b : a;
    for (int j = 0; j < 2 * d; ++j) {
      Vertex y = neighbour(u, j, d);
      if (y == w) continue;
      s += field.conductance(u, j) * std::exp(g.lambda() * g.level(y - w));
    }
  }
  return s;
}

namespace {

bool adjacent(const LatticeEdge& a, const LatticeEdge& b) {
  if (a == b) return false;
  Vertex a2 = a.second(), b2 = b.second();
  return a.first() == b.first() || a.first() == b2 || a2 == b.first() || a2 == b2;
}

struct FlagResult {
  TrapFlags flags;
  bool has_trap = false;
  LatticeEdge trap;
  double trap_c = 0.0;
};

FlagResult flags_from(const std::vector<NotableEdge>& notable, double n, double delta, int chi,
                      double alpha, const Vertex& origin, const Geometry& geo) {
  FlagResult r;
  const NotableEdge* first = nullptr;
  std::vector<const NotableEdge*> large;
  for (const auto& ne : notable) {
    if (ne.met_time < 0 || ne.conductance < n) continue;
    large.push_back(&ne);
    if (!first || ne.met_time < first->met_time ||
        (ne.met_time == first->met_time && ne.edge < first->edge))
      first = &ne;
  }
  if (!first) return r;
  r.flags.LT = true;
  r.has_trap = true;
  r.trap = first->edge;
  r.trap_c = first->conductance;
  const double small = std::pow(n, delta);
  const double Lbox = 2.0 * chi;
  const double Tbox = 2.0 * std::pow(static_cast<double>(chi), alpha);
  int count = 0;
  for (const auto& ne : notable) {
    if (ne.conductance < small) continue;
    bool in_scope = ne.met_time >= 0;
    if (!in_scope)
      for (const auto* l : large)
        if (adjacent(ne.edge, l->edge)) {
          in_scope = true;
          break;
        }
    if (!in_scope) continue;
    if (!geo.in_box(ne.edge.first() - origin, Lbox, Tbox) || !geo.in_box(ne.edge.second() - origin, Lbox, Tbox))
      continue;
    ++count;
  }
  r.flags.NLT = count;
  r.flags.SLT = count >= 2;
  r.flags.OLT = count == 1;
  return r;
}

}  // namespace

EdgeVisitCounts count_edge_visits(const EnhancedTrajectory& traj, std::int64_t begin, std::int64_t end,
                                  const LatticeEdge& e) {
  EdgeVisitCounts out;
  TrajectoryCursor cur = traj.cursor_at(begin);
  while (cur.time() < end && !cur.done()) {
    Chunk c = cur.chunk();
    std::int64_t n = std::min(c.count, end - c.t0);
    const bool in_from = e.contains(c.from);
    const bool in_to = e.contains(c.to);
    if (in_from && in_to) {
      out.crossings += n;
    } else if (in_to) {
      out.entries += (n + 1) / 2;
    } else if (in_from) {
      out.entries += n / 2;
    }
    cur.advance(n);
  }
  return out;
}

RegenBlock annotate_block(const EnhancedTrajectory& traj, const ConductanceField& field, std::int64_t begin,
                          std::int64_t end, const RegenConfig& cfg, std::size_t index) {
  const int d = field.dim();
  const Geometry& geo = field.geometry();
  RegenBlock b;
  b.index = index;
  b.start_time = begin;
  b.end_time = end;
  b.duration = end - begin;
  b.threshold_n = cfg.n_threshold;
  b.delta = cfg.delta;

  TrajectoryCursor cur = traj.cursor_at(begin);
  const Vertex origin = cur.position();
  b.start_position = origin;
  std::unordered_map<Vertex, std::int64_t, VertexHash> first_visit;
  std::vector<Vertex> order;
  auto visit = [&](const Vertex& v, std::int64_t t) {
    if (first_visit.emplace(v, t).second) order.push_back(v);
  };
  std::unordered_map<LatticeEdge, std::int64_t, EdgeHash> crossings;
  visit(origin, begin);
  while (cur.time() < end) {
    Chunk c = cur.chunk();
    std::int64_t n = std::min(c.count, end - c.t0);
    crossings[LatticeEdge::between(c.from, c.to)] += n;
    visit(c.to, c.t0 + 1);
    cur.advance(n);
  }
  b.displacement = cur.position() - origin;
  b.vertices_visited = order.size();

  std::vector<Vertex> rel;
  rel.reserve(order.size());
  for (const auto& v : order) rel.push_back(v - origin);
  b.chi = chi_of(rel, geo, cfg.alpha);

  // Edges met, in order of first contact.
  std::unordered_map<LatticeEdge, std::size_t, EdgeHash> met_index;
  std::vector<NotableEdge> met;
  for (const auto& v : order) {
    const std::int64_t tv = first_visit[v];
    for (int j = 0; j < 2 * d; ++j) {
      LatticeEdge e = LatticeEdge::from(v, j, d);
      if (met_index.count(e)) continue;
      met_index.emplace(e, met.size());
      met.push_back({e, field.conductance_of(e), tv});
    }
  }
  b.edges_met = met.size();
  const NotableEdge* mx = nullptr;
  for (const auto& m : met)
    if (!mx || m.conductance > mx->conductance || (m.conductance == mx->conductance && m.edge < mx->edge))
      mx = &m;
  b.max_conductance = mx->conductance;
  b.max_edge = mx->edge;
  b.pi_bar = pi_bar_of(field, b.max_edge);
  for (const auto& [e, n] : crossings) {
    const double c = met[met_index.at(e)].conductance;
    if (c < cfg.n_threshold) b.time_below_threshold += n;
    if (e == b.max_edge) b.time_on_max_edge = n;
  }

  // Notable: met edges above the floor plus their unmet neighbours above the floor.
  std::vector<NotableEdge> notable;
  std::unordered_set<LatticeEdge, EdgeHash> added;
  for (const auto& m : met) {
    if (m.conductance < cfg.notable_floor) continue;
    notable.push_back(m);
    added.insert(m.edge);
  }
  const std::size_t n_met_notable = notable.size();
  for (std::size_t i = 0; i < n_met_notable; ++i) {
    const LatticeEdge e = notable[i].edge;
    for (const Vertex& u : {e.first(), e.second()}) {
      if (first_visit.count(u)) continue;
      for (int j = 0; j < 2 * d; ++j) {
        LatticeEdge f = LatticeEdge::from(u, j, d);
        if (added.count(f) || met_index.count(f)) continue;
        double c = field.conductance_of(f);
        if (c < cfg.notable_floor) continue;
        notable.push_back({f, c, -1});
        added.insert(f);
      }
    }
  }
  FlagResult fr = flags_from(notable, cfg.n_threshold, cfg.delta, b.chi, cfg.alpha, origin, geo);
  b.flags = fr.flags;
  b.has_trap_edge = fr.has_trap;
  if (fr.has_trap) {
    b.trap_edge = fr.trap;
    b.trap_conductance = fr.trap_c;
    auto it = crossings.find(fr.trap);
    b.time_on_trap_edge = it == crossings.end() ? 0 : it->second;
    b.visits_V = count_edge_visits(traj, begin, end, fr.trap).entries;
  }
  if (cfg.keep_notable) b.notable = std::move(notable);
  return b;
}

RegenSequence detect_regenerations(const EnhancedTrajectory& traj, const ConductanceField& field,
                                   const RegenConfig& cfg_in) {
  RegenSequence seq;
  seq.config = cfg_in.resolved(field.geometry());
  const RegenConfig& cfg = seq.config;
  LatticePolicy pol{&field};
  const double margin = margin_level(field.geometry(), cfg.margin_steps);
  TrajectoryCursor cur = traj.cursor();
  while (seq.blocks.size() < cfg.max_blocks) {
    auto next = scan_first_regeneration(cur, pol, margin);
    if (!next) break;
    const std::int64_t t = next->time();
    if (!seq.taus.empty() && cfg.annotate) {
      seq.blocks.push_back(annotate_block(traj, field, seq.taus.back(), t, cfg, seq.blocks.size()));
    } else if (!seq.taus.empty()) {
      RegenBlock b;
      b.index = seq.blocks.size();
      b.start_time = seq.taus.back();
      b.end_time = t;
      b.duration = t - b.start_time;
      b.threshold_n = cfg.n_threshold;
      b.delta = cfg.delta;
      seq.blocks.push_back(std::move(b));
    }
    seq.taus.push_back(t);
    cur = *next;
  }
  seq.censored_tail = seq.taus.empty() || seq.taus.back() < traj.length();
  if (!cfg.annotate && !seq.blocks.empty()) {
    // Positions still matter for displacement.
    TrajectoryCursor c = traj.cursor_at(seq.taus.front());
    Vertex prev = c.position();
    for (auto& b : seq.blocks) {
      while (c.time() < b.end_time) {
        Chunk ch = c.chunk();
        c.advance(std::min(ch.count, b.end_time - ch.t0));
      }
      b.start_position = prev;
      b.displacement = c.position() - prev;
      prev = c.position();
    }
  }
  return seq;
}

std::pair<std::int64_t, std::int64_t> split_block_time(const EnhancedTrajectory& traj,
                                                       const ConductanceField& field,
                                                       const RegenBlock& block, double t) {
  if (!block.certified) throw std::invalid_argument("block is not certified");
  std::int64_t below = 0, above = 0;
  TrajectoryCursor cur = traj.cursor_at(block.start_time);
  while (cur.time() < block.end_time) {
    Chunk c = cur.chunk();
    std::int64_t n = std::min(c.count, block.end_time - c.t0);
    if (field.conductance_of(LatticeEdge::between(c.from, c.to)) < t)
      below += n;
    else
      above += n;
    cur.advance(n);
  }
  return {below, above};
}

std::vector<RegenBlock> classify_traps(std::vector<RegenBlock> blocks, double n, double delta,
                                       const Geometry& geo, double alpha, double notable_floor) {
  if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("delta must lie in (0,1)");
  if (std::pow(n, delta) < notable_floor * (1.0 - 1e-12))
    throw std::invalid_argument("n^delta is below the stored notable floor");
  for (auto& b : blocks) {
    FlagResult fr = flags_from(b.notable, n, delta, b.chi, alpha, b.start_position, geo);
    b.flags = fr.flags;
    b.threshold_n = n;
    b.delta = delta;
    b.has_trap_edge = fr.has_trap;
    if (fr.has_trap) {
      b.trap_edge = fr.trap;
      b.trap_conductance = fr.trap_c;
    }
  }
  return blocks;
}

}  // namespace trapwalk
