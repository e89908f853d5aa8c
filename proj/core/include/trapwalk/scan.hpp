#pragma once

// Forward scans shared by the lattice walk and the collapsed-edge walk.
// A cursor exposes time(), position(), done(), chunk() and advance(k).

#include <algorithm>
#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

#include "trapwalk/env.hpp"
#include "trapwalk/walk.hpp"

namespace trapwalk {

// Explicit path with arbitrary jumps (the collapsed walk leaves x_e to non-neighbours).
struct PathTrack {
  std::vector<Vertex> positions;
  std::vector<std::uint8_t> zbits;  // zbits[0] unused
  std::int64_t length() const { return static_cast<std::int64_t>(positions.size()) - 1; }
};

class PathCursor {
 public:
  PathCursor(const PathTrack* p, std::int64_t t) : p_(p), t_(t) {}
  std::int64_t time() const { return t_; }
  const Vertex& position() const { return p_->positions[static_cast<std::size_t>(t_)]; }
  bool done() const { return t_ >= p_->length(); }
  Chunk chunk() const {
    Chunk c;
    c.t0 = t_;
    c.from = p_->positions[static_cast<std::size_t>(t_)];
    c.to = p_->positions[static_cast<std::size_t>(t_ + 1)];
    c.z = p_->zbits[static_cast<std::size_t>(t_ + 1)] != 0;
    return c;
  }
  void advance(std::int64_t k) { t_ += k; }

 private:
  const PathTrack* p_;
  std::int64_t t_;
};

// Plain lattice conventions.
struct LatticePolicy {
  const ConductanceField* field;
  double level_d(const Vertex& v) const { return field->geometry().level(v); }
  double level_m(const Vertex& v) const { return field->geometry().level(v); }
  bool excluded(const Vertex&) const { return false; }
  bool open(const Vertex& v) const { return is_open(*field, v); }
  bool forward_neighbour(const Vertex& v, const Vertex& x0) const {
    int j = direction_between(x0, v, field->dim());
    return j >= 0 && j < field->dim();
  }
  bool e1_step(const Vertex& a, const Vertex& b) const { return direction_between(a, b, field->dim()) == 0; }
};

struct ScanState {
  double run_max = -std::numeric_limits<double>::infinity();  // max level_m seen since procedure start
  void see(double l) { run_max = std::max(run_max, l); }
};

// D from the cursor's current time; the cursor ends at the deciding time.
template <class Cursor, class Policy>
DResult scan_D(Cursor& cur, const Policy& pol, double margin, ScanState* st = nullptr) {
  const Vertex x0 = cur.position();
  const std::int64_t s = cur.time();
  const double L0 = pol.level_d(x0);
  const double target = L0 + margin - kLevelEps;
  auto see = [&](const Vertex& v) {
    if (st) st->see(pol.level_m(v));
  };
  DResult res;
  res.margin = margin;
  while (!cur.done()) {
    Chunk c = cur.chunk();
    if (!c.is_run()) {
      const std::int64_t n = c.t0 + 1;
      const double lv = pol.level_d(c.to);
      bool viol = lv <= L0 + kLevelEps || (n == s + 1 && !c.z) ||
                  (!c.z && pol.forward_neighbour(c.from, x0));
      see(c.to);
      cur.advance(1);
      if (viol) {
        res.status = DStatus::finite;
        res.n = n - s;
        return res;
      }
      if (lv >= target) {
        res.status = DStatus::certified_infinite;
        res.n = n - s;
        return res;
      }
      continue;
    }
    const std::int64_t N = c.count;
    std::int64_t best = std::numeric_limits<std::int64_t>::max();
    if (pol.level_d(c.to) <= L0 + kLevelEps) best = 1;
    if (N >= 2 && pol.level_d(c.from) <= L0 + kLevelEps) best = std::min<std::int64_t>(best, 2);
    if (c.t0 == s && !c.z_at(0)) best = 1;
    const std::int64_t lim = std::min(N, best);
    if (pol.forward_neighbour(c.from, x0)) {
      std::int64_t k = c.first_z0(0, 0, lim);
      if (k >= 0) best = std::min(best, k + 1);
    }
    if (pol.forward_neighbour(c.to, x0)) {
      std::int64_t k = c.first_z0(1, 1, std::min(N, best));
      if (k >= 0) best = std::min(best, k + 1);
    }
    if (best > 1 && pol.level_d(c.to) >= target) {
      see(c.to);
      cur.advance(1);
      res.status = DStatus::certified_infinite;
      res.n = c.t0 + 1 - s;
      return res;
    }
    if (best <= N) {
      see(c.to);
      if (best >= 2) see(c.from);
      cur.advance(best);
      res.status = DStatus::finite;
      res.n = c.t0 + best - s;
      return res;
    }
    see(c.to);
    see(c.from);
    cur.advance(N);
  }
  res.status = DStatus::censored;
  res.n = cur.time() - s;
  return res;
}

// Advances to the first time after now with level_m > M. False if the path ends first.
template <class Cursor, class Policy>
bool scan_hit_above(Cursor& cur, const Policy& pol, double M, ScanState* st = nullptr) {
  while (!cur.done()) {
    Chunk c = cur.chunk();
    double l = pol.level_m(c.to);
    if (st) st->see(l);
    if (l > M + kLevelEps) {
      cur.advance(1);
      return true;
    }
    if (c.is_run() && c.count >= 2 && st) st->see(pol.level_m(c.from));
    cur.advance(c.count);
  }
  return false;
}

// M^(K) on the walk shifted to the cursor's time; leaves the cursor at the candidate.
// Run endpoints are never open, so runs are skipped in O(1).
template <class Cursor, class Policy>
std::optional<std::int64_t> scan_Mcal(Cursor& cur, const Policy& pol, ScanState* st = nullptr) {
  const std::int64_t T = cur.time();
  if (cur.done()) return std::nullopt;
  Vertex a = cur.position();  // X_{i-2}
  {
    Chunk c = cur.chunk();
    if (st) st->see(pol.level_m(c.to));
    cur.advance(1);
  }
  Vertex b = cur.position();  // X_{i-1}
  double max_before = -std::numeric_limits<double>::infinity();
  auto consider = [&](const Vertex& c) -> bool {
    if (st) st->see(pol.level_m(c));
    bool hit = max_before < pol.level_m(a) - kLevelEps && pol.e1_step(a, b) && pol.e1_step(b, c) &&
               !pol.excluded(a) && !pol.excluded(b) && !pol.excluded(c) && pol.open(c);
    max_before = std::max(max_before, pol.level_m(a));
    a = b;
    b = c;
    return hit;
  };
  while (!cur.done()) {
    Chunk c = cur.chunk();
    if (!c.is_run()) {
      cur.advance(1);
      if (consider(c.to)) return cur.time() - T;
      continue;
    }
    const std::int64_t N = c.count;
    const std::int64_t head = std::min<std::int64_t>(N, 3);
    for (std::int64_t k = 1; k <= head; ++k) {
      cur.advance(1);
      if (consider(c.pos_at(k))) return cur.time() - T;
    }
    if (N > head) {
      max_before = std::max({max_before, pol.level_m(c.from), pol.level_m(c.to)});
      a = c.pos_at(N - 1);
      b = c.pos_at(N);
      cur.advance(N - head);
    }
  }
  return std::nullopt;
}

// One application of the tau_1 procedure from the cursor's time.
// On success returns the cursor positioned at tau_1 (absolute time).
template <class Cursor, class Policy>
std::optional<Cursor> scan_first_regeneration(Cursor cur, const Policy& pol, double margin) {
  ScanState st;
  st.see(pol.level_m(cur.position()));
  double M = st.run_max;
  for (;;) {
    if (!scan_hit_above(cur, pol, M, &st)) return std::nullopt;
    if (!scan_Mcal(cur, pol, &st)) return std::nullopt;
    Cursor at_S = cur;
    DResult r = scan_D(cur, pol, margin, &st);
    if (r.status == DStatus::certified_infinite) return at_S;
    if (r.status == DStatus::censored) return std::nullopt;
    M = st.run_max;
  }
}

struct RegenTimes {
  std::vector<std::int64_t> taus;
  std::vector<Vertex> positions;
};

template <class Cursor, class Policy>
RegenTimes scan_regenerations(Cursor cur, const Policy& pol, double margin,
                              std::size_t max_count = std::numeric_limits<std::size_t>::max()) {
  RegenTimes out;
  while (out.taus.size() < max_count) {
    auto next = scan_first_regeneration(cur, pol, margin);
    if (!next) break;
    cur = *next;
    out.taus.push_back(cur.time());
    out.positions.push_back(cur.position());
  }
  return out;
}

}  // namespace trapwalk
