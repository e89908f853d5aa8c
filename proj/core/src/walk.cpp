#include "trapwalk/walk.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "trapwalk/scan.hpp"

namespace trapwalk {

TransitionKernel kernel_at(const ConductanceField& field, const Vertex& x) {
  TransitionKernel k;
  const int d = field.dim();
  const Geometry& g = field.geometry();
  const double K = field.K();
  k.dim = d;
  double sum = 0.0;
  double inflated = 0.0;
  for (int j = 0; j < 2 * d; ++j) {
    double c = field.conductance(x, j);
    k.cstar[static_cast<std::size_t>(j)] = c;
    double w = c * g.tilt(j);
    k.weight[static_cast<std::size_t>(j)] = w;
    sum += w;
    inflated += std::max(c, K) * g.tilt(j);
  }
  k.weight_sum = sum;
  for (int j = 0; j < 2 * d; ++j) {
    auto jj = static_cast<std::size_t>(j);
    k.p[jj] = k.weight[jj] / sum;
    k.pk[jj] = std::min(k.cstar[jj], 1.0 / K) * g.tilt(j) / inflated;
  }
  return k;
}

double log_pi(const ConductanceField& field, const Vertex& x) {
  const auto& g = field.geometry();
  return 2.0 * g.lambda() * g.level(x) + std::log(kernel_at(field, x).weight_sum);
}

StepDraw sample_step(const TransitionKernel& k, double u, int exclude) {
  const int n = 2 * k.dim;
  double total = 1.0;
  if (exclude >= 0) total = 1.0 - k.p[static_cast<std::size_t>(exclude)];
  double target = u * total;
  double acc = 0.0;
  int last = -1;
  for (int j = 0; j < n; ++j) {
    if (j == exclude) continue;
    auto jj = static_cast<std::size_t>(j);
    last = j;
    acc += k.pk[jj];
    if (target <= acc) return {j, true};
    acc += k.p[jj] - k.pk[jj];
    if (target <= acc) return {j, false};
  }
  return {last, false};
}

EnhancedState step_enhanced(const ConductanceField& field, const EnhancedState& state, WalkRng& rng) {
  TransitionKernel k = kernel_at(field, state.x);
  StepDraw s = sample_step(k, rng.uniform());
  return {neighbour(state.x, s.dir, field.dim()), s.z};
}

std::int64_t Chunk::first_z0(int parity, std::int64_t k_begin, std::int64_t k_end) const {
  if (!run) {
    if (parity == 0 && k_begin <= 0 && k_end > 0 && !z) return 0;
    return -1;
  }
  std::int64_t k = k_begin;
  if ((k & 1) != parity) ++k;
  for (; k < k_end; k += 2)
    if (!run->z_of(k0 + k)) return k;
  return -1;
}

// ---- trajectory ----

EnhancedTrajectory::EnhancedTrajectory(const Geometry& geo, const Vertex& start, bool z0)
    : geo_(geo), start_(start), z0_(z0), end_(start) {}

EnhancedTrajectory EnhancedTrajectory::from_path(const Geometry& geo, const std::vector<Vertex>& positions,
                                                 const std::vector<std::uint8_t>& zbits) {
  if (positions.empty()) throw std::invalid_argument("empty path");
  if (zbits.size() != positions.size()) throw std::invalid_argument("zbits length differs from positions");
  EnhancedTrajectory t(geo, positions.front(), zbits.front() != 0);
  t.ladder_.push_back(0);
  double top = geo.level(positions.front());
  for (std::size_t i = 1; i < positions.size(); ++i) {
    int j = direction_between(positions[i - 1], positions[i], geo.dim());
    if (j < 0) throw std::invalid_argument("consecutive positions are not nearest neighbours");
    t.append_step(j, zbits[i] != 0);
    if (geo.level(positions[i]) > top + kLevelEps) {
      top = geo.level(positions[i]);
      t.ladder_.push_back(static_cast<std::int64_t>(i));
    }
  }
  return t;
}

void EnhancedTrajectory::append_step(int dir, bool z) {
  if (record_path_) {
    if (codes_.size() % kSeekStride == 0) seek_.push_back({codes_.size(), runs_.size(), length_, end_});
    codes_.push_back(static_cast<std::uint8_t>(dir | (z ? 16 : 0)));
  }
  end_ = neighbour(end_, dir, geo_.dim());
  ++length_;
}

void EnhancedTrajectory::append_run(int dir, const RunRecord& rec) {
  if (rec.crossings <= 0) return;
  if (record_path_) {
    if (codes_.size() % kSeekStride == 0) seek_.push_back({codes_.size(), runs_.size(), length_, end_});
    codes_.push_back(static_cast<std::uint8_t>(dir | 32));
    runs_.push_back(rec);
  }
  if (rec.crossings & 1) end_ = neighbour(end_, dir, geo_.dim());
  length_ += rec.crossings;
}

TrajectoryCursor EnhancedTrajectory::cursor() const {
  TrajectoryCursor c;
  c.tr_ = this;
  c.pos_ = start_;
  return c;
}

TrajectoryCursor EnhancedTrajectory::cursor_at(std::int64_t t) const {
  if (t < 0 || t > length_) throw std::out_of_range("time outside trajectory");
  if (!record_path_ && t != 0) throw std::logic_error("trajectory was recorded without its path");
  TrajectoryCursor c = cursor();
  auto it = std::upper_bound(seek_.begin(), seek_.end(), t,
                             [](std::int64_t v, const SeekPoint& s) { return v < s.time; });
  if (it != seek_.begin()) {
    --it;
    c.code_ = it->code;
    c.run_ = it->run;
    c.t_ = it->time;
    c.pos_ = it->pos;
  }
  while (c.t_ < t) {
    Chunk ch = c.chunk();
    c.advance(std::min(ch.count, t - c.t_));
  }
  return c;
}

bool EnhancedTrajectory::z_at(std::int64_t t) const {
  if (t == 0) return z0_;
  TrajectoryCursor c = cursor_at(t - 1);
  return c.chunk().z_at(0);
}

MaterializedPath EnhancedTrajectory::materialize(std::int64_t max_states) const {
  if (length_ + 1 > max_states) throw std::length_error("trajectory too long to materialize");
  MaterializedPath m;
  m.positions.reserve(static_cast<std::size_t>(length_ + 1));
  m.positions.push_back(start_);
  m.zbits.push_back(z0_ ? 1 : 0);
  TrajectoryCursor c = cursor();
  while (!c.done()) {
    Chunk ch = c.chunk();
    for (std::int64_t k = 0; k < ch.count; ++k) {
      m.positions.push_back(ch.pos_at(k + 1));
      m.zbits.push_back(ch.z_at(k) ? 1 : 0);
    }
    c.advance(ch.count);
  }
  m.levels.reserve(m.positions.size());
  for (const auto& v : m.positions) m.levels.push_back(geo_.level(v));
  return m;
}

bool TrajectoryCursor::done() const { return t_ >= tr_->length_; }

Chunk TrajectoryCursor::chunk() const {
  Chunk c;
  c.t0 = t_;
  c.from = pos_;
  std::uint8_t code = tr_->codes_[code_];
  int dir = code & 15;
  const int d = tr_->geo_.dim();
  if (code & 32) {
    const RunRecord& rec = tr_->runs_[run_];
    c.run = &rec;
    c.k0 = offset_;
    c.count = rec.crossings - offset_;
    c.to = neighbour(pos_, (offset_ & 1) ? opposite(dir, d) : dir, d);
  } else {
    c.count = 1;
    c.z = (code & 16) != 0;
    c.to = neighbour(pos_, dir, d);
  }
  return c;
}

void TrajectoryCursor::advance(std::int64_t k) {
  std::uint8_t code = tr_->codes_[code_];
  int dir = code & 15;
  const int d = tr_->geo_.dim();
  if (code & 32) {
    const RunRecord& rec = tr_->runs_[run_];
    if (k & 1) pos_ = neighbour(pos_, (offset_ & 1) ? opposite(dir, d) : dir, d);
    offset_ += k;
    t_ += k;
    if (offset_ >= rec.crossings) {
      offset_ = 0;
      ++code_;
      ++run_;
    }
  } else {
    pos_ = neighbour(pos_, dir, d);
    ++t_;
    ++code_;
  }
}

// ---- simulation ----

namespace {

struct Recorder {
  const std::vector<std::int64_t>* cps;
  std::size_t next = 0;
  EnhancedTrajectory* tr;
  // Records checkpoints in (t_begin, t_end]: pos(t) = (t - t_begin odd) ? b : a.
  void span(std::int64_t t_begin, std::int64_t t_end, const Vertex& a, const Vertex& b) {
    while (next < cps->size() && (*cps)[next] <= t_end) {
      std::int64_t t = (*cps)[next];
      if (t > t_begin) tr->add_checkpoint(t, ((t - t_begin) & 1) ? b : a);
      ++next;
    }
  }
};

}  // namespace

EnhancedTrajectory run_walk(const ConductanceField& field, const Vertex& start, std::int64_t steps,
                            WalkRng& rng, const WalkOptions& opts) {
  if (steps < 1) throw std::invalid_argument("steps must be at least 1");
  if (!(opts.compress_threshold > field.K()))
    throw std::invalid_argument("compress threshold must exceed K");
  if (!std::is_sorted(opts.checkpoints.begin(), opts.checkpoints.end()))
    throw std::invalid_argument("checkpoints must be ascending");
  const int d = field.dim();
  const Geometry& geo = field.geometry();
  EnhancedTrajectory tr(geo, start, opts.start_z);
  tr.set_record_path(opts.record_path);
  Recorder rec{&opts.checkpoints, 0, &tr};
  while (rec.next < opts.checkpoints.size() && opts.checkpoints[rec.next] <= 0) {
    if (opts.checkpoints[rec.next] == 0) tr.add_checkpoint(0, start);
    ++rec.next;
  }
  tr.add_ladder(0);
  double ladder_level = geo.level(start);

  Vertex pos = start;
  std::int64_t t = 0;
  int exclude = -1;
  TransitionKernel kern = kernel_at(field, pos);
  while (t < steps) {
    StepDraw s = sample_step(kern, rng.uniform(), exclude);
    exclude = -1;
    tr.append_step(s.dir, s.z);
    Vertex prev = pos;
    pos = neighbour(pos, s.dir, d);
    ++t;
    rec.span(t - 1, t, pos, pos);
    double lv = geo.level(pos);
    if (lv > ladder_level + kLevelEps) {
      ladder_level = lv;
      tr.add_ladder(t);
      if (lv >= opts.stop_level) break;
    }
    const double c = kern.cstar[static_cast<std::size_t>(s.dir)];
    TransitionKernel prev_kern = kern;
    kern = kernel_at(field, pos);
    if (c < opts.compress_threshold || t >= steps) continue;

    // At a = pos with the heavy edge towards b = prev: sample the remaining crossings.
    const int back = opposite(s.dir, d);
    const auto ib = static_cast<std::size_t>(back);
    const auto is = static_cast<std::size_t>(s.dir);
    const double w_ab = kern.weight[ib], sig_a = kern.weight_sum - w_ab;
    const double w_ba = prev_kern.weight[is], sig_b = prev_kern.weight_sum - w_ba;
    // 1 - p_ab p_ba without cancellation.
    const double one_minus_pp = (w_ab * sig_b + sig_a * w_ba + sig_a * sig_b) /
                                ((w_ab + sig_a) * (w_ba + sig_b));
    const double log_pp = std::log1p(-one_minus_pp);
    std::int64_t R = sample_geometric(rng.uniform(), log_pp, std::int64_t{1} << 60);
    const double exit_here = (sig_a / (w_ab + sig_a)) / one_minus_pp;
    std::int64_t N = 2 * R + (rng.uniform() <= exit_here ? 0 : 1);
    bool truncated = false;
    if (N > steps - t) {
      N = steps - t;
      truncated = true;
    }
    if (N > 0) {
      RunRecord run;
      run.crossings = N;
      run.zkey = rng.next();
      run.r_start = kern.pk[ib] / kern.p[ib];
      run.r_other = prev_kern.pk[is] / prev_kern.p[is];
      tr.append_run(back, run);
      rec.span(t, t + N, pos, prev);
      t += N;
      if (N & 1) {
        std::swap(pos, prev);
        std::swap(kern, prev_kern);
      }
    }
    if (truncated) break;
    // The exit step must leave the edge.
    exclude = direction_between(pos, prev, d);
  }
  return tr;
}

double margin_level(const Geometry& geo, int margin_steps) {
  return margin_steps * geo.min_positive_step();
}

int default_margin_steps(const Geometry& geo) {
  return static_cast<int>(std::ceil(30.0 / geo.min_positive_step() - 1e-9));
}

DResult detect_D(const EnhancedTrajectory& traj, std::int64_t from, int margin_steps) {
  if (margin_steps < 1) throw std::invalid_argument("margin must be at least one step");
  TrajectoryCursor cur = traj.cursor_at(from);
  // Only the Z bits and levels matter here; openness is never queried.
  struct Policy {
    const Geometry* g;
    double level_d(const Vertex& v) const { return g->level(v); }
    double level_m(const Vertex& v) const { return g->level(v); }
    bool forward_neighbour(const Vertex& v, const Vertex& x0) const {
      int j = direction_between(x0, v, g->dim());
      return j >= 0 && j < g->dim();
    }
  } pol{&traj.geometry()};
  DResult r = scan_D(cur, pol, margin_level(traj.geometry(), margin_steps));
  if (r.status == DStatus::certified_infinite) r.margin = margin_level(traj.geometry(), margin_steps);
  return r;
}

}  // namespace trapwalk
