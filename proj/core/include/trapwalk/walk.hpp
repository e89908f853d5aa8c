#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <vector>

#include "trapwalk/env.hpp"
#include "trapwalk/lattice.hpp"
#include "trapwalk/rng.hpp"

namespace trapwalk {

struct TransitionKernel {
  int dim = 0;
  std::array<double, 2 * kMaxDim> cstar{};
  std::array<double, 2 * kMaxDim> weight{};  // c(x, x+e_j) / exp(2 l.x)
  std::array<double, 2 * kMaxDim> p{};
  std::array<double, 2 * kMaxDim> pk{};
  double weight_sum = 0.0;
};

TransitionKernel kernel_at(const ConductanceField& field, const Vertex& x);
// log pi(x), pi(x) = sum_y c(x, y).
double log_pi(const ConductanceField& field, const Vertex& x);

struct EnhancedState {
  Vertex x;
  bool z = false;
};

// Samples direction and z bit in one draw; `exclude` removes a direction and renormalizes.
struct StepDraw {
  int dir;
  bool z;
};
StepDraw sample_step(const TransitionKernel& k, double u, int exclude = -1);

EnhancedState step_enhanced(const ConductanceField& field, const EnhancedState& state, WalkRng& rng);

// Consecutive crossings of one heavy edge, sampled in closed form.
// Crossing k leaves the run's start vertex when k is even.
struct RunRecord {
  std::int64_t crossings = 0;
  std::uint64_t zkey = 0;
  double r_start = 0.0;  // P[Z = 1] for a crossing leaving the start vertex
  double r_other = 0.0;
  bool z_of(std::int64_t k) const {
    double u = to_unit_open0(hash_combine(zkey, static_cast<std::uint64_t>(k)));
    return u <= ((k & 1) ? r_other : r_start);
  }
};

// The portion of the path from time t0: `count` steps alternating between `from` and `to`.
struct Chunk {
  std::int64_t t0 = 0;
  Vertex from;
  Vertex to;
  std::int64_t count = 1;
  bool z = false;
  const RunRecord* run = nullptr;
  std::int64_t k0 = 0;

  bool is_run() const { return run != nullptr; }
  // Z of the step ending at time t0 + k + 1.
  bool z_at(std::int64_t k) const { return run ? run->z_of(k0 + k) : z; }
  const Vertex& pos_at(std::int64_t k) const { return (k & 1) ? to : from; }
  // Smallest k in [k_begin, k_end) with k % 2 == parity and z_at(k) == false; -1 if none.
  std::int64_t first_z0(int parity, std::int64_t k_begin, std::int64_t k_end) const;
};

class EnhancedTrajectory;

class TrajectoryCursor {
 public:
  TrajectoryCursor() = default;
  std::int64_t time() const { return t_; }
  const Vertex& position() const { return pos_; }
  bool done() const;
  Chunk chunk() const;
  void advance(std::int64_t k);

 private:
  friend class EnhancedTrajectory;
  const EnhancedTrajectory* tr_ = nullptr;
  std::size_t code_ = 0;
  std::size_t run_ = 0;
  std::int64_t offset_ = 0;
  std::int64_t t_ = 0;
  Vertex pos_;
};

struct Checkpoint {
  std::int64_t time = 0;
  Vertex position;
};

struct MaterializedPath {
  std::vector<Vertex> positions;
  std::vector<std::uint8_t> zbits;
  std::vector<double> levels;
};

// Compressed enhanced trajectory: one byte per ordinary step plus one record per heavy-edge run.
class EnhancedTrajectory {
 public:
  EnhancedTrajectory() = default;
  EnhancedTrajectory(const Geometry& geo, const Vertex& start, bool z0);

  // Fixture constructor: consecutive positions must be nearest neighbours; zbits[0] is Z_0.
  static EnhancedTrajectory from_path(const Geometry& geo, const std::vector<Vertex>& positions,
                                      const std::vector<std::uint8_t>& zbits);

  void append_step(int dir, bool z);
  void append_run(int dir, const RunRecord& rec);
  void add_checkpoint(std::int64_t t, const Vertex& v) { checkpoints_.push_back({t, v}); }
  void add_ladder(std::int64_t t) { ladder_.push_back(t); }
  void set_record_path(bool on) { record_path_ = on; }

  int dim() const { return geo_.dim(); }
  const Geometry& geometry() const { return geo_; }
  const Vertex& start() const { return start_; }
  bool start_z() const { return z0_; }
  std::int64_t length() const { return length_; }
  const Vertex& end() const { return end_; }
  bool has_path() const { return record_path_; }
  const std::vector<std::int64_t>& ladder_times() const { return ladder_; }
  const std::vector<Checkpoint>& checkpoints() const { return checkpoints_; }
  std::size_t step_chunks() const { return codes_.size() - runs_.size(); }
  std::size_t run_chunks() const { return runs_.size(); }

  TrajectoryCursor cursor() const;
  TrajectoryCursor cursor_at(std::int64_t t) const;
  Vertex position_at(std::int64_t t) const { return cursor_at(t).position(); }
  bool z_at(std::int64_t t) const;  // Z_t, t >= 1
  double level_at(std::int64_t t) const { return geo_.level(position_at(t)); }

  MaterializedPath materialize(std::int64_t max_states = std::int64_t{1} << 26) const;

 private:
  friend class TrajectoryCursor;
  struct SeekPoint {
    std::size_t code;
    std::size_t run;
    std::int64_t time;
    Vertex pos;
  };
  static constexpr std::size_t kSeekStride = 4096;

  Geometry geo_;
  Vertex start_;
  bool z0_ = false;
  bool record_path_ = true;
  std::vector<std::uint8_t> codes_;  // bits 0-3 direction, bit 4 z, bit 5 run
  std::vector<RunRecord> runs_;
  std::vector<SeekPoint> seek_;
  std::int64_t length_ = 0;
  Vertex end_;
  std::vector<std::int64_t> ladder_;
  std::vector<Checkpoint> checkpoints_;
};

struct WalkOptions {
  // Excursions across edges with c_* at or above this are sampled in closed form; must exceed K.
  double compress_threshold = std::numeric_limits<double>::infinity();
  std::vector<std::int64_t> checkpoints;  // ascending times to record positions at
  bool record_path = true;
  bool start_z = false;
  // The walk ends at the first ordinary step reaching this level.
  double stop_level = std::numeric_limits<double>::infinity();
};

EnhancedTrajectory run_walk(const ConductanceField& field, const Vertex& start, std::int64_t steps,
                            WalkRng& rng, const WalkOptions& opts = {});

enum class DStatus { finite, certified_infinite, censored };
struct DResult {
  DStatus status = DStatus::censored;
  std::int64_t n = 0;   // D when finite; steps to certification otherwise
  double margin = 0.0;  // level margin used
};

// Level distance used for certification: margin_steps times the smallest positive e_j . dir.
double margin_level(const Geometry& geo, int margin_steps);
int default_margin_steps(const Geometry& geo);

DResult detect_D(const EnhancedTrajectory& traj, std::int64_t from, int margin_steps);

}  // namespace trapwalk
