#pragma once

#include <array>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace trapwalk {

inline constexpr int kMaxDim = 6;

struct Vertex {
  std::array<std::int32_t, kMaxDim> x{};

  std::int32_t& operator[](int i) { return x[static_cast<std::size_t>(i)]; }
  std::int32_t operator[](int i) const { return x[static_cast<std::size_t>(i)]; }

  friend bool operator==(const Vertex&, const Vertex&) = default;
  friend auto operator<=>(const Vertex&, const Vertex&) = default;

  Vertex& operator+=(const Vertex& o) {
    for (int i = 0; i < kMaxDim; ++i) x[i] += o.x[i];
    return *this;
  }
  Vertex& operator-=(const Vertex& o) {
    for (int i = 0; i < kMaxDim; ++i) x[i] -= o.x[i];
    return *this;
  }
  friend Vertex operator+(Vertex a, const Vertex& b) { return a += b; }
  friend Vertex operator-(Vertex a, const Vertex& b) { return a -= b; }
};

Vertex make_vertex(std::initializer_list<std::int32_t> coords);
std::string to_string(const Vertex& v, int dim);

// Direction j in [0, 2d): j < d is +e_{j}, j >= d is -e_{j-d}.
inline int opposite(int j, int dim) { return j < dim ? j + dim : j - dim; }
inline int axis_of(int j, int dim) { return j < dim ? j : j - dim; }
Vertex unit(int j, int dim);
inline Vertex neighbour(Vertex v, int j, int dim) {
  v[axis_of(j, dim)] += j < dim ? 1 : -1;
  return v;
}
// Direction index with v + e_j == w, or -1 if not nearest neighbours.
int direction_between(const Vertex& v, const Vertex& w, int dim);

struct VertexHash {
  std::size_t operator()(const Vertex& v) const noexcept;
};

// Canonical undirected nearest-neighbour edge: lo < hi lexicographically.
class LatticeEdge {
 public:
  LatticeEdge() = default;
  static LatticeEdge between(const Vertex& a, const Vertex& b);
  static LatticeEdge from(const Vertex& v, int j, int dim);

  const Vertex& first() const { return lo_; }
  Vertex second() const {
    Vertex h = lo_;
    h[axis_] += 1;
    return h;
  }
  int axis() const { return axis_; }
  bool contains(const Vertex& v) const { return v == lo_ || v == second(); }
  Vertex other(const Vertex& v) const { return v == lo_ ? second() : lo_; }

  friend bool operator==(const LatticeEdge&, const LatticeEdge&) = default;
  friend bool operator<(const LatticeEdge& a, const LatticeEdge& b) {
    if (a.lo_ != b.lo_) return a.lo_ < b.lo_;
    return a.second() < b.second();
  }

 private:
  LatticeEdge(const Vertex& lo, int axis) : lo_(lo), axis_(axis) {}
  Vertex lo_{};
  int axis_ = 0;
};

struct EdgeHash {
  std::size_t operator()(const LatticeEdge& e) const noexcept;
};

// Bias geometry: unit direction, strength, levels, tilted boxes.
class Geometry {
 public:
  Geometry() = default;
  Geometry(int dim, std::vector<double> direction, double lambda);

  int dim() const { return dim_; }
  double lambda() const { return lambda_; }
  double dir(int i) const { return dir_[static_cast<std::size_t>(i)]; }
  const std::vector<double>& direction() const { return direction_; }
  // exp(e_j . l) with l = lambda * dir.
  double tilt(int j) const { return tilt_[static_cast<std::size_t>(j)]; }
  double step_level(int j) const { return step_level_[static_cast<std::size_t>(j)]; }

  double level(const Vertex& v) const {
    double s = 0.0;
    for (int i = 0; i < dim_; ++i) s += v[i] * dir_[static_cast<std::size_t>(i)];
    return s;
  }
  // |(v) . f_i| maximized over the transverse basis f_2..f_d.
  double transverse_extent(const Vertex& v) const;
  const std::vector<std::vector<double>>& transverse_basis() const { return basis_; }
  // Smallest positive e_j . dir.
  double min_positive_step() const;
  // Membership in B(L, L') centred at the origin.
  bool in_box(const Vertex& v, double L, double Lt) const;

 private:
  int dim_ = 0;
  double lambda_ = 0.0;
  std::vector<double> direction_;
  std::array<double, kMaxDim> dir_{};
  std::array<double, 2 * kMaxDim> tilt_{};
  std::array<double, 2 * kMaxDim> step_level_{};
  std::vector<std::vector<double>> basis_;
};

// Level comparisons tolerate rounding between lattice points of equal level.
inline constexpr double kLevelEps = 1e-9;

// Max over axes of coordinate spread.
int width(const std::vector<Vertex>& members, int dim);

}  // namespace trapwalk
