#include "trapwalk/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "trapwalk/rng.hpp"

namespace trapwalk {

Vertex make_vertex(std::initializer_list<std::int32_t> coords) {
  if (coords.size() > static_cast<std::size_t>(kMaxDim))
    throw std::invalid_argument("vertex has too many coordinates");
  Vertex v;
  int i = 0;
  for (auto c : coords) v[i++] = c;
  return v;
}

std::string to_string(const Vertex& v, int dim) {
  std::ostringstream os;
  os << '(';
  for (int i = 0; i < dim; ++i) os << (i ? "," : "") << v[i];
  os << ')';
  return os.str();
}

Vertex unit(int j, int dim) { return neighbour(Vertex{}, j, dim); }

int direction_between(const Vertex& v, const Vertex& w, int dim) {
  int axis = -1;
  int sign = 0;
  for (int i = 0; i < kMaxDim; ++i) {
    int diff = w[i] - v[i];
    if (diff == 0) continue;
    if (axis >= 0 || (diff != 1 && diff != -1) || i >= dim) return -1;
    axis = i;
    sign = diff;
  }
  if (axis < 0) return -1;
  return sign > 0 ? axis : axis + dim;
}

std::size_t VertexHash::operator()(const Vertex& v) const noexcept {
  std::uint64_t h = 0x51ED270B27AB1E5DULL;
  for (int i = 0; i < kMaxDim; ++i)
    h = mix64(h ^ (static_cast<std::uint32_t>(v[i]) + (static_cast<std::uint64_t>(i) << 32)));
  return static_cast<std::size_t>(h);
}

LatticeEdge LatticeEdge::between(const Vertex& a, const Vertex& b) {
  int axis = -1;
  for (int i = 0; i < kMaxDim; ++i) {
    int diff = b[i] - a[i];
    if (diff == 0) continue;
    if (axis >= 0 || (diff != 1 && diff != -1))
      throw std::invalid_argument("endpoints are not nearest neighbours");
    axis = i;
  }
  if (axis < 0) throw std::invalid_argument("endpoints coincide");
  return a < b ? LatticeEdge(a, axis) : LatticeEdge(b, axis);
}

LatticeEdge LatticeEdge::from(const Vertex& v, int j, int dim) {
  if (j < dim) return LatticeEdge(v, j);
  Vertex lo = v;
  lo[j - dim] -= 1;
  return LatticeEdge(lo, j - dim);
}

std::size_t EdgeHash::operator()(const LatticeEdge& e) const noexcept {
  return VertexHash{}(e.first()) ^ static_cast<std::size_t>(mix64(static_cast<std::uint64_t>(e.axis()) + 7));
}

Geometry::Geometry(int dim, std::vector<double> direction, double lambda)
    : dim_(dim), lambda_(lambda), direction_(std::move(direction)) {
  if (dim < 1 || dim > kMaxDim) throw std::invalid_argument("dimension out of range");
  if (static_cast<int>(direction_.size()) != dim)
    throw std::invalid_argument("direction length differs from dimension");
  double norm = 0.0;
  for (double c : direction_) norm += c * c;
  norm = std::sqrt(norm);
  if (!(norm > 0.0)) throw std::invalid_argument("direction is zero");
  for (int i = 0; i < dim; ++i) {
    direction_[static_cast<std::size_t>(i)] /= norm;
    dir_[static_cast<std::size_t>(i)] = direction_[static_cast<std::size_t>(i)];
  }
  for (int j = 0; j < 2 * dim; ++j) {
    double s = j < dim ? dir_[static_cast<std::size_t>(j)] : -dir_[static_cast<std::size_t>(j - dim)];
    step_level_[static_cast<std::size_t>(j)] = s;
    tilt_[static_cast<std::size_t>(j)] = std::exp(lambda * s);
  }
  // Gram-Schmidt of e_1..e_d against dir, keeping d-1 vectors.
  std::vector<std::vector<double>> q{direction_};
  for (int i = 0; i < dim && static_cast<int>(q.size()) < dim; ++i) {
    std::vector<double> v(static_cast<std::size_t>(dim), 0.0);
    v[static_cast<std::size_t>(i)] = 1.0;
    for (const auto& b : q) {
      double p = 0.0;
      for (int k = 0; k < dim; ++k) p += v[static_cast<std::size_t>(k)] * b[static_cast<std::size_t>(k)];
      for (int k = 0; k < dim; ++k) v[static_cast<std::size_t>(k)] -= p * b[static_cast<std::size_t>(k)];
    }
    double n2 = 0.0;
    for (double c : v) n2 += c * c;
    if (n2 < 1e-12) continue;
    for (double& c : v) c /= std::sqrt(n2);
    q.push_back(std::move(v));
  }
  basis_.assign(q.begin() + 1, q.end());
}

double Geometry::transverse_extent(const Vertex& v) const {
  double m = 0.0;
  for (const auto& f : basis_) {
    double p = 0.0;
    for (int k = 0; k < dim_; ++k) p += v[k] * f[static_cast<std::size_t>(k)];
    m = std::max(m, std::abs(p));
  }
  return m;
}

double Geometry::min_positive_step() const {
  double m = std::numeric_limits<double>::infinity();
  for (int i = 0; i < dim_; ++i)
    if (dir_[static_cast<std::size_t>(i)] > 1e-12) m = std::min(m, dir_[static_cast<std::size_t>(i)]);
  return m;
}

bool Geometry::in_box(const Vertex& v, double L, double Lt) const {
  return std::abs(level(v)) <= L + kLevelEps && transverse_extent(v) <= Lt + kLevelEps;
}

int width(const std::vector<Vertex>& members, int dim) {
  if (members.empty()) return 0;
  int w = 0;
  for (int i = 0; i < dim; ++i) {
    auto [mn, mx] = std::minmax_element(members.begin(), members.end(),
                                        [i](const Vertex& a, const Vertex& b) { return a[i] < b[i]; });
    w = std::max(w, (*mx)[i] - (*mn)[i]);
  }
  return w;
}

}  // namespace trapwalk
