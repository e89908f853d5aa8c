#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "trapwalk/lattice.hpp"

namespace trapwalk {

enum class LawFamily { pareto, uniform, constant };
enum class SlowlyVarying { constant, log_power };

// Law of c_*. Pareto family: P[c >= t] = L(t) t^-gamma normalized to 1 at x_min,
// with L == 1 or L(t) = log(e + t)^beta.
struct ConductanceLaw {
  LawFamily family = LawFamily::pareto;
  double gamma = 0.5;
  SlowlyVarying slowly_varying = SlowlyVarying::constant;
  double beta = 0.0;
  double x_min = 1.0;
  double lo = 1.0;     // uniform support
  double hi = 2.0;
  double value = 1.0;  // constant law

  static ConductanceLaw pareto(double gamma, double x_min = 1.0);
  static ConductanceLaw log_pareto(double gamma, double beta, double x_min = 1.0);
  static ConductanceLaw uniform(double lo, double hi);
  static ConductanceLaw constant(double value);

  // Empty when valid; otherwise one message per violated constraint.
  std::vector<std::string> problems() const;
  void validate() const;

  double tail(double t) const;        // P[c >= t]
  double cdf(double t) const;         // P[c <= t]
  double quantile(double u) const;    // tail(quantile(u)) == u, u in (0, 1]
  double lower_bound() const;
};

struct FieldConfig {
  int dimension = 2;
  ConductanceLaw law;
  std::uint64_t seed = 1;
  double K = 20.0;
  double lambda = 1.0;
  std::vector<double> direction{1.0, 0.0};
};

// Lazily evaluated i.i.d. conductances: c_*(e) is a keyed function of (seed, e).
// Pinned edges override the law; used for fixtures.
class ConductanceField {
 public:
  explicit ConductanceField(FieldConfig cfg,
                            std::vector<std::pair<LatticeEdge, double>> pinned = {});

  double conductance_of(const LatticeEdge& e) const;
  double conductance(const Vertex& x, int j) const {
    return conductance_of(LatticeEdge::from(x, j, dim_));
  }
  // The value the law assigns, ignoring pins.
  double sampled_conductance(const LatticeEdge& e) const;

  const FieldConfig& config() const { return cfg_; }
  const ConductanceLaw& law() const { return cfg_.law; }
  const Geometry& geometry() const { return geo_; }
  int dim() const { return dim_; }
  double K() const { return cfg_.K; }
  std::uint64_t seed() const { return cfg_.seed; }
  bool is_normal(double c) const { return c >= 1.0 / cfg_.K && c <= cfg_.K; }
  const std::vector<std::pair<LatticeEdge, double>>& pinned() const { return pinned_; }

  // Same environment, different normality threshold.
  ConductanceField with_K(double K) const;

 private:
  FieldConfig cfg_;
  Geometry geo_;
  int dim_;
  double inv_gamma_ = 2.0;
  bool fast_pareto_ = false;
  std::vector<std::pair<LatticeEdge, double>> pinned_;
};

enum class VertexClass { open, closed };
VertexClass classify_vertex(const ConductanceField& field, const Vertex& x);
inline bool is_open(const ConductanceField& field, const Vertex& x) {
  return classify_vertex(field, x) == VertexClass::open;
}

enum class GoodStatus { good_certified, bad_certified, unknown };
struct GoodCertificate {
  GoodStatus status = GoodStatus::unknown;
  int depth = 0;               // certified depth, or depth reached before blocking/cap
  std::vector<Vertex> witness;  // x_0..x_depth when good_certified
};
// Directed K-open paths with x_{2i+1} - x_{2i} = e_1 and x_{2i+2} - x_{2i+1} in {e_1..e_d}.
GoodCertificate certify_good(const ConductanceField& field, const Vertex& x, int depth,
                             std::size_t layer_cap = 1u << 16);

struct BadCluster {
  Vertex anchor;
  std::vector<Vertex> members;
  int width = 0;
  bool truncated = false;
};
inline constexpr int kDefaultGoodDepth = 32;
BadCluster explore_bad_cluster(const ConductanceField& field, const Vertex& x, std::size_t cap,
                               int depth = kDefaultGoodDepth);

}  // namespace trapwalk
