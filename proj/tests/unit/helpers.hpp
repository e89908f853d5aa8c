#pragma once

#include <vector>

#include "trapwalk/env.hpp"
#include "trapwalk/walk.hpp"

namespace twtest {

using namespace trapwalk;

inline FieldConfig constant_field(double c = 1.0, double K = 2.0, double lambda = 1.0, int d = 2) {
  FieldConfig f;
  f.dimension = d;
  f.law = ConductanceLaw::constant(c);
  f.K = K;
  f.lambda = lambda;
  f.direction.assign(static_cast<std::size_t>(d), 0.0);
  f.direction[0] = 1.0;
  return f;
}

inline FieldConfig pareto_field(double gamma = 0.5, double K = 20.0, double lambda = 1.0, std::uint64_t seed = 1,
                                double x_min = 1.0) {
  FieldConfig f;
  f.law = ConductanceLaw::pareto(gamma, x_min);
  f.K = K;
  f.lambda = lambda;
  f.seed = seed;
  return f;
}

// Straight e_1 path of n steps from the origin, every Z = 1.
inline EnhancedTrajectory straight_path(const Geometry& geo, int n) {
  std::vector<Vertex> pos;
  std::vector<std::uint8_t> z;
  for (int i = 0; i <= n; ++i) {
    pos.push_back(make_vertex({i, 0}));
    z.push_back(1);
  }
  return EnhancedTrajectory::from_path(geo, pos, z);
}

}  // namespace twtest
