#include "trapwalk/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "trapwalk/env.hpp"
#include "trapwalk/netsolve.hpp"
#include "trapwalk/regen.hpp"
#include "trapwalk/rng.hpp"
#include "trapwalk/stats.hpp"
#include "trapwalk/trapmodel.hpp"
#include "trapwalk/walk.hpp"

namespace trapwalk {

namespace {

double log_uniform(WalkRng& rng, double lo, double hi) {
  return std::exp(std::log(lo) + (std::log(hi) - std::log(lo)) * rng.uniform());
}

// Edge 0-1 with the plus side at 0; plus exits 2.., minus exits after them.
FiniteNetwork edge_star(double c_e, const std::vector<double>& ap, const std::vector<double>& am,
                        std::vector<int>& exits) {
  std::vector<NetEdge> edges{{0, 1, c_e}};
  int next = 2;
  exits.clear();
  for (double w : ap) {
    edges.push_back({0, next, w});
    exits.push_back(next++);
  }
  for (double w : am) {
    edges.push_back({1, next, w});
    exits.push_back(next++);
  }
  return FiniteNetwork(next, edges);
}

std::string str(double v) {
  std::ostringstream o;
  o.precision(10);
  o << v;
  return o.str();
}

}  // namespace

OracleCheck oracle_star_exit_law() {
  OracleCheck r;
  r.name = "star_exit_law";
  std::vector<double> ones(3, 1.0);
  auto law = exact_exit_distribution(10.0, ones, ones, EdgeSide::plus);
  std::vector<int> exits;
  auto net = edge_star(10.0, ones, ones, exits);
  auto ref = exit_distribution(net, 0, exits);
  double err = 0.0, sum = 0.0;
  for (std::size_t i = 0; i < law.size(); ++i) {
    double target = i < 3 ? 13.0 / 69.0 : 10.0 / 69.0;
    err = std::max({err, std::abs(law[i] - target), std::abs(ref[i] - target)});
    sum += law[i];
  }
  r.value = err;
  r.passed = err < 1e-12 && std::abs(sum - 1.0) < 1e-12;
  r.detail = "max deviation from 13/69, 10/69: " + str(err) + "; sum " + str(sum);
  return r;
}

OracleCheck oracle_exit_law_vs_network(int instances, std::uint64_t seed) {
  OracleCheck r;
  r.name = "exit_law_vs_network";
  WalkRng rng(seed);
  double worst = 0.0;
  for (int k = 0; k < instances; ++k) {
    const int d = 2 + static_cast<int>(rng.next() % 3);
    const double c_e = log_uniform(rng, 1e-2, 1e4);
    std::vector<double> ap, am;
    for (int j = 0; j < 2 * d - 1; ++j) ap.push_back(log_uniform(rng, 1e-2, 1e2));
    for (int j = 0; j < 2 * d - 1; ++j) am.push_back(log_uniform(rng, 1e-2, 1e2));
    const EdgeSide side = (rng.next() & 1) ? EdgeSide::plus : EdgeSide::minus;
    auto law = exact_exit_distribution(c_e, ap, am, side);
    std::vector<int> exits;
    auto net = edge_star(c_e, ap, am, exits);
    auto ref = exit_distribution(net, side == EdgeSide::plus ? 0 : 1, exits);
    for (std::size_t i = 0; i < law.size(); ++i) worst = std::max(worst, std::abs(law[i] - ref[i]));
  }
  r.value = worst;
  r.passed = worst <= 1e-10;
  r.detail = std::to_string(instances) + " instances, max componentwise gap " + str(worst);
  return r;
}

OracleCheck oracle_half_excursions(std::int64_t samples, std::uint64_t seed) {
  OracleCheck r;
  r.name = "half_excursions";
  const double c_e = 10.0;
  std::vector<double> ones(3, 1.0);
  const double q = half_excursion_geometric_param(c_e, 13.0, 13.0);
  WalkRng rng(seed);
  const int cells = 40;
  std::vector<std::int64_t> counts(cells, 0);
  double sum = 0.0;
  for (std::int64_t i = 0; i < samples; ++i) {
    auto ex = simulate_excursion(c_e, ones, ones, EdgeSide::plus, rng);
    sum += static_cast<double>(ex.half_crossings);
    counts[static_cast<std::size_t>(std::min<std::int64_t>(ex.half_crossings, cells - 1))]++;
  }
  std::vector<double> probs(cells);
  for (int k = 0; k < cells - 1; ++k) probs[static_cast<std::size_t>(k)] = q * std::pow(1.0 - q, k);
  probs[cells - 1] = std::pow(1.0 - q, cells - 1);
  auto chi = chi_square_gof(counts, probs);
  const double m = sum / static_cast<double>(samples);
  const double mu = (1.0 - q) / q;
  const double se = std::sqrt((1.0 - q) / (q * q) / static_cast<double>(samples));
  const double z = (m - mu) / se;
  r.value = chi.p_value;
  r.passed = chi.p_value > 0.01 && std::abs(z) <= 3.0;
  r.detail = "chi-square p " + str(chi.p_value) + " (dof " + std::to_string(chi.dof) + "), mean " + str(m) +
             " vs " + str(mu) + " (z " + str(z) + ")";
  return r;
}

OracleCheck oracle_crossing_bound(int networks, std::uint64_t seed) {
  OracleCheck r;
  r.name = "crossing_bound";
  // Triangle fixture: y=0, z=1, delta=2.
  FiniteNetwork tri(3, {{0, 1, 1.0}, {1, 2, 1.0}, {0, 2, 1.0}}, 2);
  const double tri_val = expected_crossings(tri, 0, {0, 1, 2});
  const bool tri_ok = std::abs(tri_val - 2.0) < 1e-12;

  WalkRng rng(seed);
  int violations = 0;
  double worst_ratio = 0.0;
  for (int k = 0; k < networks; ++k) {
    const int n = 3 + static_cast<int>(rng.next() % 28);
    std::vector<NetEdge> edges;
    for (int v = 1; v < n; ++v)
      edges.push_back({static_cast<int>(rng.next() % static_cast<std::uint64_t>(v)), v, log_uniform(rng, 1e-3, 1e3)});
    const int extra = static_cast<int>(rng.next() % static_cast<std::uint64_t>(2 * n));
    for (int i = 0; i < extra; ++i) {
      int a = static_cast<int>(rng.next() % static_cast<std::uint64_t>(n));
      int b = static_cast<int>(rng.next() % static_cast<std::uint64_t>(n));
      if (a != b) edges.push_back({a, b, log_uniform(rng, 1e-3, 1e3)});
    }
    // delta is an endpoint of edge 0, y the other.
    const int delta = edges[0].u, y = edges[0].v;
    FiniteNetwork net(n, edges, delta);
    std::vector<int> counted;
    double csum = 0.0;
    for (std::size_t i = 0; i < edges.size(); ++i)
      if (rng.uniform() < 0.5) {
        counted.push_back(static_cast<int>(i));
        csum += edges[i].c;
      }
    if (counted.empty()) {
      counted.push_back(0);
      csum = edges[0].c;
    }
    const double lhs = expected_crossings(net, y, counted);
    const double rhs = 2.0 / edges[0].c * csum;
    worst_ratio = std::max(worst_ratio, lhs / rhs);
    if (lhs > rhs * (1.0 + 1e-9)) ++violations;
  }
  r.value = violations;
  r.passed = tri_ok && violations == 0;
  r.detail = "triangle " + str(tri_val) + " <= 6; " + std::to_string(networks) + " networks, " +
             std::to_string(violations) + " violations, max lhs/rhs " + str(worst_ratio);
  return r;
}

OracleCheck oracle_regen_hand_trace() {
  OracleCheck r;
  r.name = "regen_hand_trace";
  FieldConfig fc;
  fc.law = ConductanceLaw::constant(1.0);
  fc.K = 2.0;
  ConductanceField field(fc);
  std::vector<Vertex> pos;
  for (int i = 0; i <= 80; ++i) pos.push_back(make_vertex({i, 0}));
  std::vector<std::uint8_t> z(pos.size(), 1);
  auto traj = EnhancedTrajectory::from_path(field.geometry(), pos, z);
  RegenConfig rc;
  rc.annotate = false;
  auto seq = detect_regenerations(traj, field, rc);
  if (seq.taus.empty()) {
    r.detail = "no regeneration found";
    return r;
  }
  const Vertex x = traj.position_at(seq.taus[0]);
  r.value = static_cast<double>(seq.taus[0]);
  r.passed = seq.taus[0] == 3 && x == make_vertex({3, 0});
  r.detail = "tau_1 = " + std::to_string(seq.taus[0]) + ", X = " + to_string(x, 2);
  return r;
}

OracleCheck oracle_kernel_contracts(std::int64_t vertices, std::uint64_t seed) {
  OracleCheck r;
  r.name = "kernel_contracts";
  FieldConfig fc;
  fc.law = ConductanceLaw::pareto(0.5, 1.0);
  fc.seed = seed;
  fc.K = 20.0;
  fc.lambda = 1.0;
  ConductanceField field(fc);
  WalkRng rng(derive_seed(seed, 0, 1));
  double worst_rev = 0.0;
  std::int64_t dominance_fail = 0;
  for (std::int64_t i = 0; i < vertices; ++i) {
    Vertex x = make_vertex({static_cast<int>(rng.next() % 2001) - 1000, static_cast<int>(rng.next() % 2001) - 1000});
    auto k = kernel_at(field, x);
    for (int j = 0; j < 4; ++j)
      if (k.pk[static_cast<std::size_t>(j)] > k.p[static_cast<std::size_t>(j)]) ++dominance_fail;
    const int j = static_cast<int>(rng.next() % 4);
    Vertex y = neighbour(x, j, 2);
    auto ky = kernel_at(field, y);
    // log(pi(x) p(x,y)) - log(pi(y) p(y,x)).
    double a = log_pi(field, x) + std::log(k.p[static_cast<std::size_t>(j)]);
    double b = log_pi(field, y) + std::log(ky.p[static_cast<std::size_t>(opposite(j, 2))]);
    worst_rev = std::max(worst_rev, std::abs(std::expm1(a - b)));
  }
  FieldConfig unit;
  unit.law = ConductanceLaw::constant(1.0);
  unit.K = 2.0;
  unit.lambda = 1.0;
  auto ku = kernel_at(ConductanceField(unit), Vertex{});
  double spk = 0.0;
  for (int j = 0; j < 4; ++j) spk += ku.pk[static_cast<std::size_t>(j)];
  r.value = worst_rev;
  r.passed = worst_rev < 1e-10 && dominance_fail == 0 && std::abs(spk - 0.25) < 1e-14;
  r.detail = "max reversibility gap " + str(worst_rev) + ", p_K > p at " + std::to_string(dominance_fail) +
             " entries, sum p_K = " + str(spk);
  return r;
}

std::vector<OracleCheck> run_oracle_suite(std::uint64_t seed) {
  return {oracle_star_exit_law(),
          oracle_exit_law_vs_network(100, derive_seed(seed, 1)),
          oracle_half_excursions(100000, derive_seed(seed, 2)),
          oracle_crossing_bound(200, derive_seed(seed, 3)),
          oracle_regen_hand_trace(),
          oracle_kernel_contracts(100000, derive_seed(seed, 4))};
}

}  // namespace trapwalk
