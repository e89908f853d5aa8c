#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "helpers.hpp"
#include "trapwalk/netsolve.hpp"
#include "trapwalk/stats.hpp"
#include "trapwalk/trapmodel.hpp"

using namespace trapwalk;
using namespace twtest;

namespace {
const std::vector<double> kOnes(3, 1.0);
}

TEST(ExitLaw, StarExample) {
  auto p = exact_exit_distribution(10.0, kOnes, kOnes, EdgeSide::plus);
  ASSERT_EQ(p.size(), 6u);
  for (int i = 0; i < 3; ++i) EXPECT_NEAR(p[i], 13.0 / 69.0, 1e-14);
  for (int i = 3; i < 6; ++i) EXPECT_NEAR(p[i], 10.0 / 69.0, 1e-14);
  EXPECT_NEAR(std::accumulate(p.begin(), p.end(), 0.0), 1.0, 1e-12);
  auto m = exact_exit_distribution(10.0, kOnes, kOnes, EdgeSide::minus);
  EXPECT_NEAR(m[0], 10.0 / 69.0, 1e-14);
  EXPECT_NEAR(m[5], 13.0 / 69.0, 1e-14);
}

TEST(ExitLaw, MatchesNetworkSolve) {
  // Vertices: 0 = e+, 1 = e-, 2..4 plus-side exits, 5..7 minus-side exits.
  WalkRng rng(77);
  for (int inst = 0; inst < 50; ++inst) {
    const double ce = std::exp(rng.uniform() * 8.0 - 2.0);
    std::vector<double> ap(3), am(3);
    for (auto& w : ap) w = std::exp(rng.uniform() * 4.0 - 2.0);
    for (auto& w : am) w = std::exp(rng.uniform() * 4.0 - 2.0);
    std::vector<NetEdge> edges{{0, 1, ce}};
    for (int i = 0; i < 3; ++i) edges.push_back({0, 2 + i, ap[i]});
    for (int i = 0; i < 3; ++i) edges.push_back({1, 5 + i, am[i]});
    FiniteNetwork net(8, edges);
    auto ref = exit_distribution(net, 0, {2, 3, 4, 5, 6, 7});
    auto p = exact_exit_distribution(ce, ap, am, EdgeSide::plus);
    for (std::size_t i = 0; i < 6; ++i) EXPECT_NEAR(p[i], ref[i], 1e-10);
  }
}

TEST(ExitLaw, VanishingEdgeConcentratesOnStartSide) {
  std::vector<double> ap{1.0, 2.0, 5.0};
  auto p = exact_exit_distribution(1e-12, ap, kOnes, EdgeSide::plus);
  EXPECT_NEAR(p[0], 0.125, 1e-10);
  EXPECT_NEAR(p[1], 0.25, 1e-10);
  EXPECT_NEAR(p[2], 0.625, 1e-10);
  for (int i = 3; i < 6; ++i) EXPECT_LT(p[i], 1e-11);
}

TEST(ExitLaw, RejectsDegenerateInput) {
  EXPECT_THROW(exact_exit_distribution(1.0, {1.0, 0.0, 1.0}, kOnes, EdgeSide::plus), std::invalid_argument);
  EXPECT_THROW(exact_exit_distribution(0.0, kOnes, kOnes, EdgeSide::plus), std::invalid_argument);
  EXPECT_THROW(exact_exit_distribution(1.0, {1.0, 1.0}, kOnes, EdgeSide::plus), std::invalid_argument);
}

TEST(ExitLaw, SandwichAroundCollapsedReference) {
  const int d = 2;
  WalkRng rng(5);
  for (double n : {1e2, 1e4, 1e6}) {
    const double delta = 0.25, small = std::pow(n, delta);
    double worst = 0.0;
    for (int inst = 0; inst < 200; ++inst) {
      std::vector<double> ap(3), am(3);
      for (auto& w : ap) w = 0.05 + rng.uniform() * (small - 0.05);
      for (auto& w : am) w = 0.05 + rng.uniform() * (small - 0.05);
      const double ce = n * (1.0 + 10.0 * rng.uniform());
      const double pi = std::accumulate(ap.begin(), ap.end(), 0.0) + std::accumulate(am.begin(), am.end(), 0.0);
      for (EdgeSide s : {EdgeSide::plus, EdgeSide::minus}) {
        auto p = exact_exit_distribution(ce, ap, am, s);
        for (std::size_t i = 0; i < 6; ++i) {
          const double ref = (i < 3 ? ap[i] : am[i - 3]) / pi;
          worst = std::max(worst, std::abs(p[i] / ref - 1.0) / std::pow(n, delta - 1.0));
        }
      }
    }
    EXPECT_LE(worst, 4.0 * d) << "n=" << n;
  }
}

TEST(Collapse, LambdaZeroToy) {
  const LatticeEdge e = LatticeEdge::from(Vertex{}, 0, 2);
  ConductanceField f(constant_field(1.0, 20.0, 0.0), {{e, 10.0}});
  CollapsedPatch p = collapse(f, e);
  ASSERT_EQ(p.exits.size(), 6u);
  EXPECT_NEAR(p.pi_xe, 6.0, 1e-12);
  for (double q : p.collapsed_law()) EXPECT_NEAR(q, 1.0 / 6.0, 1e-12);
  auto exact = p.exact_law(EdgeSide::plus);
  double lo = 1.0, hi = 0.0;
  for (double q : exact) lo = std::min(lo, q), hi = std::max(hi, q);
  EXPECT_LT(lo, 1.0 / 6.0);
  EXPECT_GT(hi, 1.0 / 6.0);
}

TEST(Collapse, OtherEdgesUnchanged) {
  const LatticeEdge e = LatticeEdge::from(Vertex{}, 0, 2);
  ConductanceField f(pareto_field(0.5, 20.0, 1.0, 4), {{e, 1e4}});
  CollapsedPatch p = collapse(f, e);
  for (const auto& x : p.exits) {
    const Vertex end = x.side == EdgeSide::plus ? e.second() : e.first();
    EXPECT_DOUBLE_EQ(x.cstar, f.conductance_of(LatticeEdge::between(end, x.y)));
  }
}

TEST(HalfExcursion, GeometricParameter) {
  EXPECT_NEAR(half_excursion_geometric_param(10.0, 13.0, 13.0), 69.0 / 169.0, 1e-15);
  EXPECT_NEAR(half_excursion_geometric_param(1e-9, 13.0, 13.0), 1.0, 1e-15);
  EXPECT_THROW(half_excursion_geometric_param(13.0, 13.0, 20.0), std::invalid_argument);
}

TEST(HalfExcursion, MeanAndIndependenceOfExitSide) {
  WalkRng rng(2024);
  const int N = 100000;
  std::vector<int> half(N), side(N);
  double sum = 0.0;
  for (int i = 0; i < N; ++i) {
    auto ex = simulate_excursion(10.0, kOnes, kOnes, EdgeSide::plus, rng);
    EXPECT_EQ(ex.crossings, ex.steps_inside - 1);
    EXPECT_EQ(ex.half_crossings, ex.crossings / 2);
    half[i] = static_cast<int>(std::min<std::int64_t>(ex.half_crossings, 12));
    side[i] = ex.exit_side == EdgeSide::plus ? 0 : 1;
    sum += static_cast<double>(ex.half_crossings);
  }
  const double q = 69.0 / 169.0;
  const double sd = std::sqrt((1.0 - q) / (q * q) / N);
  EXPECT_NEAR(sum / N, 100.0 / 69.0, 3.0 * sd);
  auto pt = mi_permutation_test(half, side, 200, 0.99, 31);
  EXPECT_LT(pt.observed, pt.null_quantile);
}

TEST(Coupling, WalksCoincideBeforeHit) {
  const LatticeEdge e = LatticeEdge::from(make_vertex({3, 0}), 0, 2);
  ConductanceField f(pareto_field(0.5, 20.0, 1.0, 9), {{e, 1e3}});
  WalkRng rng(12);
  int hits = 0;
  for (int r = 0; r < 300; ++r) {
    CoupledRun run = run_coupled(f, e, Vertex{}, 2000, rng);
    const std::int64_t agree_until =
        run.decoupling_time ? *run.decoupling_time - 1 : std::min(run.x_trace.length(), run.y_walk.length());
    if (run.hit_time) {
      ++hits;
      if (run.decoupling_time) EXPECT_GT(*run.decoupling_time, *run.hit_time);
    } else {
      EXPECT_FALSE(run.decoupling_time.has_value());
    }
    for (std::int64_t t = 0; t <= agree_until; ++t)
      ASSERT_EQ(run.x_trace.positions[static_cast<std::size_t>(t)], run.y_walk.positions[static_cast<std::size_t>(t)]);
  }
  EXPECT_GT(hits, 100);
}

TEST(Coupling, WindowStopsAfterHit) {
  const LatticeEdge e = LatticeEdge::from(make_vertex({1, 0}), 0, 2);
  ConductanceField f(constant_field(1.0, 20.0, 1.0), {{e, 100.0}});
  WalkRng rng(3);
  for (int r = 0; r < 50; ++r) {
    CoupledRun run = run_coupled(f, e, Vertex{}, 100000, rng, 7);
    if (run.hit_time) EXPECT_LE(run.x_trace.length(), *run.hit_time + 7);
  }
  EXPECT_THROW(run_coupled(f, e, make_vertex({1, 0}), 10, rng), std::invalid_argument);
  EXPECT_THROW(run_coupled(f, e, Vertex{}, 0, rng), std::invalid_argument);
}

TEST(TrapObservables, RejectsBlockWithoutTrap) {
  ConductanceField f(constant_field(1.0, 2.0));
  auto t = straight_path(f.geometry(), 10);
  RegenBlock b;
  b.end_time = 10;
  b.duration = 10;
  WalkRng rng(1);
  EXPECT_THROW(collect_trap_observables(t, f, b, rng), std::invalid_argument);
}

TEST(TrapObservables, SinglePassThroughTrap) {
  // Straight path crossing a heavy edge once: V_n = 1, one step on it.
  const LatticeEdge e = LatticeEdge::from(make_vertex({5, 0}), 0, 2);
  ConductanceField f(constant_field(1.0, 2.0), {{e, 1e4}});
  auto t = straight_path(f.geometry(), 60);
  RegenConfig c;
  c.n_threshold = 1e3;
  RegenBlock b = annotate_block(t, f, 0, 60, c.resolved(f.geometry()), 0);
  ASSERT_TRUE(b.flags.LT);
  ASSERT_EQ(b.trap_edge, e);
  WalkRng rng(4);
  TrapObservables o = collect_trap_observables(t, f, b, rng);
  EXPECT_EQ(o.V_n, 1);
  EXPECT_EQ(o.T_on_edge, 1);
  EXPECT_DOUBLE_EQ(o.W_n, 1e-4);
  EXPECT_GT(o.W_infty_sample, 0.0);
  EXPECT_GT(o.pi_bar, 0.0);
}
