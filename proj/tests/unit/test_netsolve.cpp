#include <gtest/gtest.h>

#include <fstream>

#include "trapwalk/netsolve.hpp"
#include "trapwalk/rng.hpp"

using namespace trapwalk;

TEST(Network, ParsesTriangleFixture) {
  std::ifstream in(std::string(TRAPWALK_FIXTURES) + "/triangle.net");
  ASSERT_TRUE(in.good());
  FiniteNetwork net = FiniteNetwork::parse(in);
  EXPECT_EQ(net.size(), 3);
  EXPECT_EQ(net.edges().size(), 3u);
  ASSERT_TRUE(net.absorbing().has_value());
  EXPECT_EQ(*net.absorbing(), 2);
  EXPECT_NEAR(expected_crossings(net, 0, {0, 1, 2}), 2.0, 1e-12);
}

TEST(Network, ParseErrors) {
  EXPECT_THROW(FiniteNetwork::parse_string("edge 0 1 1\n"), std::invalid_argument);
  EXPECT_THROW(FiniteNetwork::parse_string("vertices 2\nedge 0 1\n"), std::invalid_argument);
  EXPECT_THROW(FiniteNetwork::parse_string("vertices 2\nedge 0 1 1 9\n"), std::invalid_argument);
  EXPECT_THROW(FiniteNetwork::parse_string("vertices 2\nbogus 1\n"), std::invalid_argument);
  EXPECT_THROW(FiniteNetwork::parse_string("vertices 3\nedge 0 1 1\n"), std::invalid_argument);  // disconnected
  EXPECT_THROW(FiniteNetwork::parse_string("vertices 2\nedge 0 0 1\n"), std::invalid_argument);
  EXPECT_THROW(FiniteNetwork::parse_string("vertices 2\nedge 0 1 -1\n"), std::invalid_argument);
}

TEST(Network, StationaryMeasure) {
  EXPECT_EQ(stationary_measure(FiniteNetwork(2, {{0, 1, 3.0}})), (std::vector<double>{3, 3}));
  FiniteNetwork star(4, {{0, 1, 1.0}, {0, 2, 2.0}, {0, 3, 3.0}});
  EXPECT_DOUBLE_EQ(stationary_measure(star)[0], 6.0);
  EXPECT_THROW(stationary_measure(FiniteNetwork(2, {{0, 1, 1.0}}, 1)), std::invalid_argument);
}

TEST(Network, ExitDistributionExamples) {
  FiniteNetwork two(3, {{0, 1, 1.0}, {0, 2, 3.0}});
  auto p = exit_distribution(two, 0, {1, 2});
  EXPECT_NEAR(p[0], 0.25, 1e-12);
  EXPECT_NEAR(p[1], 0.75, 1e-12);
  FiniteNetwork sym(5, {{0, 1, 2.0}, {0, 2, 2.0}, {0, 3, 2.0}, {0, 4, 2.0}});
  for (double q : exit_distribution(sym, 0, {1, 2, 3, 4})) EXPECT_NEAR(q, 0.25, 1e-12);
}

TEST(Network, SingleEdgeCrossing) {
  FiniteNetwork net(2, {{0, 1, 4.0}}, 1);
  EXPECT_NEAR(expected_crossings(net, 0, {0}), 1.0, 1e-12);
}

TEST(Network, EffectiveResistance) {
  EXPECT_NEAR(effective_resistance(FiniteNetwork(2, {{0, 1, 4.0}}), 0, 1), 0.25, 1e-12);
  FiniteNetwork series(3, {{0, 1, 1.0}, {1, 2, 1.0}});
  EXPECT_NEAR(effective_resistance(series, 0, 2), 2.0, 1e-12);
  FiniteNetwork parallel(2, {{0, 1, 1.0}, {0, 1, 3.0}});
  EXPECT_NEAR(effective_resistance(parallel, 0, 1), 0.25, 1e-12);
  EXPECT_NEAR(effective_resistance(FiniteNetwork(3, {{0, 1, 1.0}, {1, 2, 1.0}, {0, 2, 1.0}}), 0, 1), 2.0 / 3.0,
              1e-12);
  EXPECT_THROW(effective_resistance(series, 1, 1), std::invalid_argument);
}

TEST(Network, RayleighMonotonicity) {
  WalkRng rng(17);
  for (int inst = 0; inst < 50; ++inst) {
    const int n = 8;
    std::vector<NetEdge> edges;
    for (int i = 1; i < n; ++i) edges.push_back({static_cast<int>(rng.uniform() * i), i, 0.1 + rng.uniform() * 5});
    for (int k = 0; k < 6; ++k) {
      int u = static_cast<int>(rng.uniform() * n), v = static_cast<int>(rng.uniform() * n);
      if (u != v) edges.push_back({u, v, 0.1 + rng.uniform() * 5});
    }
    const double before = effective_resistance(FiniteNetwork(n, edges), 0, n - 1);
    auto raised = edges;
    raised[static_cast<std::size_t>(inst) % raised.size()].c *= 3.0;
    const double after = effective_resistance(FiniteNetwork(n, raised), 0, n - 1);
    EXPECT_LE(after, before + 1e-12);
    raised.push_back({0, n - 1, 1.0});
    EXPECT_LT(effective_resistance(FiniteNetwork(n, raised), 0, n - 1), after);
  }
}

TEST(Network, CrossingBoundOnRandomNetworks) {
  WalkRng rng(23);
  for (int inst = 0; inst < 50; ++inst) {
    const int n = 6;
    std::vector<NetEdge> edges;
    for (int i = 1; i < n; ++i) edges.push_back({static_cast<int>(rng.uniform() * i), i, 0.1 + rng.uniform() * 5});
    edges.push_back({0, n - 1, 0.1 + rng.uniform()});  // e_{y delta}
    FiniteNetwork net(n, edges, n - 1);
    std::vector<int> all(edges.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < edges.size(); ++i) all[i] = static_cast<int>(i), sum += edges[i].c;
    EXPECT_LE(expected_crossings(net, 0, all), 2.0 / edges.back().c * sum + 1e-9);
  }
}
