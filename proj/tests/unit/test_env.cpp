#include <gtest/gtest.h>

#include <cmath>

#include "helpers.hpp"
#include "trapwalk/stats.hpp"

using namespace trapwalk;
using namespace twtest;

TEST(Lattice, EdgeCanonicalForm) {
  const Vertex a = make_vertex({3, -2}), b = make_vertex({4, -2});
  EXPECT_EQ(LatticeEdge::between(a, b), LatticeEdge::between(b, a));
  EXPECT_EQ(LatticeEdge::between(a, b), LatticeEdge::from(a, 0, 2));
  EXPECT_EQ(LatticeEdge::between(a, b), LatticeEdge::from(b, opposite(0, 2), 2));
  EXPECT_THROW(LatticeEdge::between(a, make_vertex({5, -2})), std::invalid_argument);
}

TEST(Env, ConductancesArePureAndSymmetric) {
  ConductanceField f1(pareto_field()), f2(pareto_field());
  for (int i = -50; i < 50; ++i) {
    const Vertex v = make_vertex({i, 3 * i % 7});
    for (int j = 0; j < 4; ++j) {
      const double c = f1.conductance(v, j);
      EXPECT_EQ(c, f1.conductance(v, j));
      EXPECT_EQ(c, f2.conductance(v, j));
      EXPECT_EQ(c, f1.conductance(neighbour(v, j, 2), opposite(j, 2)));
      EXPECT_GT(c, 0.0);
    }
  }
  FieldConfig other = pareto_field();
  other.seed = 2;
  ConductanceField f3(other);
  int same = 0;
  for (int i = 0; i < 100; ++i) same += f1.conductance(make_vertex({i, 0}), 0) == f3.conductance(make_vertex({i, 0}), 0);
  EXPECT_LT(same, 3);
}

TEST(Env, ParetoTailFrequency) {
  ConductanceField f(pareto_field(0.5, 20, 1, 99));
  int above = 0;
  const int n = 1000000;
  for (int i = 0; i < n; ++i) above += f.conductance(make_vertex({i % 1000, i / 1000}), i % 2) >= 100.0;
  EXPECT_NEAR(static_cast<double>(above) / n, 0.10, 0.001);
}

TEST(Env, SampledLawPassesKs) {
  for (const auto& law : {ConductanceLaw::pareto(0.5), ConductanceLaw::log_pareto(0.7, 0.6, 2.0),
                          ConductanceLaw::uniform(1.0, 3.0)}) {
    FieldConfig fc;
    fc.law = law;
    fc.seed = 5;
    ConductanceField f(fc);
    std::vector<double> x;
    for (int i = 0; i < 200000; ++i) x.push_back(f.conductance(make_vertex({i, -i}), 1));
    EXPECT_GT(ks_one_sample(x, [&](double t) { return law.cdf(t); }).p_value, 0.01);
  }
}

TEST(Env, TailAndQuantileContracts) {
  for (const auto& law : {ConductanceLaw::pareto(0.5), ConductanceLaw::pareto(0.9, 0.5),
                          ConductanceLaw::log_pareto(0.5, 0.5), ConductanceLaw::log_pareto(0.3, -1.0)}) {
    EXPECT_NEAR(law.tail(law.lower_bound()), 1.0, 1e-12);
    double prev = 1.0;
    for (double t = law.lower_bound(); t < 1e12; t *= 1.7) {
      const double T = law.tail(t);
      EXPECT_LE(T, prev + 1e-15);
      prev = T;
    }
    for (double u : {1.0, 0.5, 0.1, 1e-3, 1e-8}) EXPECT_NEAR(law.tail(law.quantile(u)) / u, 1.0, 1e-8);
  }
}

TEST(Env, LawValidation) {
  EXPECT_THROW(ConductanceLaw::pareto(0.0).validate(), std::invalid_argument);
  EXPECT_THROW(ConductanceLaw::pareto(1.0).validate(), std::invalid_argument);
  EXPECT_THROW(ConductanceLaw::uniform(2.0, 1.0).validate(), std::invalid_argument);
  EXPECT_NO_THROW(ConductanceLaw::pareto(0.99).validate());
  // A log factor growing faster than t^gamma decays would make the tail increase.
  EXPECT_THROW(ConductanceLaw::log_pareto(0.5, 2.0).validate(), std::invalid_argument);
}

TEST(Env, VertexClassification) {
  const Vertex o{};
  ConductanceField unit(constant_field(1.0, 2.0));
  EXPECT_EQ(classify_vertex(unit, o), VertexClass::open);
  ConductanceField heavy(constant_field(1.0, 2.0), {{LatticeEdge::from(o, 1, 2), 10.0}});
  EXPECT_EQ(classify_vertex(heavy, o), VertexClass::closed);
  ConductanceField edge_k(constant_field(1.0, 2.0), {{LatticeEdge::from(o, 1, 2), 2.0}, {LatticeEdge::from(o, 2, 2), 0.5}});
  EXPECT_EQ(classify_vertex(edge_k, o), VertexClass::open);
}

TEST(Env, OpennessMonotoneInK) {
  ConductanceField f(pareto_field(0.5, 3.0, 1.0, 4));
  ConductanceField g = f.with_K(30.0);
  for (int i = 0; i < 2000; ++i) {
    const Vertex v = make_vertex({i % 50, i / 50});
    if (is_open(f, v)) EXPECT_TRUE(is_open(g, v));
  }
}

TEST(Env, GoodCertification) {
  ConductanceField unit(constant_field(1.0, 2.0));
  GoodCertificate g = certify_good(unit, Vertex{}, 10);
  EXPECT_EQ(g.status, GoodStatus::good_certified);
  EXPECT_EQ(g.depth, 10);
  ASSERT_EQ(g.witness.size(), 11u);
  for (std::size_t i = 0; i + 1 < g.witness.size(); ++i) {
    const int j = direction_between(g.witness[i], g.witness[i + 1], 2);
    if (i % 2 == 0) EXPECT_EQ(j, 0);
    else EXPECT_TRUE(j == 0 || j == 1);
    EXPECT_TRUE(is_open(unit, g.witness[i + 1]));
  }
  ConductanceField closed(constant_field(1.0, 2.0), {{LatticeEdge::from(Vertex{}, 3, 2), 50.0}});
  EXPECT_EQ(certify_good(closed, Vertex{}, 10).status, GoodStatus::bad_certified);
  BadCluster c = explore_bad_cluster(unit, Vertex{}, 1000);
  EXPECT_TRUE(c.members.empty());
  EXPECT_EQ(c.width, 0);
}

TEST(Env, GoodCertificationDepthMonotone) {
  ConductanceField f(pareto_field(0.5, 4.0, 1.0, 8));
  for (int i = 0; i < 200; ++i) {
    const Vertex v = make_vertex({i, 2 * i});
    GoodCertificate deep = certify_good(f, v, 16);
    if (deep.status != GoodStatus::good_certified) continue;
    EXPECT_EQ(certify_good(f, v, 8).status, GoodStatus::good_certified);
  }
}

TEST(Env, BadClusterWidth) {
  // Blocking the two forward edges out of the origin makes it bad.
  ConductanceField f(constant_field(1.0, 2.0), {{LatticeEdge::from(make_vertex({1, 0}), 0, 2), 100.0},
                                                {LatticeEdge::from(make_vertex({1, 0}), 1, 2), 100.0}});
  BadCluster c = explore_bad_cluster(f, Vertex{}, 1000);
  EXPECT_FALSE(c.truncated);
  ASSERT_FALSE(c.members.empty());
  int lo0 = 1 << 20, hi0 = -(1 << 20), lo1 = lo0, hi1 = hi0;
  for (const auto& m : c.members) {
    lo0 = std::min(lo0, m[0]), hi0 = std::max(hi0, m[0]);
    lo1 = std::min(lo1, m[1]), hi1 = std::max(hi1, m[1]);
  }
  EXPECT_EQ(c.width, std::max(hi0 - lo0, hi1 - lo1));
}
