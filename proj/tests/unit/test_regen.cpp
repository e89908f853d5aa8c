#include <gtest/gtest.h>

#include <cmath>

#include "helpers.hpp"
#include "trapwalk/regen.hpp"
#include "trapwalk/stats.hpp"

using namespace trapwalk;
using namespace twtest;

namespace {

EnhancedTrajectory path_of(const Geometry& geo, const std::vector<int>& dirs, std::uint8_t z = 1) {
  std::vector<Vertex> pos{Vertex{}};
  std::vector<std::uint8_t> zb{z};
  for (int j : dirs) {
    pos.push_back(neighbour(pos.back(), j, geo.dim()));
    zb.push_back(z);
  }
  return EnhancedTrajectory::from_path(geo, pos, zb);
}

constexpr std::int64_t kCap = 1000000000000000LL;

EnhancedTrajectory level_walk(const ConductanceField& f, std::uint64_t seed, double level) {
  WalkRng rng(seed);
  WalkOptions o;
  o.compress_threshold = 5;
  o.stop_level = level;
  return run_walk(f, Vertex{}, kCap, rng, o);
}

RegenSequence block_walk(std::uint64_t seed, double level, bool annotate = true) {
  static const ConductanceField f(pareto_field(0.5, 2, 4, 21, 0.5));
  EnhancedTrajectory t = level_walk(f, seed, level);
  RegenConfig c;
  c.annotate = annotate;
  c.n_threshold = 1e4;
  return detect_regenerations(t, f, c);
}

}  // namespace

TEST(Mcal, StraightOpenPath) {
  ConductanceField f(constant_field(1.0, 2.0));
  auto t = straight_path(f.geometry(), 20);
  auto i = find_Mcal(t, f, 0);
  ASSERT_TRUE(i.has_value());
  EXPECT_EQ(*i, 2);
}

TEST(Mcal, ClosedCandidateSkipped) {
  // (2,0) closed: the first candidate moves on.
  ConductanceField f(constant_field(1.0, 2.0), {{LatticeEdge::from(make_vertex({2, 0}), 1, 2), 50.0}});
  auto t = straight_path(f.geometry(), 20);
  auto i = find_Mcal(t, f, 0);
  ASSERT_TRUE(i.has_value());
  EXPECT_GT(*i, 2);
}

TEST(Mcal, NoDoubleForwardStep) {
  ConductanceField f(constant_field(1.0, 2.0));
  std::vector<int> zig;
  for (int k = 0; k < 30; ++k) zig.push_back(k % 2 == 0 ? 0 : 1);
  EXPECT_FALSE(find_Mcal(path_of(f.geometry(), zig), f, 0).has_value());
}

TEST(Regen, HandTrace) {
  ConductanceField f(constant_field(1.0, 2.0));
  auto t = straight_path(f.geometry(), 80);
  RegenConfig c;
  c.n_threshold = 10;
  RegenSequence s = detect_regenerations(t, f, c);
  ASSERT_FALSE(s.taus.empty());
  EXPECT_EQ(s.taus.front(), 3);
  EXPECT_EQ(t.position_at(3), make_vertex({3, 0}));
}

TEST(Regen, BacktrackingPathHasNoRegeneration) {
  ConductanceField f(constant_field(1.0, 2.0));
  std::vector<int> dirs;
  for (int k = 0; k < 20; ++k) {
    for (int i = 0; i < 4; ++i) dirs.push_back(0);
    for (int i = 0; i < 5; ++i) dirs.push_back(2);
  }
  RegenConfig c;
  c.n_threshold = 10;
  EXPECT_TRUE(detect_regenerations(path_of(f.geometry(), dirs), f, c).taus.empty());
}

TEST(Regen, BlockInvariantsOnRealWalk) {
  ConductanceField f(pareto_field(0.5, 2, 4, 21, 0.5));
  EnhancedTrajectory t = level_walk(f, 5, 3e4);
  RegenConfig c;
  c.n_threshold = 1e4;
  c.delta = 0.25;
  RegenSequence s = detect_regenerations(t, f, c);
  ASSERT_GE(s.blocks.size(), 20u);
  ASSERT_EQ(s.taus.size(), s.blocks.size() + 1);
  Vertex sum{};
  const double alpha = s.config.alpha;
  for (std::size_t k = 0; k < s.blocks.size(); ++k) {
    const RegenBlock& b = s.blocks[k];
    EXPECT_EQ(b.start_time, s.taus[k]);
    EXPECT_EQ(b.end_time, s.taus[k + 1]);
    EXPECT_EQ(b.duration, b.end_time - b.start_time);
    EXPECT_LE(b.time_below_threshold, b.duration);
    EXPECT_LE(b.time_on_max_edge, b.duration);
    EXPECT_GE(f.geometry().level(b.displacement), 2.0 / std::sqrt(2.0) - 1e-9);
    if (b.flags.OLT) EXPECT_TRUE(b.flags.LT);
    EXPECT_FALSE(b.flags.OLT && b.flags.SLT);
    if (b.has_trap_edge) EXPECT_GE(b.trap_conductance, 1e4);
    EXPECT_LE(b.trap_conductance, b.max_conductance);
    sum += b.displacement;

    // chi: the block fits B(chi, chi^alpha) and not B(chi-1, (chi-1)^alpha).
    double L = 0, T = 0;
    auto cur = t.cursor_at(b.start_time);
    const Vertex o0 = cur.position();
    while (cur.time() < b.end_time) {
      Chunk ch = cur.chunk();
      const std::int64_t n = std::min(ch.count, b.end_time - ch.t0);
      for (const Vertex* v : {&ch.from, &ch.to}) {
        L = std::max(L, std::abs(f.geometry().level(*v - o0)));
        T = std::max(T, f.geometry().transverse_extent(*v - o0));
      }
      cur.advance(n);
    }
    EXPECT_LE(L, b.chi + 1e-9);
    EXPECT_LE(T, std::pow(b.chi, alpha) + 1e-9);
    if (b.chi > 0) EXPECT_TRUE(L > b.chi - 1 + 1e-9 || T > std::pow(b.chi - 1, alpha) + 1e-9);

    auto [below, above] = split_block_time(t, f, b, std::numeric_limits<double>::infinity());
    EXPECT_EQ(below, b.duration);
    EXPECT_EQ(above, 0);
    auto [b2, a2] = split_block_time(t, f, b, 0.0);
    EXPECT_EQ(b2, 0);
    EXPECT_EQ(a2, b.duration);
    auto [b3, a3] = split_block_time(t, f, b, 1e4);
    EXPECT_EQ(b3, b.time_below_threshold);
    EXPECT_EQ(a3 + b3, b.duration);
  }
  EXPECT_EQ(sum, t.position_at(s.taus.back()) - t.position_at(s.taus.front()));
}

TEST(Regen, AnnotationDoesNotChangeTimes) {
  RegenSequence a = block_walk(11, 1e4, true);
  RegenSequence b = block_walk(11, 1e4, false);
  EXPECT_EQ(a.taus, b.taus);
}

TEST(Regen, TrapFlagsOnFixture) {
  // Straight path past a heavy transverse edge at x=50; optional unmet neighbour above n^delta.
  auto run = [](bool second) {
    std::vector<std::pair<LatticeEdge, double>> pins{{LatticeEdge::from(make_vertex({50, 0}), 1, 2), 1e5}};
    if (second) pins.push_back({LatticeEdge::from(make_vertex({50, 1}), 0, 2), 100.0});
    ConductanceField f(constant_field(1.0, 2.0), pins);
    auto t = straight_path(f.geometry(), 150);
    RegenConfig c;
    c.n_threshold = 1e4;
    c.delta = 0.25;
    RegenSequence s = detect_regenerations(t, f, c);
    for (const auto& b : s.blocks)
      if (b.start_time <= 50 && b.end_time > 50) return b;
    ADD_FAILURE() << "no block covers x=50";
    return RegenBlock{};
  };
  RegenBlock one = run(false);
  EXPECT_TRUE(one.flags.LT);
  EXPECT_TRUE(one.flags.OLT);
  EXPECT_FALSE(one.flags.SLT);
  EXPECT_DOUBLE_EQ(one.trap_conductance, 1e5);
  RegenBlock two = run(true);
  EXPECT_TRUE(two.flags.LT);
  EXPECT_TRUE(two.flags.SLT);
  EXPECT_FALSE(two.flags.OLT);
  EXPECT_EQ(two.flags.NLT, 2);
}

TEST(Regen, ReclassificationMatchesDirectAnnotation) {
  ConductanceField f(pareto_field(0.5, 2, 4, 21, 0.5));
  EnhancedTrajectory t = level_walk(f, 8, 3e4);
  RegenConfig lo;
  lo.n_threshold = 1e3;
  lo.delta = 0.25;
  lo.notable_floor = 3.0;
  RegenSequence s = detect_regenerations(t, f, lo);
  RegenConfig hi = lo;
  hi.n_threshold = 1e5;
  hi.notable_floor = 0.0;
  RegenSequence direct = detect_regenerations(t, f, hi);
  auto re = classify_traps(s.blocks, 1e5, 0.25, f.geometry(), s.config.alpha, 3.0);
  ASSERT_EQ(re.size(), direct.blocks.size());
  for (std::size_t k = 0; k < re.size(); ++k) {
    EXPECT_EQ(re[k].flags.LT, direct.blocks[k].flags.LT);
    EXPECT_EQ(re[k].flags.NLT, direct.blocks[k].flags.NLT);
    EXPECT_EQ(re[k].has_trap_edge, direct.blocks[k].has_trap_edge);
  }
  EXPECT_THROW(classify_traps(s.blocks, 10.0, 0.25, f.geometry(), s.config.alpha, 3.0), std::invalid_argument);
}

TEST(Regen, IndependenceProxy) {
  std::vector<double> dur, lev;
  for (std::uint64_t r = 0; r < 16; ++r) {
    RegenSequence s = block_walk(100 + r, 4e4, false);
    for (std::size_t k = 1; k < s.blocks.size(); ++k) {
      dur.push_back(static_cast<double>(s.blocks[k].duration));
      lev.push_back(s.blocks[k].displacement[0]);
    }
  }
  ASSERT_GT(dur.size(), 500u);
  const double band = 3.0 / std::sqrt(static_cast<double>(dur.size()));
  EXPECT_LT(std::abs(autocorrelation(dur, 1)), band);
  EXPECT_LT(std::abs(autocorrelation(lev, 1)), band);
}

TEST(Regen, ChiOfExamples) {
  Geometry geo(2, {1.0, 0.0}, 1.0);
  EXPECT_EQ(chi_of({Vertex{}}, geo, 6.0), 0);
  EXPECT_EQ(chi_of({Vertex{}, make_vertex({3, 0})}, geo, 6.0), 3);
  EXPECT_EQ(chi_of({make_vertex({1, 70})}, geo, 6.0), 3);  // 2^6 = 64 < 70 <= 3^6
}
