#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "trapwalk/rng.hpp"
#include "trapwalk/scaling.hpp"
#include "trapwalk/stats.hpp"

using namespace trapwalk;

namespace {

std::vector<double> pareto_draws(std::size_t n, double gamma, std::uint64_t seed) {
  WalkRng rng(seed);
  std::vector<double> x(n);
  for (auto& v : x) v = std::pow(1.0 - rng.uniform(), -1.0 / gamma);
  return x;
}

}  // namespace

TEST(Stats, KolmogorovSurvival) {
  EXPECT_NEAR(kolmogorov_q(1.3580986), 0.05, 1e-6);
  EXPECT_NEAR(kolmogorov_q(1.6276236), 0.01, 1e-6);
  EXPECT_DOUBLE_EQ(kolmogorov_q(0.0), 1.0);
}

TEST(Stats, KsOneAndTwoSample) {
  WalkRng rng(3);
  std::vector<double> u(5000), v(5000), w(5000);
  for (auto& x : u) x = rng.uniform();
  for (auto& x : v) x = rng.uniform();
  for (auto& x : w) x = rng.uniform() * 1.1;
  EXPECT_GT(ks_one_sample(u, [](double x) { return std::clamp(x, 0.0, 1.0); }).p_value, 0.01);
  EXPECT_GT(ks_two_sample(u, v).p_value, 0.01);
  EXPECT_LT(ks_two_sample(u, w).p_value, 0.01);
}

TEST(Stats, ChiSquarePoolsSparseCells) {
  std::vector<std::int64_t> obs{50, 30, 15, 4, 1};
  TestResult r = chi_square_gof(obs, {0.5, 0.3, 0.15, 0.04, 0.01});
  EXPECT_NEAR(r.statistic, 0.0, 1e-12);
  EXPECT_EQ(r.dof, 3);  // last two cells pooled
  EXPECT_NEAR(r.p_value, 1.0, 1e-12);
}

TEST(Stats, LinearFitAndMoments) {
  LinearFit f = linear_fit({1, 2, 3, 4}, {3, 5, 7, 9});
  EXPECT_NEAR(f.slope, 2.0, 1e-12);
  EXPECT_NEAR(f.intercept, 1.0, 1e-12);
  EXPECT_NEAR(mean({1, 2, 3}), 2.0, 1e-15);
  EXPECT_NEAR(variance({1, 2, 3}), 1.0, 1e-15);
  EXPECT_NEAR(autocorrelation({1, -1, 1, -1, 1, -1}, 1), -1.0, 0.2);
}

TEST(Stats, MutualInformation) {
  EXPECT_NEAR(mutual_information({0, 1, 0, 1}, {0, 1, 0, 1}), std::log(2.0), 1e-12);
  EXPECT_NEAR(mutual_information({0, 0, 1, 1}, {0, 1, 0, 1}), 0.0, 1e-12);
  std::vector<int> a(2000), b(2000);
  for (int i = 0; i < 2000; ++i) a[i] = i % 3, b[i] = (i % 3 == 0) ? 1 : (i % 7 == 0);
  auto pt = mi_permutation_test(a, b, 100, 0.99, 1);
  EXPECT_GT(pt.observed, pt.null_quantile);
}

TEST(InvScale, ParetoClosedForm) {
  EXPECT_NEAR(inv_scale(ConductanceLaw::pareto(0.5), 100.0), 1e4, 1e-6);
  for (double g : {0.3, 0.7, 0.95})
    for (double n : {1.0, 10.0, 1e5}) EXPECT_NEAR(inv_scale(ConductanceLaw::pareto(g), n) / std::pow(n, 1 / g), 1.0, 1e-9);
}

TEST(InvScale, LogPowerInequalityPairAndMonotone) {
  ConductanceLaw law = ConductanceLaw::log_pareto(0.5, 0.5);
  double prev = 0.0;
  for (double n : {2.0, 10.0, 1e3, 1e5, 1e8}) {
    const double x = inv_scale(law, n);
    EXPECT_GE(x, prev);
    prev = x;
    EXPECT_LE(law.tail(x * (1 + 1e-9)), 1.0 / n * (1 + 1e-9));
    EXPECT_GT(law.tail(x * (1 - 1e-8)), 1.0 / n);
  }
}

TEST(Hill, ParetoRecovery) {
  auto x = pareto_draws(100000, 0.5, 42);
  TailFit f = hill_estimate(x, 1000);
  EXPECT_NEAR(f.gamma_hat, 0.5, 0.05);
  EXPECT_NEAR(f.ci_half_width, 1.96 * f.gamma_hat / std::sqrt(1000.0), 1e-12);
  HillReport r = hill_default(x);
  EXPECT_EQ(r.main.k_used, 316);
  EXPECT_EQ(r.half.k_used, 158);
  EXPECT_EQ(r.twice.k_used, 632);
}

TEST(Hill, ScaleInvarianceAndErrors) {
  auto x = pareto_draws(5000, 0.8, 7);
  auto y = x;
  for (auto& v : y) v *= 7.0;
  EXPECT_NEAR(hill_estimate(x, 100).gamma_hat, hill_estimate(y, 100).gamma_hat, 1e-10);
  EXPECT_THROW(hill_estimate(std::vector<double>(100, 3.0), 10), std::invalid_argument);
  EXPECT_THROW(hill_estimate({1.0, 2.0}, 2), std::invalid_argument);
  EXPECT_THROW(hill_estimate({1.0, -2.0, 3.0}, 1), std::invalid_argument);
}

TEST(Exponent, StraightPathSlopeOne) {
  std::vector<std::int64_t> cp{100, 1000, 10000, 100000};
  std::vector<std::vector<double>> lv{{100, 1000, 10000, 100000}, {100, 1000, 10000, 100000}};
  ExponentFit f = displacement_exponent(cp, lv);
  EXPECT_NEAR(f.slope, 1.0, 1e-12);
  EXPECT_EQ(f.replicas_used, 2u);
}

TEST(SelfSimilarity, StableAcceptedLightTailRejected) {
  const std::int64_t n1 = 1000, n2 = 4000, reps = 500;
  auto dur = pareto_draws(static_cast<std::size_t>(reps * (n1 + n2)), 0.5, 99);
  WalkRng rng(1);
  ConductanceLaw law = ConductanceLaw::pareto(0.5);
  SelfSimilarity s = clock_selfsimilarity_test(dur, n1, n2, reps, inv_scale(law, n1), inv_scale(law, n2), rng);
  EXPECT_FALSE(s.resampled);
  EXPECT_GT(s.ks.p_value, 0.01);

  std::exponential_distribution<double> ex(1.0);
  WalkRng g(5);
  for (auto& v : dur) v = ex(g);
  SelfSimilarity e = clock_selfsimilarity_test(dur, n1, n2, reps, inv_scale(law, n1), inv_scale(law, n2), rng);
  EXPECT_LT(e.ks.p_value, 0.01);
  EXPECT_THROW(clock_selfsimilarity_test(dur, n1, 2 * n1, reps, 1, 1, rng), std::invalid_argument);
  EXPECT_THROW(clock_selfsimilarity_test(dur, n1, n2, 10, 1, 1, rng), std::invalid_argument);
}

TEST(Fk, SigmaAndProjectionOnSyntheticBlocks) {
  WalkRng rng(8);
  std::normal_distribution<double> nd(0.0, 1.0);
  std::vector<Eigen::VectorXd> disp;
  std::vector<double> dur;
  for (int i = 0; i < 10000; ++i) {
    Eigen::VectorXd x(2);
    x << 3.0 + nd(rng), nd(rng);
    disp.push_back(x);
    dur.push_back(5.0);
  }
  std::vector<std::int64_t> cp{100, 1000, 10000};
  std::vector<std::vector<Eigen::VectorXd>> pos;
  for (int r = 0; r < 400; ++r) {
    std::vector<Eigen::VectorXd> row;
    for (auto t : cp) {
      Eigen::VectorXd p(2);
      p << 0.6 * t, std::sqrt(static_cast<double>(t)) * nd(rng);
      row.push_back(p);
    }
    pos.push_back(row);
  }
  FkCheck f = transverse_fk_check(disp, dur, {1.0, 0.0}, cp, pos);
  EXPECT_LT((f.sigma_hat - Eigen::MatrixXd::Identity(2, 2)).norm() / std::sqrt(2.0), 0.05);
  EXPECT_LT(f.projection_residual, 1e-8);
  EXPECT_NEAR(f.v_hat(0), 0.6, 0.01);
  EXPECT_NEAR(f.slope, 1.0, 0.1);
  EXPECT_FALSE(f.sigma_rank_deficient);
  EXPECT_THROW(transverse_fk_check(disp, dur, {1.0, 0.0}, {100, 1000}, pos), std::invalid_argument);
}

TEST(Stable, LargestTermDominates) {
  std::vector<double> ratio;
  for (int r = 0; r < 400; ++r) {
    auto x = pareto_draws(1000, 0.5, 1000 + r);
    ratio.push_back(*std::max_element(x.begin(), x.end()) / std::accumulate(x.begin(), x.end(), 0.0));
  }
  std::nth_element(ratio.begin(), ratio.begin() + 200, ratio.end());
  EXPECT_GE(ratio[200], 0.5);
}

TEST(LimitConstants, Formulae) {
  ConductanceLaw law = ConductanceLaw::pareto(0.5);
  LimitConstants c = estimate_limit_constants(1000, std::vector<double>(1000, 1.0), 1e4, law);
  EXPECT_NEAR(c.C1_hat, 100.0, 1e-9);
  EXPECT_NEAR(c.C_infty_hat, std::pow(c.C1_hat, 2.0), 1e-6);
  LimitConstants h = estimate_limit_constants(1000, {4.0, 16.0}, 1e4, law);
  EXPECT_NEAR(h.C1_hat, 0.2, 1e-12);
  EXPECT_NEAR(h.C_infty_hat, std::pow(0.2 * 3.0, 2.0), 1e-12);
  EXPECT_THROW(estimate_limit_constants(10, {}, 1e4, law), std::invalid_argument);
}
