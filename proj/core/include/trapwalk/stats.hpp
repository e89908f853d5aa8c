#pragma once

#include <cstdint>
#include <functional>
#include <vector>

namespace trapwalk {

struct TestResult {
  double statistic = 0.0;
  double p_value = 1.0;
  int dof = 0;
};

// Kolmogorov survival function Q(l) = 2 sum_{j>=1} (-1)^{j-1} exp(-2 j^2 l^2).
double kolmogorov_q(double lambda);

TestResult ks_two_sample(std::vector<double> a, std::vector<double> b);
TestResult ks_one_sample(std::vector<double> x, const std::function<double(double)>& cdf);

// Pearson GOF; cells with expected count below `min_expected` are pooled from the right.
// `probs` must sum to 1 (the last cell carries the tail).
TestResult chi_square_gof(const std::vector<std::int64_t>& observed, const std::vector<double>& probs,
                          double min_expected = 5.0);

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_se = 0.0;
  std::size_t n = 0;
};
LinearFit linear_fit(const std::vector<double>& x, const std::vector<double>& y);

double mean(const std::vector<double>& x);
double variance(const std::vector<double>& x);  // unbiased
double autocorrelation(const std::vector<double>& x, std::size_t lag);

}  // namespace trapwalk

namespace trapwalk {

// Plug-in mutual information (nats) of two discrete samples.
double mutual_information(const std::vector<int>& a, const std::vector<int>& b);

struct PermutationTest {
  double observed = 0.0;
  double null_quantile = 0.0;  // requested quantile of the permutation null
  double p_value = 1.0;
};
// Null from `permutations` shuffles of b driven by `seed`.
PermutationTest mi_permutation_test(const std::vector<int>& a, const std::vector<int>& b, int permutations,
                                    double quantile, std::uint64_t seed);

}  // namespace trapwalk
