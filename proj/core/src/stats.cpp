#include "trapwalk/stats.hpp"

#include <algorithm>
#include <boost/math/distributions/chi_squared.hpp>
#include <cmath>
#include <map>

#include "trapwalk/rng.hpp"
#include <numeric>
#include <stdexcept>

namespace trapwalk {

double kolmogorov_q(double lambda) {
  if (lambda <= 0.0) return 1.0;
  if (lambda < 0.2) return 1.0;
  double sum = 0.0, sign = 1.0;
  for (int j = 1; j <= 200; ++j) {
    double term = std::exp(-2.0 * j * j * lambda * lambda);
    sum += sign * term;
    if (term < 1e-17) break;
    sign = -sign;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

namespace {
// Stephens' small-sample correction.
double ks_p(double d, double en) { return kolmogorov_q((en + 0.12 + 0.11 / en) * d); }
}  // namespace

TestResult ks_two_sample(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("KS needs nonempty samples");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    d = std::max(d, std::abs(i / na - j / nb));
  }
  TestResult r;
  r.statistic = d;
  r.p_value = ks_p(d, std::sqrt(na * nb / (na + nb)));
  return r;
}

TestResult ks_one_sample(std::vector<double> x, const std::function<double(double)>& cdf) {
  if (x.empty()) throw std::invalid_argument("KS needs a nonempty sample");
  std::sort(x.begin(), x.end());
  const double n = static_cast<double>(x.size());
  double d = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    double f = cdf(x[i]);
    d = std::max({d, (i + 1) / n - f, f - i / n});
  }
  TestResult r;
  r.statistic = d;
  r.p_value = ks_p(d, std::sqrt(n));
  return r;
}

TestResult chi_square_gof(const std::vector<std::int64_t>& observed, const std::vector<double>& probs,
                          double min_expected) {
  if (observed.size() != probs.size() || observed.size() < 2)
    throw std::invalid_argument("chi-square needs matching cell vectors with at least two cells");
  const double n = static_cast<double>(std::accumulate(observed.begin(), observed.end(), std::int64_t{0}));
  if (n <= 0) throw std::invalid_argument("chi-square needs observations");
  std::vector<double> o, e;
  double acc_o = 0.0, acc_e = 0.0;
  for (std::size_t k = observed.size(); k-- > 0;) {
    acc_o += static_cast<double>(observed[k]);
    acc_e += n * probs[k];
    if (acc_e >= min_expected) {
      o.push_back(acc_o);
      e.push_back(acc_e);
      acc_o = acc_e = 0.0;
    }
  }
  if (acc_e > 0.0 || acc_o > 0.0) {
    if (e.empty()) throw std::invalid_argument("too few expected counts");
    o.back() += acc_o;
    e.back() += acc_e;
  }
  if (e.size() < 2) throw std::invalid_argument("chi-square pooled to fewer than two cells");
  double stat = 0.0;
  for (std::size_t k = 0; k < e.size(); ++k) stat += (o[k] - e[k]) * (o[k] - e[k]) / e[k];
  TestResult r;
  r.statistic = stat;
  r.dof = static_cast<int>(e.size()) - 1;
  r.p_value = boost::math::cdf(boost::math::complement(boost::math::chi_squared(r.dof), stat));
  return r;
}

LinearFit linear_fit(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("linear fit needs two or more points");
  const double n = static_cast<double>(x.size());
  const double mx = mean(x), my = mean(y);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx <= 0.0) throw std::invalid_argument("linear fit needs distinct x values");
  LinearFit f;
  f.n = x.size();
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  if (x.size() > 2) {
    double rss = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      double r = y[i] - f.intercept - f.slope * x[i];
      rss += r * r;
    }
    f.slope_se = std::sqrt(rss / (n - 2.0) / sxx);
  }
  return f;
}

double mean(const std::vector<double>& x) {
  if (x.empty()) throw std::invalid_argument("mean of empty sample");
  return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

double variance(const std::vector<double>& x) {
  if (x.size() < 2) throw std::invalid_argument("variance needs two or more values");
  const double m = mean(x);
  double s = 0.0;
  for (double v : x) s += (v - m) * (v - m);
  return s / static_cast<double>(x.size() - 1);
}

double autocorrelation(const std::vector<double>& x, std::size_t lag) {
  if (x.size() <= lag + 1) throw std::invalid_argument("series too short for lag");
  const double m = mean(x);
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    den += (x[i] - m) * (x[i] - m);
    if (i + lag < x.size()) num += (x[i] - m) * (x[i + lag] - m);
  }
  return den > 0.0 ? num / den : 0.0;
}

double mutual_information(const std::vector<int>& a, const std::vector<int>& b) {
  if (a.size() != b.size() || a.empty()) throw std::invalid_argument("mutual information needs paired samples");
  std::map<std::pair<int, int>, double> joint;
  std::map<int, double> ma, mb;
  for (std::size_t i = 0; i < a.size(); ++i) {
    joint[{a[i], b[i]}] += 1.0;
    ma[a[i]] += 1.0;
    mb[b[i]] += 1.0;
  }
  const double n = static_cast<double>(a.size());
  double mi = 0.0;
  for (const auto& [k, c] : joint) mi += (c / n) * std::log(c * n / (ma[k.first] * mb[k.second]));
  return std::max(mi, 0.0);
}

PermutationTest mi_permutation_test(const std::vector<int>& a, const std::vector<int>& b, int permutations,
                                    double quantile, std::uint64_t seed) {
  if (permutations < 1) throw std::invalid_argument("need at least one permutation");
  PermutationTest t;
  t.observed = mutual_information(a, b);
  std::vector<int> s(b);
  WalkRng rng(seed);
  std::vector<double> null;
  int above = 0;
  for (int k = 0; k < permutations; ++k) {
    for (std::size_t i = s.size(); i > 1; --i) std::swap(s[i - 1], s[rng.next() % i]);
    double m = mutual_information(a, s);
    null.push_back(m);
    if (m >= t.observed) ++above;
  }
  std::sort(null.begin(), null.end());
  auto idx = static_cast<std::size_t>(std::min<double>(null.size() - 1, std::floor(quantile * null.size())));
  t.null_quantile = null[idx];
  t.p_value = (above + 1.0) / (permutations + 1.0);
  return t;
}

}  // namespace trapwalk
