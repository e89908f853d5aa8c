#include "trapwalk/scaling.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include "json.hpp"
#include <stdexcept>

namespace trapwalk {

double inv_scale(const ConductanceLaw& law, double n) {
  if (!(n >= 1.0)) throw std::invalid_argument("inv_scale needs n >= 1");
  const double u = 1.0 / n;
  switch (law.family) {
    case LawFamily::constant:
      return n > 1.0 ? law.value : law.lower_bound();
    case LawFamily::uniform:
      return law.lo + (law.hi - law.lo) * (1.0 - u);
    case LawFamily::pareto:
      break;
  }
  if (n == 1.0) return law.lower_bound();
  if (law.slowly_varying == SlowlyVarying::constant) return law.x_min * std::pow(n, 1.0 / law.gamma);
  // Bisection on the continuous, decreasing tail.
  double lo = law.x_min, hi = law.x_min * 2.0;
  while (law.tail(hi) > u) hi *= 2.0;
  while ((hi - lo) > 1e-10 * std::max(1.0, lo)) {
    double mid = 0.5 * (lo + hi);
    (law.tail(mid) > u ? lo : hi) = mid;
  }
  return hi;
}

TailFit hill_estimate(const std::vector<double>& samples, std::int64_t k) {
  if (k < 1) throw std::invalid_argument("Hill estimator needs k >= 1");
  if (static_cast<std::int64_t>(samples.size()) < k + 1)
    throw std::invalid_argument("Hill estimator needs more than k samples");
  std::vector<double> s(samples);
  for (double v : s)
    if (!(v > 0.0)) throw std::invalid_argument("Hill estimator needs positive samples");
  std::nth_element(s.begin(), s.begin() + k, s.end(), std::greater<>());
  const double ref = std::log(s[static_cast<std::size_t>(k)]);
  double sum = 0.0;
  for (std::int64_t i = 0; i < k; ++i) sum += std::log(s[static_cast<std::size_t>(i)]) - ref;
  if (!(sum > 0.0)) throw std::invalid_argument("Hill estimator is degenerate: no spread in the upper tail");
  TailFit f;
  f.k_used = k;
  f.gamma_hat = static_cast<double>(k) / sum;
  f.ci_half_width = 1.96 * f.gamma_hat / std::sqrt(static_cast<double>(k));
  return f;
}

HillReport hill_default(const std::vector<double>& samples) {
  const auto n = static_cast<std::int64_t>(samples.size());
  const auto k = static_cast<std::int64_t>(std::floor(std::sqrt(static_cast<double>(n))));
  HillReport r;
  r.main = hill_estimate(samples, k);
  r.half = hill_estimate(samples, std::max<std::int64_t>(1, k / 2));
  r.twice = hill_estimate(samples, std::min<std::int64_t>(2 * k, n - 1));
  return r;
}

ExponentFit displacement_exponent(const std::vector<std::int64_t>& checkpoints,
                                  const std::vector<std::vector<double>>& levels) {
  if (checkpoints.size() < 3) throw std::invalid_argument("need at least three checkpoints");
  if (!(checkpoints.front() > 0) ||
      std::log10(static_cast<double>(checkpoints.back()) / checkpoints.front()) < 2.0 - 1e-12)
    throw std::invalid_argument("checkpoints must span at least two decades");
  ExponentFit out;
  std::vector<double> slopes;
  std::vector<double> sum(checkpoints.size(), 0.0);
  for (const auto& row : levels) {
    if (row.size() != checkpoints.size()) throw std::invalid_argument("level row length mismatch");
    std::vector<double> x, y;
    for (std::size_t i = 0; i < row.size(); ++i) {
      sum[i] += row[i];
      if (row[i] <= 0.0) {
        ++out.skipped_points;
        continue;
      }
      x.push_back(std::log(static_cast<double>(checkpoints[i])));
      y.push_back(std::log(row[i]));
    }
    if (x.size() >= 2) slopes.push_back(linear_fit(x, y).slope);
  }
  if (slopes.empty()) throw std::invalid_argument("no replica has two positive checkpoints");
  out.replicas_used = slopes.size();
  out.slope = mean(slopes);
  out.slope_sd = slopes.size() > 1 ? std::sqrt(variance(slopes)) : 0.0;
  std::vector<double> x, y;
  for (std::size_t i = 0; i < checkpoints.size(); ++i) {
    if (sum[i] <= 0.0) continue;
    x.push_back(std::log(static_cast<double>(checkpoints[i])));
    y.push_back(std::log(sum[i] / static_cast<double>(levels.size())));
  }
  if (x.size() >= 2) out.slope_of_mean = linear_fit(x, y).slope;
  return out;
}

SelfSimilarity clock_selfsimilarity_test(const std::vector<double>& durations, std::int64_t n1, std::int64_t n2,
                                         std::int64_t replicas, double inv1, double inv2, WalkRng& rng) {
  if (n1 < 1 || n2 < 4 * n1) throw std::invalid_argument("need n2 >= 4 n1 >= 4");
  if (replicas < 20) throw std::invalid_argument("too few replicas for a KS comparison");
  if (durations.size() < static_cast<std::size_t>(4 * n2))
    throw std::invalid_argument("too few durations for the requested partial sums");
  SelfSimilarity out;
  const auto need = static_cast<std::size_t>(replicas * (n1 + n2));
  out.resampled = durations.size() < need;
  std::size_t cursor = 0;
  auto draw = [&]() {
    if (!out.resampled) return durations[cursor++];
    auto i = static_cast<std::size_t>(rng.next() % durations.size());
    return durations[i];
  };
  for (std::int64_t r = 0; r < replicas; ++r) {
    double s = 0.0;
    for (std::int64_t i = 0; i < n1; ++i) s += draw();
    out.sample1.push_back(s / inv1);
  }
  for (std::int64_t r = 0; r < replicas; ++r) {
    double s = 0.0;
    for (std::int64_t i = 0; i < n2; ++i) s += draw();
    out.sample2.push_back(s / inv2);
  }
  out.ks = ks_two_sample(out.sample1, out.sample2);
  return out;
}

FkCheck transverse_fk_check(const std::vector<Eigen::VectorXd>& block_disp, const std::vector<double>& block_durations,
                            const std::vector<double>& direction, const std::vector<std::int64_t>& checkpoints,
                            const std::vector<std::vector<Eigen::VectorXd>>& positions) {
  const auto d = static_cast<Eigen::Index>(direction.size());
  if (d < 2) throw std::invalid_argument("transverse check needs d >= 2");
  if (block_disp.size() < 2 || block_disp.size() != block_durations.size())
    throw std::invalid_argument("need two or more blocks with durations");
  if (checkpoints.size() < 3 || std::log10(static_cast<double>(checkpoints.back()) / checkpoints.front()) < 2.0 - 1e-12)
    throw std::invalid_argument("checkpoints must span at least two decades");
  FkCheck out;
  Eigen::VectorXd m = Eigen::VectorXd::Zero(d);
  for (const auto& x : block_disp) m += x;
  m /= static_cast<double>(block_disp.size());
  double tau_mean = 0.0;
  for (double t : block_durations) tau_mean += t;
  tau_mean /= static_cast<double>(block_durations.size());
  out.v_hat = m / tau_mean;
  Eigen::VectorXd ell = Eigen::Map<const Eigen::VectorXd>(direction.data(), d);
  out.v0_hat = m.normalized();
  if (out.v0_hat.dot(ell) < 0) out.v0_hat = -out.v0_hat;

  out.sigma_hat = Eigen::MatrixXd::Zero(d, d);
  for (const auto& x : block_disp) out.sigma_hat += (x - m) * (x - m).transpose();
  out.sigma_hat /= static_cast<double>(block_disp.size() - 1);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(out.sigma_hat);
  Eigen::VectorXd ev = es.eigenvalues().cwiseMax(0.0);
  out.sigma_rank_deficient = ev.minCoeff() <= 1e-12 * std::max(1.0, ev.maxCoeff());
  Eigen::MatrixXd root = es.eigenvectors() * ev.cwiseSqrt().asDiagonal() * es.eigenvectors().transpose();
  Eigen::MatrixXd P = out.v0_hat * out.v0_hat.transpose();
  out.Md_hat = (Eigen::MatrixXd::Identity(d, d) - P) * root;
  out.projection_residual = (out.v0_hat.transpose() * out.Md_hat).cwiseAbs().maxCoeff();

  std::vector<double> x, y;
  for (std::size_t i = 0; i < checkpoints.size(); ++i) {
    double s = 0.0;
    for (const auto& row : positions) {
      Eigen::VectorXd p = row.at(i);
      Eigen::VectorXd t = p - out.v0_hat * out.v0_hat.dot(p);
      s += t.squaredNorm();
    }
    s /= static_cast<double>(positions.size());
    out.mean_sq_transverse.push_back(s);
    if (s > 0.0) {
      x.push_back(std::log(static_cast<double>(checkpoints[i])));
      y.push_back(std::log(s));
    }
  }
  LinearFit f = linear_fit(x, y);
  out.slope = f.slope;
  out.slope_se = f.slope_se;
  return out;
}

LimitConstants estimate_limit_constants(std::size_t blocks, const std::vector<double>& W_lt, double n,
                                        const ConductanceLaw& law) {
  if (W_lt.empty()) throw std::invalid_argument("no LT blocks");
  if (blocks < W_lt.size()) throw std::invalid_argument("more LT blocks than blocks");
  LimitConstants c;
  c.blocks = blocks;
  c.lt_blocks = W_lt.size();
  const double g = law.gamma;
  c.C1_hat = (static_cast<double>(W_lt.size()) / static_cast<double>(blocks)) / law.tail(n);
  double mw = 0.0;
  for (double w : W_lt) mw += std::pow(w, g);
  mw /= static_cast<double>(W_lt.size());
  c.C_infty_hat = std::pow(c.C1_hat * mw, 1.0 / g);
  return c;
}

namespace {
nlohmann::json vec_json(const Eigen::VectorXd& v) {
  nlohmann::json a = nlohmann::json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}
nlohmann::json mat_json(const Eigen::MatrixXd& m) {
  nlohmann::json a = nlohmann::json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) a.push_back(vec_json(m.row(i).transpose()));
  return a;
}
}  // namespace

std::string ScalingReport::to_json() const {
  nlohmann::json j;
  j["schema"] = "scaling_report/1";
  j["gamma_config"] = gamma_config;
  j["gamma_from_blocks"] = {{"gamma_hat", gamma_from_blocks.gamma_hat},
                            {"k_used", gamma_from_blocks.k_used},
                            {"ci_half_width", gamma_from_blocks.ci_half_width}};
  j["gamma_from_displacement"] = gamma_from_displacement;
  j["selfsim_pvalue"] = selfsim_pvalue;
  j["transverse_slope"] = transverse_slope;
  j["v_hat"] = vec_json(v_hat);
  j["v0_hat"] = vec_json(v0_hat);
  j["sigma_hat"] = mat_json(sigma_hat);
  j["Md_hat"] = mat_json(Md_hat);
  j["Md_scale_note"] = "Md_hat is (I - P_v0) sqrt(Sigma) without the scalar C_infty^(-gamma/2)";
  return j.dump(2);
}

}  // namespace trapwalk
