#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "trapwalk/env.hpp"
#include "trapwalk/rng.hpp"
#include "trapwalk/stats.hpp"

namespace trapwalk {

// inf{x : P[c_* > x] <= 1/n}.
double inv_scale(const ConductanceLaw& law, double n);

struct TailFit {
  double gamma_hat = 0.0;
  std::int64_t k_used = 0;
  double ci_half_width = 0.0;  // 1.96 gamma_hat / sqrt(k)
};
TailFit hill_estimate(const std::vector<double>& samples, std::int64_t k);

struct HillReport {
  TailFit main;   // k = floor(sqrt(N))
  TailFit half;   // k / 2
  TailFit twice;  // 2k
};
HillReport hill_default(const std::vector<double>& samples);

struct ExponentFit {
  double slope = 0.0;           // mean of per-replica slopes
  double slope_of_mean = 0.0;   // slope of log mean level
  double slope_sd = 0.0;        // spread of per-replica slopes
  std::size_t replicas_used = 0;
  std::size_t skipped_points = 0;  // non-positive levels
};
// levels[r][i] = X_{t_i} . dir for replica r.
ExponentFit displacement_exponent(const std::vector<std::int64_t>& checkpoints,
                                  const std::vector<std::vector<double>>& levels);

struct SelfSimilarity {
  TestResult ks;
  bool resampled = false;  // true when the pool was too small for disjoint partial sums
  std::vector<double> sample1;
  std::vector<double> sample2;
};
// Partial sums of n1 and n2 durations normalized by inv1, inv2. Disjoint when the pool allows,
// otherwise drawn with replacement using `rng`.
SelfSimilarity clock_selfsimilarity_test(const std::vector<double>& durations, std::int64_t n1, std::int64_t n2,
                                         std::int64_t replicas, double inv1, double inv2, WalkRng& rng);

struct FkCheck {
  double slope = 0.0;
  double slope_se = 0.0;
  Eigen::VectorXd v_hat;
  Eigen::VectorXd v0_hat;
  Eigen::MatrixXd sigma_hat;
  Eigen::MatrixXd Md_hat;
  double projection_residual = 0.0;  // max |v0^T Md|
  bool sigma_rank_deficient = false;
  std::vector<double> mean_sq_transverse;  // per checkpoint
};
// block_disp: per-block displacements; positions[r][i]: X_{t_i} of replica r.
FkCheck transverse_fk_check(const std::vector<Eigen::VectorXd>& block_disp, const std::vector<double>& block_durations,
                            const std::vector<double>& direction, const std::vector<std::int64_t>& checkpoints,
                            const std::vector<std::vector<Eigen::VectorXd>>& positions);

struct LimitConstants {
  double C1_hat = 0.0;
  double C_infty_hat = 0.0;
  std::size_t lt_blocks = 0;
  std::size_t blocks = 0;
};
LimitConstants estimate_limit_constants(std::size_t blocks, const std::vector<double>& W_lt, double n,
                                        const ConductanceLaw& law);

struct ScalingReport {
  double gamma_config = 0.0;
  TailFit gamma_from_blocks;
  double gamma_from_displacement = 0.0;
  double selfsim_pvalue = -1.0;
  double transverse_slope = 0.0;
  Eigen::VectorXd v_hat;
  Eigen::VectorXd v0_hat;
  Eigen::MatrixXd sigma_hat;
  Eigen::MatrixXd Md_hat;
  std::string to_json() const;
};

}  // namespace trapwalk
