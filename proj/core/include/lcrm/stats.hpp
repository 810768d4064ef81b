#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "lcrm/ensemble.hpp"
#include "lcrm/mp_model.hpp"
#include "lcrm/sampling.hpp"

namespace lcrm {

double normal_cdf(double x);

struct RigidityProfile {
  std::vector<double> deviation;  // |lambda_j - gamma_j|
  std::vector<double> budget;     // N^{-2/3} min(j, K + 1 - j)^{-1/3}
  std::vector<double> ratio;
  double max_ratio = 0.0;
  int argmax = 0;  // 1-based index j
};

// Eigenvalues and classical locations must both be in descending order; only
// the first K = min(M, N) entries of each are used.
RigidityProfile rigidity_profile(std::span<const double> eigenvalues, std::span<const double> gamma, int N);
// Model must carry M and N.
RigidityProfile rigidity_profile(const SpectralSample& sample, const MpModel& model);

// (N lambda_1 - (sqrt M + sqrt N)^2) / ((sqrt M + sqrt N)(1/sqrt M + 1/sqrt N)^{1/3})
double edge_rescale(double lambda1, int M, int N);

// sup_x |F_n(x) - F(x)| evaluated on both sides of every jump; F continuous.
double ks_distance(std::span<const double> samples, const std::function<double(double)>& cdf);

struct SpikePrediction {
  double d = 0.0;
  double theta = 0.0;
  double a = 0.0;
  double a_se = 0.0;
  double b = 0.0;
  double kurtosis = 3.0;      // E q_i^4
  double kurtosis_se = 0.0;
  double mixed_moment = 0.0;  // E[sum_k x_ik^2 sum_{u != i}(x_uk^2 - 1/N)]
  double mixed_se = 0.0;
  std::int64_t pilot = 0;
};

inline constexpr std::int64_t kMinSpikePilot = 10000;

// a and b from supplied moments.
SpikePrediction spike_prediction_from_moments(double d, double y, int N, double kurtosis, double mixed_moment,
                                              double mixed_se = 0.0, double kurtosis_se = 0.0);

// Moments estimated on `pilot` fresh columns (substream `seed`); `coordinate`
// is the 0-based spiked coordinate i. Rejects pilot < 1e4 and d <= sqrt(y).
SpikePrediction spike_prediction(double d, double y, int N, const ColumnSampler& sampler, std::int64_t pilot,
                                 std::uint64_t seed, int coordinate = 0);

// ((lambda - theta(d)) sqrt(N / (d^2 - y)) - a) / b
double phi_statistic(double lambda_obs, const SpikePrediction& pred, double y, int N);

struct LinearTailReport {
  std::vector<double> epsilons;
  std::vector<double> thresholds;  // N^eps ||A|| / sqrt(N)
  std::vector<double> exceedance;
  int trials = 0;
};

// Empirical P(|sum_i x_i A_i| > N^eps ||A||_2 / sqrt(N)) for columns x = q / sqrt(N).
LinearTailReport hw_linear_test(const ColumnSampler& sampler, const Eigen::VectorXd& A, int N, int trials,
                                std::uint64_t seed, std::vector<double> epsilons = {0.05, 0.1, 0.2});

struct QuadraticTailReport {
  std::vector<double> epsilons;
  std::vector<double> thresholds;  // N^eps ||B||_HS / N
  std::vector<double> exceedance;
  std::vector<double> t_grid;
  std::vector<double> t_exceedance;  // P(|S| >= t)
  std::vector<double> shape;         // min(N t / ||B||_HS, sqrt(N t / ||B||))
  double hs_norm = 0.0;
  double op_norm = 0.0;
  double variance = 0.0;  // empirical Var(S)
  // Least squares log P ~ intercept - rate * shape over grid points with
  // nonzero counts.
  double fit_rate = 0.0;
  double fit_intercept = 0.0;
  double fit_r2 = 0.0;
  int trials = 0;
};

// S = x^T B x - tr(B)/N. An empty t_grid selects (0.5, 1, ..., 6) * ||B||_HS / N.
QuadraticTailReport hw_quadratic_test(const ColumnSampler& sampler, const Eigen::MatrixXd& B, int N, int trials,
                                      std::uint64_t seed, std::vector<double> epsilons = {0.05, 0.1, 0.2},
                                      std::vector<double> t_grid = {});

struct ThinShellReport {
  double variance = 0.0;  // Var(||q||^2 / N)
  double constant = 0.0;  // variance * N^2 / M
  double mean_norm_sq = 0.0;
  int trials = 0;
};

ThinShellReport thin_shell(const ColumnSampler& sampler, int N, int trials, std::uint64_t seed);

struct RademacherCltReport {
  double D2 = 0.0;               // 2 N sum_{k != l} x_k^2 x_l^2 G_kl^2
  double b_sq = 0.0;             // b_1^2 + b_2^2 used for normalization
  double empirical_var = 0.0;    // variance of Q_1 over sign draws
  double predicted_var = 0.0;    // D2 / b_sq
  double ks = 0.0;               // Q_1 / sqrt(b_sq) against N(0, D2 / b_sq)
  std::vector<double> normalized;
};

// Q_1 = sqrt(N) sum_{k != l} delta_k delta_l x_k x_l G_kl with fresh
// Rademacher signs per trial. b_sq <= 0 selects b_sq = D2.
RademacherCltReport rademacher_quadratic_clt(const Eigen::VectorXd& x_row, const Eigen::MatrixXd& G, int trials,
                                             std::uint64_t seed, double b_sq = 0.0);

// Row i of X and the resolvent (X^{[i]*} X^{[i]} - z)^{-1} of X with row i
// removed, at real z outside the spectrum.
struct RowResolvent {
  Eigen::VectorXd x_row;
  Eigen::MatrixXd G;
};
RowResolvent row_removed_resolvent(const Eigen::MatrixXd& X, int row, double z);

struct ScalingFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_se = 0.0;
  double ci_low = 0.0;  // 95% Student-t interval
  double ci_high = 0.0;
  int points = 0;
};

// Least squares slope of log(value) against log(N). Needs >= 3 points and
// positive values.
ScalingFit scaling_exponent(std::span<const int> Ns, std::span<const double> values);

double median(std::vector<double> values);
double quantile(std::vector<double> values, double p);

struct MeanSe {
  double mean = 0.0;
  double se = 0.0;
};
MeanSe mean_se(std::span<const double> values);

}  // namespace lcrm
