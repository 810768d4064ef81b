#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "lcrm/ensemble.hpp"
#include "lcrm/mp_model.hpp"

namespace lcrm {

// (1/n) sum_j 1/(lambda_j - z) over the eigenvalues carried by the sample.
cplx empirical_stieltjes(const SpectralSample& sample, cplx z);

// m_{2N}(z) from a spectrum of H (length M): the N - min(M,N) zero
// eigenvalues of X^*X each contribute -1/z.
cplx m2N_from_h(const SpectralSample& h_sample, cplx z);

// Finite E x eta grid inside
//   D(eps) = { 1_{y<1} lambda_-/5 <= E <= 5 lambda_+,  N^{-1+eps} <= eta <= 10(1+y) }.
// E is uniform, eta log-uniform.
struct SpectralDomainGrid {
  double epsilon = 0.1;
  int N = 0;
  std::vector<cplx> points;

  static SpectralDomainGrid make(const MpModel& model, int N, double epsilon, int n_energy, int n_eta);
  static bool contains(const MpModel& model, int N, double epsilon, cplx z);
};

struct GreenPoint {
  cplx z;
  cplx m2N;
  cplx m2;
  double residual = 0.0;  // |m2N - m2|
  double budget = 0.0;    // 1/(N eta)
  double entrywise_max = std::numeric_limits<double>::quiet_NaN();
  double entrywise_budget = std::numeric_limits<double>::quiet_NaN();

  double ratio() const { return residual / budget; }
  double entrywise_ratio() const { return entrywise_max / entrywise_budget; }
};

struct GreenProbe {
  std::vector<GreenPoint> points;
  std::vector<int> indices;  // column indices used for the entrywise check
};

// Averaged local law only.
GreenProbe local_law_scan(const SpectralSample& h_sample, const MpModel& model, const SpectralDomainGrid& grid);

// Averaged and entrywise local law. Entries of (X^*X - z)^{-1} come from the
// eigendecomposition of the smaller Gram matrix; `index_count` random column
// indices are probed, or all of them when N <= 128.
GreenProbe local_law_scan(const Eigen::MatrixXd& X, const MpModel& model, const SpectralDomainGrid& grid,
                          int index_count, std::uint64_t seed);

double refined_edge_budget(int N, double kappa, double eta);

struct RefinedResidual {
  double residual = 0.0;
  double refined_budget = 0.0;
  double ratio() const { return residual / refined_budget; }
};

// Residual at z = E + i eta, E >= lambda_+, against
//   1/(N(kappa + eta)) + 1/((N eta)^2 sqrt(kappa + eta)),  kappa = E - lambda_+.
RefinedResidual edge_refined_residual(const SpectralSample& h_sample, const MpModel& model, double E, double eta);

struct RegularityConstants {
  double c_V = 0.05;
  double C_V = 40.0;
};

struct RegularityReport {
  bool pass_i = false;
  bool pass_ii = false;
  bool pass_iii = false;
  // Normalized ratio Im m_V / profile over each region; the clause passes iff
  // the ratio stays within [1/C_V, C_V].
  double min_i = 0.0, max_i = 0.0;
  double min_ii = 0.0, max_ii = 0.0;
  double edge = 0.0;

  bool pass() const { return pass_i && pass_ii && pass_iii; }
};

// Square-root edge check on a grid of `resolution` x `resolution` points per
// region. `m_V` is the Stieltjes transform of V and `edge` = lambda_1(V).
RegularityReport eta_star_regularity(const std::function<cplx(cplx)>& m_V, double edge, double eta_star,
                                     const RegularityConstants& constants, int resolution = 40);
RegularityReport eta_star_regularity(const SpectralSample& h_sample, double eta_star,
                                     const RegularityConstants& constants, int resolution = 40);

struct EdgeGreenBounds {
  cplx z;
  double q_form = 0.0;        // |<x_1, (G_1^{(1)})^2 x_1>|
  double diag_dev = 0.0;      // max_i |[G_1^{(1)}]_ii - m_1|
  double offdiag_max = 0.0;   // max_{i != j} |[G_1^{(1)}]_ij|
  double sq_entry_max = 0.0;  // max_{ij} |[(G_1^{(1)})^2]_ij|
  double symmetry_defect = 0.0;
};

// G_1^{(1)} = (X^{(1)} X^{(1)*} - z)^{-1}, X^{(1)} = X without its first column.
EdgeGreenBounds edge_green_bounds(const Eigen::MatrixXd& X, cplx z);
// z = E + i N^{-2/3 - epsilon}.
EdgeGreenBounds edge_green_bounds(const Eigen::MatrixXd& X, double E, double epsilon);

struct ComparisonResult {
  double mean_a = 0.0, se_a = 0.0;
  double mean_b = 0.0, se_b = 0.0;
  double diff = 0.0, se_diff = 0.0;
};

// Monte Carlo estimates of E F(N eta0 Im m_{2N}(E + i eta0)) under two
// ensembles, from spectra of H.
ComparisonResult green_comparison_statistic(std::span<const SpectralSample> samples_a,
                                            std::span<const SpectralSample> samples_b, double E, double eta0,
                                            const std::function<double(double)>& F);

}  // namespace lcrm
