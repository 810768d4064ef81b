#include "lcrm/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>

#include <boost/math/distributions/students_t.hpp>

#include "lcrm/rng.hpp"

namespace lcrm {

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

RigidityProfile rigidity_profile(std::span<const double> eigenvalues, std::span<const double> gamma, int N) {
  const std::size_t K = std::min(eigenvalues.size(), gamma.size());
  if (K == 0 || N < 1) throw std::invalid_argument("rigidity_profile: empty input");
  RigidityProfile out;
  out.deviation.resize(K);
  out.budget.resize(K);
  out.ratio.resize(K);
  const double scale = std::pow(static_cast<double>(N), -2.0 / 3.0);
  for (std::size_t j = 1; j <= K; ++j) {
    const double dev = std::abs(eigenvalues[j - 1] - gamma[j - 1]);
    const double b = scale * std::pow(static_cast<double>(std::min(j, K + 1 - j)), -1.0 / 3.0);
    out.deviation[j - 1] = dev;
    out.budget[j - 1] = b;
    out.ratio[j - 1] = dev / b;
    if (out.ratio[j - 1] > out.max_ratio || j == 1) {
      out.max_ratio = out.ratio[j - 1];
      out.argmax = static_cast<int>(j);
    }
  }
  return out;
}

RigidityProfile rigidity_profile(const SpectralSample& sample, const MpModel& model) {
  if (!model.M() || !model.N()) throw std::invalid_argument("rigidity_profile: model needs M and N");
  const auto gamma = classical_locations(*model.M(), *model.N());
  return rigidity_profile(sample.eigenvalues, gamma, *model.N());
}

double edge_rescale(double lambda1, int M, int N) {
  if (M < 1 || N < 1) throw std::invalid_argument("edge_rescale: M, N must be >= 1");
  const double sm = std::sqrt(static_cast<double>(M)), sn = std::sqrt(static_cast<double>(N));
  const double center = (sm + sn) * (sm + sn);
  const double scale = (sm + sn) * std::cbrt(1.0 / sm + 1.0 / sn);
  return (static_cast<double>(N) * lambda1 - center) / scale;
}

double ks_distance(std::span<const double> samples, const std::function<double(double)>& cdf) {
  if (samples.empty()) throw std::invalid_argument("ks_distance: no samples");
  std::vector<double> s(samples.begin(), samples.end());
  std::sort(s.begin(), s.end());
  const double n = static_cast<double>(s.size());
  double d = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double F = cdf(s[i]);
    d = std::max({d, static_cast<double>(i + 1) / n - F, F - static_cast<double>(i) / n});
  }
  return std::clamp(d, 0.0, 1.0);
}

SpikePrediction spike_prediction_from_moments(double d, double y, int N, double kurtosis, double mixed_moment,
                                              double mixed_se, double kurtosis_se) {
  SpikePrediction p;
  p.d = d;
  p.theta = theta(d, y);
  p.kurtosis = kurtosis;
  p.kurtosis_se = kurtosis_se;
  p.mixed_moment = mixed_moment;
  p.mixed_se = mixed_se;
  const double gap = d * d - y;
  const double a_coef = (d + 1.0) * std::sqrt(static_cast<double>(N)) * std::sqrt(gap) / (d * d * d);
  p.a = a_coef * mixed_moment;
  p.a_se = std::abs(a_coef) * mixed_se;
  const double lead = 2.0 * (1.0 + 1.0 / d) * (1.0 + 1.0 / d);
  const double b2 = lead + gap * (d + 1.0) * (d + 1.0) / (d * d * d * d) * (kurtosis - 3.0);
  if (!(b2 > 0.0)) throw std::domain_error("spike_prediction: b^2 = " + std::to_string(b2) + " is not positive");
  p.b = std::sqrt(b2);
  return p;
}

SpikePrediction spike_prediction(double d, double y, int N, const ColumnSampler& sampler, std::int64_t pilot,
                                 std::uint64_t seed, int coordinate) {
  if (pilot < kMinSpikePilot) throw std::invalid_argument("spike_prediction: pilot must be >= 10000 columns");
  if (!(d > std::sqrt(y))) throw DomainError("spike_prediction: d must exceed sqrt(y)");
  const int M = sampler.dimension();
  if (coordinate < 0 || coordinate >= M) throw std::invalid_argument("spike_prediction: coordinate out of range");
  // Welford accumulators for q_i^4 and q_i^2 sum_{u != i}(q_u^2 - 1).
  double k_mean = 0.0, k_m2 = 0.0, x_mean = 0.0, x_m2 = 0.0;
  Eigen::VectorXd q(M);
  for (std::int64_t c = 0; c < pilot; ++c) {
    Rng rng = make_rng(seed, stream::pilot, static_cast<std::uint64_t>(c));
    sampler.sample(rng, std::span<double>(q.data(), static_cast<std::size_t>(M)));
    const double qi2 = q[coordinate] * q[coordinate];
    const double rest = q.squaredNorm() - qi2 - static_cast<double>(M - 1);
    const double kv = qi2 * qi2, xv = qi2 * rest;
    const double n = static_cast<double>(c + 1);
    double delta = kv - k_mean;
    k_mean += delta / n;
    k_m2 += delta * (kv - k_mean);
    delta = xv - x_mean;
    x_mean += delta / n;
    x_m2 += delta * (xv - x_mean);
  }
  const double n = static_cast<double>(pilot);
  const double k_se = std::sqrt(k_m2 / (n - 1.0) / n);
  const double x_se = std::sqrt(x_m2 / (n - 1.0) / n);
  // Summing N i.i.d. columns of scale 1/sqrt(N): the expectation is E[.]/N.
  const double invN = 1.0 / static_cast<double>(N);
  auto p = spike_prediction_from_moments(d, y, N, k_mean, x_mean * invN, x_se * invN, k_se);
  p.pilot = pilot;
  return p;
}

double phi_statistic(double lambda_obs, const SpikePrediction& pred, double y, int N) {
  const double phi = (lambda_obs - pred.theta) * std::sqrt(static_cast<double>(N) / (pred.d * pred.d - y));
  return (phi - pred.a) / pred.b;
}

LinearTailReport hw_linear_test(const ColumnSampler& sampler, const Eigen::VectorXd& A, int N, int trials,
                                std::uint64_t seed, std::vector<double> epsilons) {
  const int M = sampler.dimension();
  if (A.size() != M) throw std::invalid_argument("hw_linear_test: A has the wrong length");
  if (trials < 1 || N < 1) throw std::invalid_argument("hw_linear_test: trials and N must be >= 1");
  LinearTailReport r;
  r.epsilons = std::move(epsilons);
  r.trials = trials;
  const double sqrtN = std::sqrt(static_cast<double>(N));
  for (double e : r.epsilons) r.thresholds.push_back(std::pow(static_cast<double>(N), e) * A.norm() / sqrtN);
  std::vector<std::int64_t> hits(r.epsilons.size(), 0);
  Eigen::VectorXd q(M);
  for (int t = 0; t < trials; ++t) {
    Rng rng = make_rng(seed, stream::trial, static_cast<std::uint64_t>(t));
    sampler.sample(rng, std::span<double>(q.data(), static_cast<std::size_t>(M)));
    const double s = std::abs(q.dot(A)) / sqrtN;
    for (std::size_t e = 0; e < hits.size(); ++e) hits[e] += s > r.thresholds[e];
  }
  for (auto h : hits) r.exceedance.push_back(static_cast<double>(h) / trials);
  return r;
}

QuadraticTailReport hw_quadratic_test(const ColumnSampler& sampler, const Eigen::MatrixXd& B, int N, int trials,
                                      std::uint64_t seed, std::vector<double> epsilons, std::vector<double> t_grid) {
  const int M = sampler.dimension();
  if (B.rows() != M || B.cols() != M) throw std::invalid_argument("hw_quadratic_test: B must be M x M");
  if (trials < 1 || N < 1) throw std::invalid_argument("hw_quadratic_test: trials and N must be >= 1");
  QuadraticTailReport r;
  r.trials = trials;
  r.epsilons = std::move(epsilons);
  r.hs_norm = B.norm();
  r.op_norm = M > 0 ? Eigen::BDCSVD<Eigen::MatrixXd>(B).singularValues()[0] : 0.0;
  const double Nd = static_cast<double>(N);
  for (double e : r.epsilons) r.thresholds.push_back(std::pow(Nd, e) * r.hs_norm / Nd);
  if (t_grid.empty()) {
    for (int k = 1; k <= 12; ++k) t_grid.push_back(0.5 * k * r.hs_norm / Nd);
  }
  r.t_grid = std::move(t_grid);
  for (double t : r.t_grid) {
    r.shape.push_back(r.hs_norm > 0.0 ? std::min(Nd * t / r.hs_norm, std::sqrt(Nd * t / r.op_norm)) : 0.0);
  }

  const Eigen::MatrixXd Bs = 0.5 * (B + B.transpose());
  const double trace = B.trace();
  std::vector<double> stat(static_cast<std::size_t>(trials));
  Eigen::VectorXd q(M);
  for (int t = 0; t < trials; ++t) {
    Rng rng = make_rng(seed, stream::trial, static_cast<std::uint64_t>(t));
    sampler.sample(rng, std::span<double>(q.data(), static_cast<std::size_t>(M)));
    stat[static_cast<std::size_t>(t)] = (q.dot(Bs * q) - trace) / Nd;
  }
  const auto ms = mean_se(stat);
  double ss = 0.0;
  for (double s : stat) ss += (s - ms.mean) * (s - ms.mean);
  r.variance = trials > 1 ? ss / (trials - 1) : 0.0;

  auto fraction = [&](double thr, bool inclusive) {
    std::int64_t c = 0;
    for (double s : stat) c += inclusive ? std::abs(s) >= thr : std::abs(s) > thr;
    return static_cast<double>(c) / trials;
  };
  for (double thr : r.thresholds) r.exceedance.push_back(fraction(thr, false));
  for (double t : r.t_grid) r.t_exceedance.push_back(fraction(t, true));

  std::vector<double> xs, ys;
  for (std::size_t k = 0; k < r.t_grid.size(); ++k) {
    if (r.t_exceedance[k] > 0.0) {
      xs.push_back(r.shape[k]);
      ys.push_back(std::log(r.t_exceedance[k]));
    }
  }
  if (xs.size() >= 2) {
    const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / xs.size();
    const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / ys.size();
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t k = 0; k < xs.size(); ++k) {
      sxx += (xs[k] - mx) * (xs[k] - mx);
      sxy += (xs[k] - mx) * (ys[k] - my);
      syy += (ys[k] - my) * (ys[k] - my);
    }
    if (sxx > 0.0) {
      const double slope = sxy / sxx;
      r.fit_rate = -slope;
      r.fit_intercept = my - slope * mx;
      r.fit_r2 = syy > 0.0 ? sxy * sxy / (sxx * syy) : 1.0;
    }
  }
  return r;
}

ThinShellReport thin_shell(const ColumnSampler& sampler, int N, int trials, std::uint64_t seed) {
  if (trials < 2 || N < 1) throw std::invalid_argument("thin_shell: need >= 2 trials and N >= 1");
  const int M = sampler.dimension();
  std::vector<double> v(static_cast<std::size_t>(trials));
  Eigen::VectorXd q(M);
  for (int t = 0; t < trials; ++t) {
    Rng rng = make_rng(seed, stream::trial, static_cast<std::uint64_t>(t));
    sampler.sample(rng, std::span<double>(q.data(), static_cast<std::size_t>(M)));
    v[static_cast<std::size_t>(t)] = q.squaredNorm() / N;
  }
  ThinShellReport r;
  r.trials = trials;
  r.mean_norm_sq = std::accumulate(v.begin(), v.end(), 0.0) / trials;
  double ss = 0.0;
  for (double x : v) ss += (x - r.mean_norm_sq) * (x - r.mean_norm_sq);
  r.variance = ss / (trials - 1);
  r.constant = r.variance * static_cast<double>(N) * N / M;
  return r;
}

RademacherCltReport rademacher_quadratic_clt(const Eigen::VectorXd& x_row, const Eigen::MatrixXd& G, int trials,
                                             std::uint64_t seed, double b_sq) {
  const Eigen::Index n = x_row.size();
  if (G.rows() != n || G.cols() != n) throw std::invalid_argument("rademacher_quadratic_clt: shape mismatch");
  if (trials < 2) throw std::invalid_argument("rademacher_quadratic_clt: need >= 2 trials");
  const double Nd = static_cast<double>(n);
  // A_kl = x_k x_l G_kl off the diagonal; the diagonal cancels since delta^2 = 1.
  Eigen::MatrixXd A = x_row.asDiagonal() * (0.5 * (G + G.transpose())) * x_row.asDiagonal();
  A.diagonal().setZero();
  RademacherCltReport r;
  r.D2 = 2.0 * Nd * A.squaredNorm();
  r.b_sq = b_sq > 0.0 ? b_sq : r.D2;
  r.predicted_var = r.D2 / r.b_sq;
  r.normalized.resize(static_cast<std::size_t>(trials));
  Eigen::VectorXd delta(n);
  const double norm = std::sqrt(Nd / r.b_sq);
  for (int t = 0; t < trials; ++t) {
    Rng rng = make_rng(seed, stream::signs, static_cast<std::uint64_t>(t));
    for (Eigen::Index k = 0; k < n; ++k) delta[k] = (rng() >> 63) ? 1.0 : -1.0;
    r.normalized[static_cast<std::size_t>(t)] = norm * delta.dot(A * delta);
  }
  const auto ms = mean_se(r.normalized);
  double ss = 0.0;
  for (double v : r.normalized) ss += (v - ms.mean) * (v - ms.mean);
  r.empirical_var = ss / (trials - 1) * r.b_sq;  // variance of Q_1 itself
  const double sd = std::sqrt(r.predicted_var);
  r.ks = sd > 0.0 ? ks_distance(r.normalized, [sd](double s) { return normal_cdf(s / sd); })
                  : ks_distance(r.normalized, [](double s) { return s < 0.0 ? 0.0 : 1.0; });
  return r;
}

RowResolvent row_removed_resolvent(const Eigen::MatrixXd& X, int row, double z) {
  if (row < 0 || row >= X.rows()) throw std::invalid_argument("row_removed_resolvent: row out of range");
  const Eigen::Index M = X.rows(), N = X.cols();
  Eigen::MatrixXd Xr(M - 1, N);
  Xr.topRows(row) = X.topRows(row);
  Xr.bottomRows(M - 1 - row) = X.bottomRows(M - 1 - row);
  Eigen::MatrixXd K = -assemble_H(Xr.transpose());  // z - X^* X once z is added
  K.diagonal().array() += z;
  Eigen::LLT<Eigen::MatrixXd> llt(K);
  if (llt.info() != Eigen::Success) throw DomainError("row_removed_resolvent: z is not above the spectrum");
  RowResolvent out;
  out.x_row = X.row(row).transpose();
  out.G = -llt.solve(Eigen::MatrixXd::Identity(N, N));
  return out;
}

ScalingFit scaling_exponent(std::span<const int> Ns, std::span<const double> values) {
  if (Ns.size() != values.size()) throw std::invalid_argument("scaling_exponent: size mismatch");
  if (Ns.size() < 3) throw std::invalid_argument("scaling_exponent: need at least 3 values of N");
  const std::size_t n = Ns.size();
  std::vector<double> x(n), y(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (Ns[i] < 1 || !(values[i] > 0.0)) throw std::invalid_argument("scaling_exponent: N and values must be positive");
    x[i] = std::log(static_cast<double>(Ns[i]));
    y[i] = std::log(values[i]);
  }
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (!(sxx > 0.0)) throw std::invalid_argument("scaling_exponent: need distinct N");
  ScalingFit f;
  f.points = static_cast<int>(n);
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double rss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double e = y[i] - f.intercept - f.slope * x[i];
    rss += e * e;
  }
  f.slope_se = std::sqrt(rss / static_cast<double>(n - 2) / sxx);
  const boost::math::students_t dist(static_cast<double>(n - 2));
  const double tq = boost::math::quantile(boost::math::complement(dist, 0.025));
  f.ci_low = f.slope - tq * f.slope_se;
  f.ci_high = f.slope + tq * f.slope_se;
  return f;
}

double quantile(std::vector<double> values, double p) {
  if (values.empty()) throw std::invalid_argument("quantile: empty input");
  std::sort(values.begin(), values.end());
  const double pos = std::clamp(p, 0.0, 1.0) * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

double median(std::vector<double> values) { return quantile(std::move(values), 0.5); }

MeanSe mean_se(std::span<const double> values) {
  MeanSe r;
  if (values.empty()) return r;
  const double n = static_cast<double>(values.size());
  r.mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - r.mean) * (v - r.mean);
    r.se = std::sqrt(ss / (n - 1.0) / n);
  }
  return r;
}

}  // namespace lcrm
