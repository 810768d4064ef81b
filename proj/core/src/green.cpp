#include "lcrm/green.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include <Eigen/Eigenvalues>

#include "lcrm/rng.hpp"

namespace lcrm {

cplx empirical_stieltjes(const SpectralSample& sample, cplx z) {
  if (!(z.imag() > 0.0)) throw DomainError("empirical_stieltjes: requires Im z > 0");
  if (sample.eigenvalues.empty()) throw std::invalid_argument("empirical_stieltjes: empty sample");
  cplx sum = 0.0;
  for (double l : sample.eigenvalues) sum += 1.0 / (l - z);
  return sum / static_cast<double>(sample.eigenvalues.size());
}

cplx m2N_from_h(const SpectralSample& h_sample, cplx z) {
  if (!(z.imag() > 0.0)) throw DomainError("m2N_from_h: requires Im z > 0");
  const int M = h_sample.meta.M, N = h_sample.meta.N;
  if (M < 1 || N < 1 || static_cast<int>(h_sample.size()) != M)
    throw std::invalid_argument("m2N_from_h: sample must carry the M eigenvalues of H and meta.N");
  const int K = std::min(M, N);
  cplx sum = 0.0;
  for (int j = 0; j < K; ++j) sum += 1.0 / (h_sample.eigenvalues[j] - z);
  sum += static_cast<double>(N - K) * (-1.0 / z);
  return sum / static_cast<double>(N);
}

SpectralDomainGrid SpectralDomainGrid::make(const MpModel& model, int N, double epsilon, int n_energy, int n_eta) {
  if (N < 1 || n_energy < 1 || n_eta < 1 || !(epsilon > 0.0 && epsilon < 1.0))
    throw std::invalid_argument("SpectralDomainGrid: bad parameters");
  const double y = model.y();
  const double e_lo = y < 1.0 ? model.lambda_minus() / 5.0 : 0.0;
  const double e_hi = 5.0 * model.lambda_plus();
  const double eta_lo = std::pow(static_cast<double>(N), -1.0 + epsilon);
  const double eta_hi = 10.0 * (1.0 + y);
  SpectralDomainGrid grid;
  grid.epsilon = epsilon;
  grid.N = N;
  for (int a = 0; a < n_energy; ++a) {
    // Avoid E = 0 exactly for y > 1, where the atom of nu_{y,2} sits.
    double E = n_energy == 1 ? 0.5 * (e_lo + e_hi) : e_lo + (e_hi - e_lo) * a / (n_energy - 1);
    if (E == 0.0) E = 1e-3 * e_hi;
    for (int b = 0; b < n_eta; ++b) {
      const double frac = n_eta == 1 ? 0.0 : static_cast<double>(b) / (n_eta - 1);
      const double eta = std::exp(std::log(eta_lo) + frac * (std::log(eta_hi) - std::log(eta_lo)));
      grid.points.emplace_back(E, std::clamp(eta, eta_lo, eta_hi));
    }
  }
  return grid;
}

bool SpectralDomainGrid::contains(const MpModel& model, int N, double epsilon, cplx z) {
  const double y = model.y();
  const double e_lo = y < 1.0 ? model.lambda_minus() / 5.0 : 0.0;
  const double eta_lo = std::pow(static_cast<double>(N), -1.0 + epsilon);
  return z.real() >= e_lo && z.real() <= 5.0 * model.lambda_plus() && z.imag() >= eta_lo &&
         z.imag() <= 10.0 * (1.0 + y);
}

namespace {

GreenPoint averaged_point(const SpectralSample& h_sample, const MpModel& model, cplx z) {
  const int N = h_sample.meta.N;
  GreenPoint p;
  p.z = z;
  p.m2N = m2N_from_h(h_sample, z);
  p.m2 = stieltjes(z, model).m2;
  p.residual = std::abs(p.m2N - p.m2);
  p.budget = 1.0 / (N * z.imag());
  return p;
}

}  // namespace

GreenProbe local_law_scan(const SpectralSample& h_sample, const MpModel& model, const SpectralDomainGrid& grid) {
  GreenProbe probe;
  probe.points.reserve(grid.points.size());
  for (const cplx z : grid.points) probe.points.push_back(averaged_point(h_sample, model, z));
  return probe;
}

GreenProbe local_law_scan(const Eigen::MatrixXd& X, const MpModel& model, const SpectralDomainGrid& grid,
                          int index_count, std::uint64_t seed) {
  const int M = static_cast<int>(X.rows());
  const int N = static_cast<int>(X.cols());

  // Eigenpairs of X^*X restricted to the sampled rows: the nonzero part as
  // V_S (|S| x K) with eigenvalues lam, plus the projector onto the kernel.
  std::vector<int> S(N);
  std::iota(S.begin(), S.end(), 0);
  if (N > 128 && index_count < N) {
    Rng rng = make_rng(seed, stream::probe);
    std::shuffle(S.begin(), S.end(), rng);
    S.resize(static_cast<std::size_t>(std::max(1, index_count)));
    std::sort(S.begin(), S.end());
  }
  const int s = static_cast<int>(S.size());

  Eigen::MatrixXd VS;
  Eigen::VectorXd lam;
  Eigen::MatrixXd kernel_proj;  // (I - V V^T) on S x S
  SpectralSample h_sample;
  h_sample.meta.M = M;
  h_sample.meta.N = N;
  if (M < N) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(assemble_H(X));
    if (es.info() != Eigen::Success) throw NumericalError("local_law_scan: eigensolver failed", seed);
    const Eigen::VectorXd& ev = es.eigenvalues();
    const double cutoff = 1e-12 * std::max(1.0, ev.maxCoeff());
    std::vector<int> keep;
    for (int k = 0; k < M; ++k)
      if (ev[k] > cutoff) keep.push_back(k);
    Eigen::MatrixXd XS(M, s);
    for (int a = 0; a < s; ++a) XS.col(a) = X.col(S[a]);
    const Eigen::MatrixXd proj = XS.transpose() * es.eigenvectors();  // s x M
    VS.resize(s, static_cast<Eigen::Index>(keep.size()));
    lam.resize(static_cast<Eigen::Index>(keep.size()));
    for (std::size_t c = 0; c < keep.size(); ++c) {
      lam[c] = ev[keep[c]];
      VS.col(c) = proj.col(keep[c]) / std::sqrt(lam[c]);
    }
    kernel_proj = Eigen::MatrixXd::Identity(s, s) - VS * VS.transpose();
    h_sample.eigenvalues.assign(ev.data(), ev.data() + M);
  } else {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(assemble_H(X.transpose()));
    if (es.info() != Eigen::Success) throw NumericalError("local_law_scan: eigensolver failed", seed);
    lam = es.eigenvalues();
    VS.resize(s, N);
    for (int a = 0; a < s; ++a) VS.row(a) = es.eigenvectors().row(S[a]);
    kernel_proj = Eigen::MatrixXd::Zero(s, s);
    h_sample.eigenvalues.assign(lam.data(), lam.data() + N);
    h_sample.eigenvalues.resize(static_cast<std::size_t>(M), 0.0);
  }
  std::sort(h_sample.eigenvalues.begin(), h_sample.eigenvalues.end(), std::greater<>());
  for (double& v : h_sample.eigenvalues) v = std::max(v, 0.0);

  GreenProbe probe;
  probe.indices = S;
  probe.points.reserve(grid.points.size());
  const Eigen::Index K = lam.size();
  Eigen::VectorXd wr(K), wi(K);
  for (const cplx z : grid.points) {
    GreenPoint p = averaged_point(h_sample, model, z);
    for (Eigen::Index k = 0; k < K; ++k) {
      const cplx w = 1.0 / (lam[k] - z);
      wr[k] = w.real();
      wi[k] = w.imag();
    }
    const Eigen::MatrixXd Gr = VS * wr.asDiagonal() * VS.transpose();
    const Eigen::MatrixXd Gi = VS * wi.asDiagonal() * VS.transpose();
    const cplx zinv = -1.0 / z;
    double worst = 0.0;
    for (int a = 0; a < s; ++a) {
      for (int b = 0; b < s; ++b) {
        cplx g(Gr(a, b), Gi(a, b));
        g += zinv * kernel_proj(a, b);
        if (a == b) g -= p.m2;
        worst = std::max(worst, std::abs(g));
      }
    }
    const double neta = N * z.imag();
    p.entrywise_max = worst;
    p.entrywise_budget = std::sqrt(std::max(p.m2.imag(), 0.0) / neta) + 1.0 / neta;
    probe.points.push_back(p);
  }
  return probe;
}

double refined_edge_budget(int N, double kappa, double eta) {
  const double ke = kappa + eta;
  const double neta = N * eta;
  return 1.0 / (N * ke) + 1.0 / (neta * neta * std::sqrt(ke));
}

RefinedResidual edge_refined_residual(const SpectralSample& h_sample, const MpModel& model, double E, double eta) {
  if (E < model.lambda_plus()) throw DomainError("edge_refined_residual: E must be >= lambda_+");
  if (!(eta > 0.0)) throw DomainError("edge_refined_residual: eta must be positive");
  const cplx z(E, eta);
  RefinedResidual r;
  r.residual = std::abs(m2N_from_h(h_sample, z) - stieltjes(z, model).m2);
  r.refined_budget = refined_edge_budget(h_sample.meta.N, E - model.lambda_plus(), eta);
  return r;
}

RegularityReport eta_star_regularity(const std::function<cplx(cplx)>& m_V, double edge, double eta_star,
                                     const RegularityConstants& c, int resolution) {
  if (!(eta_star > 0.0) || resolution < 2) throw std::invalid_argument("eta_star_regularity: bad parameters");
  RegularityReport rep;
  rep.edge = edge;
  const double eta_hi = 10.0;
  auto log_interp = [](double lo, double hi, double f) { return std::exp(std::log(lo) + f * (std::log(hi) - std::log(lo))); };

  rep.min_i = rep.min_ii = std::numeric_limits<double>::infinity();
  rep.max_i = rep.max_ii = 0.0;
  for (int a = 0; a < resolution; ++a) {
    const double fa = static_cast<double>(a) / (resolution - 1);
    // (i) below the edge: E in [edge - c_V, edge].
    {
      const double E = edge - c.c_V * (1.0 - fa);
      const double kappa = std::abs(edge - E);
      const double eta_lo = eta_star + std::sqrt(eta_star * kappa);
      if (eta_lo <= eta_hi) {
        for (int b = 0; b < resolution; ++b) {
          const double eta = log_interp(eta_lo, eta_hi, static_cast<double>(b) / (resolution - 1));
          const double ratio = m_V(cplx(E, eta)).imag() / std::sqrt(kappa + eta);
          rep.min_i = std::min(rep.min_i, ratio);
          rep.max_i = std::max(rep.max_i, ratio);
        }
      }
    }
    // (ii) above the edge: E in [edge, edge + c_V].
    {
      const double E = edge + c.c_V * fa;
      const double kappa = E - edge;
      for (int b = 0; b < resolution; ++b) {
        const double eta = log_interp(eta_star, eta_hi, static_cast<double>(b) / (resolution - 1));
        const double ratio = m_V(cplx(E, eta)).imag() / (eta / std::sqrt(kappa + eta));
        rep.min_ii = std::min(rep.min_ii, ratio);
        rep.max_ii = std::max(rep.max_ii, ratio);
      }
    }
  }
  rep.pass_i = rep.min_i >= 1.0 / c.C_V && rep.max_i <= c.C_V;
  rep.pass_ii = rep.min_ii >= 1.0 / c.C_V && rep.max_ii <= c.C_V;
  rep.pass_iii = 2.0 * c.c_V <= edge && edge <= c.C_V / 2.0;
  return rep;
}

RegularityReport eta_star_regularity(const SpectralSample& h_sample, double eta_star, const RegularityConstants& c,
                                     int resolution) {
  if (h_sample.eigenvalues.empty()) throw std::invalid_argument("eta_star_regularity: empty sample");
  auto m_V = [&](cplx z) { return empirical_stieltjes(h_sample, z); };
  return eta_star_regularity(m_V, h_sample.largest(), eta_star, c, resolution);
}

EdgeGreenBounds edge_green_bounds(const Eigen::MatrixXd& X, cplx z) {
  if (X.cols() < 2) throw std::invalid_argument("edge_green_bounds: need at least two columns");
  if (!(z.imag() > 0.0)) throw DomainError("edge_green_bounds: requires Im z > 0");
  const Eigen::Index M = X.rows(), N = X.cols();
  const Eigen::MatrixXd minor = X.rightCols(N - 1);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(assemble_H(minor));
  if (es.info() != Eigen::Success) throw NumericalError("edge_green_bounds: eigensolver failed", 0);
  const Eigen::MatrixXd& U = es.eigenvectors();
  const Eigen::VectorXd& lam = es.eigenvalues();

  Eigen::VectorXd g_re(M), g_im(M), g2_re(M), g2_im(M);
  for (Eigen::Index k = 0; k < M; ++k) {
    const cplx w = 1.0 / (lam[k] - z);
    const cplx w2 = w * w;
    g_re[k] = w.real();
    g_im[k] = w.imag();
    g2_re[k] = w2.real();
    g2_im[k] = w2.imag();
  }
  const Eigen::MatrixXd Gr = U * g_re.asDiagonal() * U.transpose();
  const Eigen::MatrixXd Gi = U * g_im.asDiagonal() * U.transpose();
  const Eigen::MatrixXd G2r = U * g2_re.asDiagonal() * U.transpose();
  const Eigen::MatrixXd G2i = U * g2_im.asDiagonal() * U.transpose();

  const MpModel model(static_cast<int>(M), static_cast<int>(N));
  const cplx m1 = stieltjes(z, model).m1;

  EdgeGreenBounds out;
  out.z = z;
  const Eigen::VectorXd coords = U.transpose() * X.col(0);
  cplx q = 0.0;
  for (Eigen::Index k = 0; k < M; ++k) q += coords[k] * coords[k] * cplx(g2_re[k], g2_im[k]);
  out.q_form = std::abs(q);
  for (Eigen::Index i = 0; i < M; ++i) {
    for (Eigen::Index j = 0; j < M; ++j) {
      const cplx g(Gr(i, j), Gi(i, j));
      if (i == j) out.diag_dev = std::max(out.diag_dev, std::abs(g - m1));
      else out.offdiag_max = std::max(out.offdiag_max, std::abs(g));
      out.sq_entry_max = std::max(out.sq_entry_max, std::abs(cplx(G2r(i, j), G2i(i, j))));
      out.symmetry_defect = std::max(out.symmetry_defect, std::abs(g - cplx(Gr(j, i), Gi(j, i))));
    }
  }
  return out;
}

EdgeGreenBounds edge_green_bounds(const Eigen::MatrixXd& X, double E, double epsilon) {
  const double eta0 = std::pow(static_cast<double>(X.cols()), -2.0 / 3.0 - epsilon);
  return edge_green_bounds(X, cplx(E, eta0));
}

namespace {

void mean_se(const std::vector<double>& v, double& mean, double& se) {
  const double n = static_cast<double>(v.size());
  mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  se = v.size() > 1 ? std::sqrt(ss / (n - 1.0) / n) : 0.0;
}

}  // namespace

ComparisonResult green_comparison_statistic(std::span<const SpectralSample> samples_a,
                                            std::span<const SpectralSample> samples_b, double E, double eta0,
                                            const std::function<double(double)>& F) {
  if (samples_a.empty() || samples_b.empty()) throw std::invalid_argument("green_comparison_statistic: empty ensemble");
  const cplx z(E, eta0);
  auto evaluate = [&](std::span<const SpectralSample> samples) {
    std::vector<double> v;
    v.reserve(samples.size());
    for (const auto& s : samples) v.push_back(F(s.meta.N * eta0 * m2N_from_h(s, z).imag()));
    return v;
  };
  ComparisonResult r;
  mean_se(evaluate(samples_a), r.mean_a, r.se_a);
  mean_se(evaluate(samples_b), r.mean_b, r.se_b);
  r.diff = r.mean_a - r.mean_b;
  r.se_diff = std::sqrt(r.se_a * r.se_a + r.se_b * r.se_b);
  return r;
}

}  // namespace lcrm
