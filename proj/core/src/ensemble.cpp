#include "lcrm/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>

#include <Eigen/Eigenvalues>

#include "lcrm/rng.hpp"

namespace lcrm {

SpikeList::SpikeList(std::vector<double> d) : d_(std::move(d)) {
  if (d_.size() > kMaxSpikes) throw std::invalid_argument("SpikeList: at most 16 spikes");
  for (double v : d_) {
    if (!std::isfinite(v) || v <= -1.0) throw std::invalid_argument("SpikeList: spikes must be finite and > -1");
  }
  std::sort(d_.begin(), d_.end(), std::greater<>());
}

void SpikeList::require_supercritical(double y, double eps) const {
  for (double v : d_) {
    if (!(v >= std::sqrt(y) + eps))
      throw std::invalid_argument("SpikeList: spike " + std::to_string(v) + " below sqrt(y) + eps");
  }
}

void SpikeList::require_separated(int N, double eps) const {
  const double gap = std::pow(static_cast<double>(N), -0.5 + eps);
  for (std::size_t i = 1; i < d_.size(); ++i) {
    if (!(d_[i - 1] - d_[i] > gap))
      throw std::invalid_argument("SpikeList: spikes closer than N^{-1/2+eps}");
  }
}

Eigen::MatrixXd assemble_H(const Eigen::MatrixXd& X) {
  Eigen::MatrixXd H = Eigen::MatrixXd::Zero(X.rows(), X.rows());
  H.selfadjointView<Eigen::Lower>().rankUpdate(X);
  H = H.selfadjointView<Eigen::Lower>();
  return H;
}

namespace {

Eigen::MatrixXd apply_T(const Eigen::MatrixXd& X, const SpikeList& spikes) {
  if (spikes.size() > static_cast<std::size_t>(X.rows()))
    throw std::invalid_argument("assemble_spiked: more spikes than rows");
  Eigen::MatrixXd TX = X;
  for (std::size_t i = 0; i < spikes.size(); ++i) TX.row(static_cast<Eigen::Index>(i)) *= std::sqrt(1.0 + spikes.values()[i]);
  return TX;
}

// Solves (T - sigma I) x = b for symmetric tridiagonal T with partial pivoting
// (the LAPACK dgtsv elimination). Zero pivots are nudged to keep inverse
// iteration going.
Eigen::VectorXd tridiagonal_solve(const Eigen::VectorXd& diag, const Eigen::VectorXd& off, double sigma,
                                  Eigen::VectorXd b) {
  const Eigen::Index n = diag.size();
  Eigen::VectorXd d = diag.array() - sigma;
  Eigen::VectorXd dl = off, du = off;
  const double tiny = std::numeric_limits<double>::epsilon() * std::max(1.0, diag.cwiseAbs().maxCoeff());
  auto pivot = [&](Eigen::Index i) {
    if (d[i] == 0.0) d[i] = tiny;
  };
  for (Eigen::Index i = 0; i + 1 < n; ++i) {
    if (std::abs(d[i]) >= std::abs(dl[i])) {
      pivot(i);
      const double fact = dl[i] / d[i];
      d[i + 1] -= fact * du[i];
      b[i + 1] -= fact * b[i];
      dl[i] = 0.0;
    } else {
      const double fact = d[i] / dl[i];
      d[i] = dl[i];
      const double temp = d[i + 1];
      d[i + 1] = du[i] - fact * temp;
      if (i + 2 < n) {
        dl[i] = du[i + 1];
        du[i + 1] = -fact * dl[i];
      } else {
        dl[i] = 0.0;
      }
      du[i] = temp;
      const double tb = b[i];
      b[i] = b[i + 1];
      b[i + 1] = tb - fact * b[i + 1];
    }
  }
  pivot(n - 1);
  b[n - 1] /= d[n - 1];
  if (n > 1) {
    pivot(n - 2);
    b[n - 2] = (b[n - 2] - du[n - 2] * b[n - 1]) / d[n - 2];
  }
  for (Eigen::Index i = n - 3; i >= 0; --i) b[i] = (b[i] - du[i] * b[i + 1] - dl[i] * b[i + 2]) / d[i];
  return b;
}

}  // namespace

Eigen::MatrixXd assemble_spiked(const Eigen::MatrixXd& X, const SpikeList& spikes) {
  return assemble_H(apply_T(X, spikes));
}

SpectralSample spectrum(const Eigen::MatrixXd& A, const SpectrumOptions& opts) {
  if (A.rows() != A.cols()) throw std::invalid_argument("spectrum: matrix must be square");
  const Eigen::Index n = A.rows();
  SpectralSample out;
  if (n == 0) return out;
  if (!A.allFinite()) throw NumericalError("spectrum: non-finite matrix entry", opts.seed);

  Eigen::Tridiagonalization<Eigen::MatrixXd> tri(A);
  const Eigen::VectorXd diag = tri.diagonal();
  const Eigen::VectorXd off = tri.subDiagonal();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
  solver.computeFromTridiagonal(diag, off, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw NumericalError("spectrum: eigensolver did not converge", opts.seed);

  const Eigen::VectorXd& ev = solver.eigenvalues();  // ascending
  out.eigenvalues.assign(ev.data(), ev.data() + n);
  std::reverse(out.eigenvalues.begin(), out.eigenvalues.end());

  const double scale = std::max(std::abs(out.eigenvalues.front()), std::abs(out.eigenvalues.back()));
  if (opts.psd) {
    const double floor = -1e-10 * std::max(1.0, scale);
    for (double& v : out.eigenvalues) {
      if (v < 0.0) {
        if (v < floor) throw NumericalError("spectrum: negative eigenvalue " + std::to_string(v) + " in PSD matrix", opts.seed);
        v = 0.0;
        ++out.clamped;
      }
    }
  }

  if (opts.verify_pairs > 0) {
    Rng rng(substream_seed(opts.seed, stream::probe));
    std::uniform_int_distribution<Eigen::Index> pick(0, n - 1);
    std::normal_distribution<double> normal;
    const auto Q = tri.matrixQ();
    const double tol = 1e-9 * std::max(scale, std::numeric_limits<double>::min());
    const int checks = static_cast<int>(std::min<Eigen::Index>(opts.verify_pairs, n));
    for (int c = 0; c < checks; ++c) {
      const Eigen::Index k = pick(rng);
      const double lambda = ev[k];
      const double sigma = lambda + 1e-13 * std::max(scale, 1e-300);
      Eigen::VectorXd w(n);
      for (Eigen::Index i = 0; i < n; ++i) w[i] = normal(rng);
      for (int it = 0; it < 3; ++it) {
        w = tridiagonal_solve(diag, off, sigma, w);
        w.normalize();
      }
      const Eigen::VectorXd v = Q * w;
      const double residual = (A * v - lambda * v).norm();
      if (!(residual <= tol)) {
        throw NumericalError("spectrum: eigenpair residual " + std::to_string(residual) + " exceeds " +
                                 std::to_string(tol),
                             opts.seed);
      }
    }
  }
  return out;
}

SpectralSample companion_spectrum(const SpectralSample& sample, int N) {
  if (N < 0) throw std::invalid_argument("companion_spectrum: N must be >= 0");
  SpectralSample out;
  out.meta = sample.meta;
  out.clamped = sample.clamped;
  out.eigenvalues.assign(static_cast<std::size_t>(N), 0.0);
  const std::size_t keep = std::min(sample.eigenvalues.size(), static_cast<std::size_t>(N));
  std::copy_n(sample.eigenvalues.begin(), keep, out.eigenvalues.begin());
  return out;
}

SpectralSample h_spectrum(const Eigen::MatrixXd& X, const SpectrumOptions& opts) {
  const int M = static_cast<int>(X.rows());
  const int N = static_cast<int>(X.cols());
  SpectralSample s;
  if (M <= N) {
    s = spectrum(assemble_H(X), opts);
  } else {
    s = companion_spectrum(spectrum(assemble_H(X.transpose()), opts), M);
  }
  s.meta.M = M;
  s.meta.N = N;
  s.meta.seed = opts.seed;
  return s;
}

SpectralSample spiked_spectrum(const Eigen::MatrixXd& X, const SpikeList& spikes, const SpectrumOptions& opts) {
  SpectralSample s = h_spectrum(apply_T(X, spikes), opts);
  s.meta.spikes = spikes.values();
  return s;
}

}  // namespace lcrm
