#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace lcrm {

// Population spikes d_1 >= ... >= d_r on the first r coordinates.
class SpikeList {
 public:
  static constexpr std::size_t kMaxSpikes = 16;

  SpikeList() = default;
  // Sorts descending; rejects r > 16 and d_i <= -1.
  explicit SpikeList(std::vector<double> d);

  const std::vector<double>& values() const { return d_; }
  std::size_t size() const { return d_.size(); }
  bool empty() const { return d_.empty(); }

  // Outlier regime: every d_i >= sqrt(y) + eps.
  void require_supercritical(double y, double eps) const;
  // Pairwise gaps above N^{-1/2 + eps}, needed for fluctuation experiments.
  void require_separated(int N, double eps) const;

 private:
  std::vector<double> d_;
};

struct SampleMeta {
  int M = 0;
  int N = 0;
  double t = 0.0;
  std::vector<double> spikes;
  std::uint64_t seed = 0;
};

// Eigenvalues in descending order.
struct SpectralSample {
  std::vector<double> eigenvalues;
  SampleMeta meta;
  int clamped = 0;  // tiny negatives set to zero

  std::size_t size() const { return eigenvalues.size(); }
  double largest() const { return eigenvalues.front(); }
};

class NumericalError : public std::runtime_error {
 public:
  NumericalError(const std::string& what, std::uint64_t seed)
      : std::runtime_error(what + " (seed " + std::to_string(seed) + ")"), seed_(seed) {}
  std::uint64_t seed() const { return seed_; }

 private:
  std::uint64_t seed_;
};

// XX^*, symmetrized.
Eigen::MatrixXd assemble_H(const Eigen::MatrixXd& X);

// T X X^* T^* with T = diag(sqrt(1 + d_1), ..., sqrt(1 + d_r), 1, ...).
Eigen::MatrixXd assemble_spiked(const Eigen::MatrixXd& X, const SpikeList& spikes);

struct SpectrumOptions {
  // Eigenpairs checked for ||Av - lambda v|| <= 1e-9 ||A||; 0 disables.
  int verify_pairs = 5;
  // Treat A as positive semidefinite: clamp values in (-1e-10 scale, 0).
  bool psd = true;
  std::uint64_t seed = 0;  // reported on failure and used to pick verified pairs
};

SpectralSample spectrum(const Eigen::MatrixXd& A, const SpectrumOptions& opts = {});

// Same nonzero eigenvalues, zero padded (or truncated) to length N.
SpectralSample companion_spectrum(const SpectralSample& sample, int N);

// Spectrum of H = XX^* (length M) computed from the smaller Gram matrix.
SpectralSample h_spectrum(const Eigen::MatrixXd& X, const SpectrumOptions& opts = {});

// Largest eigenvalues first; full spectrum of Q.
SpectralSample spiked_spectrum(const Eigen::MatrixXd& X, const SpikeList& spikes,
                               const SpectrumOptions& opts = {});

}  // namespace lcrm
