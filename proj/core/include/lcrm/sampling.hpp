#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <variant>

#include <Eigen/Dense>

#include "lcrm/rng.hpp"

namespace lcrm {

// Column laws. Every kind is unconditional (invariant under coordinatewise sign
// flips) and, after the isotropy scale is applied, has identity covariance.
struct Gaussian {};
struct LaplaceProduct {};
struct LpBall {
  double p = 1.0;
};

// Unit l_p ball, p in [1, inf]; p = inf is the cube.
struct BodySpec {
  double p = 2.0;
};

struct HitAndRun {
  BodySpec body;
  int burn_in = 0;   // 0 selects 50 * M
  int thinning = 0;  // 0 selects 10 * M
  int min_burn_in_factor = 10;
};

using SamplerKind = std::variant<Gaussian, LaplaceProduct, LpBall, HitAndRun>;

struct SamplerSpec {
  SamplerKind kind = Gaussian{};
  int dimension = 1;
};

std::string kind_name(const SamplerSpec& spec);
// Throws std::invalid_argument on bad parameters (p < 1, dimension < 1,
// insufficient burn-in, ...).
void validate(const SamplerSpec& spec);
int effective_burn_in(const HitAndRun& h, int M);
int effective_thinning(const HitAndRun& h, int M);

// Isotropy constants keyed by (kind, p, M). Plain-text persistence, one record
// per line:  kind=lp_ball p=1 M=256 scale=1.2345 pilot=78125
class CalibrationCache {
 public:
  struct Entry {
    double scale = 1.0;
    std::int64_t pilot_size = 0;
  };

  std::optional<Entry> find(const std::string& key) const;
  void insert(const std::string& key, Entry entry);
  std::size_t size() const;

  void load(const std::filesystem::path& path);
  void save(const std::filesystem::path& path) const;

  static CalibrationCache& global();

 private:
  mutable std::mutex mutex_;
  std::map<std::string, Entry> entries_;
};

// Empty for kinds that need no calibration.
std::optional<std::string> calibration_key(const SamplerSpec& spec);

// Multiplier making E[(s u_1)^2] = 1 for the raw draw u. Exact for Gaussian
// and Laplace kinds; pilot Monte Carlo (deterministic seed) otherwise.
double isotropy_scale(const SamplerSpec& spec, CalibrationCache& cache = CalibrationCache::global());

// Uniform draw on the unit l_p ball: generalized-Gaussian coordinates
// normalized with an auxiliary exponential variable. Rejects p < 1 and p = inf.
Eigen::VectorXd lp_ball_raw(double p, int M, Rng& rng);

// One hit-and-run chain from the origin; returns the state after `steps` moves.
Eigen::VectorXd hit_and_run_raw(const BodySpec& body, int M, int steps, Rng& rng);

class ColumnSampler {
 public:
  explicit ColumnSampler(SamplerSpec spec, CalibrationCache& cache = CalibrationCache::global());

  // Unscaled column q (isotropic, not divided by sqrt(N)).
  void sample(Rng& rng, std::span<double> out) const;
  Eigen::VectorXd sample(Rng& rng) const;

  const SamplerSpec& spec() const { return spec_; }
  int dimension() const { return spec_.dimension; }
  double scale() const { return scale_; }

 private:
  SamplerSpec spec_;
  double scale_ = 1.0;
};

Eigen::VectorXd sample_column(const SamplerSpec& spec, Rng& rng);

struct MatrixDraw {
  Eigen::MatrixXd X;  // M x N, columns q_i / sqrt(N)
  std::uint64_t seed = 0;
  SamplerSpec spec;
};

// Column j is drawn from the substream (seed, column, j).
MatrixDraw assemble_X(const ColumnSampler& sampler, int N, std::uint64_t seed);
MatrixDraw assemble_X(const SamplerSpec& spec, int N, std::uint64_t seed);

// i.i.d. N(0, 1/N) partner matrix for the interpolation, on its own stream.
MatrixDraw wishart_partner(int M, int N, std::uint64_t seed);

// sqrt(1 - t) X + sqrt(t) Xw; t = 0 and t = 1 return exact copies.
Eigen::MatrixXd interpolate(const Eigen::MatrixXd& X, const Eigen::MatrixXd& Xw, double t);

}  // namespace lcrm
