#include <cmath>
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "lcrm/sampling.hpp"
#include "reference_values.hpp"

using namespace lcrm;

namespace {

SamplerSpec spec_of(SamplerKind k, int M) {
  SamplerSpec s;
  s.kind = k;
  s.dimension = M;
  return s;
}

// Max deviation of the sample covariance from the identity, in units of its
// standard error, plus the max |mean|.
struct Moments {
  double cov_dev = 0.0;
  double mean_dev = 0.0;
};

Moments moments(const ColumnSampler& s, int n, std::uint64_t seed) {
  const int M = s.dimension();
  Eigen::MatrixXd C = Eigen::MatrixXd::Zero(M, M);
  Eigen::VectorXd mu = Eigen::VectorXd::Zero(M);
  Rng rng(seed);
  for (int k = 0; k < n; ++k) {
    const Eigen::VectorXd q = s.sample(rng);
    C += q * q.transpose();
    mu += q;
  }
  C /= n;
  mu /= n;
  return {(C - Eigen::MatrixXd::Identity(M, M)).cwiseAbs().maxCoeff(), mu.cwiseAbs().maxCoeff()};
}

}  // namespace

TEST_CASE("validation") {
  CHECK_THROWS_AS(validate(spec_of(LpBall{0.5}, 4)), std::invalid_argument);
  CHECK_THROWS_AS(validate(spec_of(Gaussian{}, 0)), std::invalid_argument);
  CHECK_THROWS_AS(validate(spec_of(LpBall{std::numeric_limits<double>::infinity()}, 4)), std::invalid_argument);
  CHECK_THROWS_AS(validate(spec_of(HitAndRun{BodySpec{2.0}, 5, 0}, 4)), std::invalid_argument);
  CHECK_NOTHROW(validate(spec_of(HitAndRun{BodySpec{2.0}, 40, 0}, 4)));
  CHECK_NOTHROW(validate(spec_of(HitAndRun{BodySpec{std::numeric_limits<double>::infinity()}, 0, 0}, 4)));
  CHECK(effective_burn_in(HitAndRun{}, 8) == 400);
  CHECK(effective_thinning(HitAndRun{}, 8) == 80);
}

TEST_CASE("l_p ball calibration matches the Dirichlet closed form") {
  for (const auto& r : reference::kLpMoments) {
    CalibrationCache cache;
    const double s = isotropy_scale(spec_of(LpBall{r.p}, r.M), cache);
    CAPTURE(r.p);
    CAPTURE(r.M);
    CHECK(s * s * r.second_moment == doctest::Approx(1.0).epsilon(3e-3));
    CHECK(cache.size() == 1);
  }
  CalibrationCache cache;
  CHECK(isotropy_scale(spec_of(Gaussian{}, 7), cache) == 1.0);
  CHECK(isotropy_scale(spec_of(LaplaceProduct{}, 7), cache) == 1.0);
  CHECK(cache.size() == 0);
}

TEST_CASE("every kind is isotropic and centered") {
  const double inf = std::numeric_limits<double>::infinity();
  const std::vector<SamplerKind> kinds = {Gaussian{}, LaplaceProduct{}, LpBall{1.0}, LpBall{2.0}, LpBall{3.5},
                                          HitAndRun{BodySpec{2.0}, 0, 0}, HitAndRun{BodySpec{inf}, 0, 0},
                                          HitAndRun{BodySpec{1.0}, 0, 0}};
  for (const auto& k : kinds) {
    CalibrationCache cache;
    const ColumnSampler s(spec_of(k, 4), cache);
    const auto m = moments(s, 40000, 99);
    CAPTURE(kind_name(s.spec()));
    // SE of a covariance entry is about sqrt(E q^4 / n) < 0.02 here.
    CHECK(m.cov_dev < 0.06);
    CHECK(m.mean_dev < 0.04);
  }
}

TEST_CASE("raw draws stay inside the body") {
  Rng rng(5);
  for (double p : {1.0, 1.7, 2.0, 6.0}) {
    for (int k = 0; k < 200; ++k) {
      const auto u = lp_ball_raw(p, 9, rng);
      CHECK(u.array().abs().pow(p).sum() <= 1.0 + 1e-12);
      const auto h = hit_and_run_raw(BodySpec{p}, 9, 50, rng);
      CHECK(h.array().abs().pow(p).sum() <= 1.0 + 1e-12);
    }
  }
  const auto c = hit_and_run_raw(BodySpec{std::numeric_limits<double>::infinity()}, 9, 200, rng);
  CHECK(c.cwiseAbs().maxCoeff() <= 1.0);
}

TEST_CASE("uniform l_2 ball: radius law r^M") {
  // P(||u|| <= r) = r^M; check the median radius 2^{-1/M}.
  Rng rng(11);
  const int M = 6, n = 20000;
  int below = 0;
  const double r = std::pow(0.5, 1.0 / M);
  for (int k = 0; k < n; ++k) below += lp_ball_raw(2.0, M, rng).norm() <= r;
  CHECK(std::abs(below / static_cast<double>(n) - 0.5) < 0.015);
}

TEST_CASE("matrix assembly is deterministic and column-addressed") {
  const auto spec = spec_of(LpBall{1.0}, 5);
  const auto a = assemble_X(spec, 8, 42), b = assemble_X(spec, 8, 42), c = assemble_X(spec, 8, 43);
  CHECK(a.X == b.X);
  CHECK(a.X != c.X);
  const auto d = assemble_X(spec, 3, 42);
  // same q per column; only the 1/sqrt(N) scaling differs
  CHECK((d.X * std::sqrt(3.0) - a.X.leftCols(3) * std::sqrt(8.0)).cwiseAbs().maxCoeff() < 1e-14);
  CHECK(a.X.rows() == 5);
  CHECK(a.X.cols() == 8);
  // columns are q / sqrt(N)
  const auto g = assemble_X(spec_of(Gaussian{}, 200), 400, 1);
  CHECK(g.X.squaredNorm() / 200.0 == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("interpolation and the Gaussian partner") {
  const auto X = assemble_X(spec_of(LaplaceProduct{}, 6), 9, 3).X;
  const auto W = wishart_partner(6, 9, 3).X;
  CHECK(interpolate(X, W, 0.0) == X);
  CHECK(interpolate(X, W, 1.0) == W);
  const auto half = interpolate(X, W, 0.25);
  CHECK((half - (std::sqrt(0.75) * X + 0.5 * W)).cwiseAbs().maxCoeff() < 1e-15);
  CHECK_THROWS(interpolate(X, W, 1.5));
  const auto big = wishart_partner(100, 400, 8).X;
  CHECK(big.squaredNorm() / (100.0 * 400.0) == doctest::Approx(1.0 / 400).epsilon(0.02));
  CHECK(wishart_partner(6, 9, 3).X != assemble_X(spec_of(Gaussian{}, 6), 9, 3).X);
}

TEST_CASE("calibration cache persistence") {
  CalibrationCache cache;
  isotropy_scale(spec_of(LpBall{1.0}, 12), cache);
  isotropy_scale(spec_of(LpBall{3.0}, 7), cache);
  const auto path = std::filesystem::temp_directory_path() / "lcrm_cache_test.txt";
  cache.save(path);
  CalibrationCache back;
  back.load(path);
  CHECK(back.size() == 2);
  const auto key = calibration_key(spec_of(LpBall{1.0}, 12));
  REQUIRE(key);
  CHECK(back.find(*key)->scale == cache.find(*key)->scale);
  CHECK(isotropy_scale(spec_of(LpBall{1.0}, 12), back) == cache.find(*key)->scale);
  std::ofstream(path) << "kind=lp_ball p=1 M=3 bogus=2\n";
  CalibrationCache bad;
  CHECK_THROWS(bad.load(path));
  std::filesystem::remove(path);
  CHECK_FALSE(calibration_key(spec_of(Gaussian{}, 3)));
}
