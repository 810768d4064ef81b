#include <cmath>

#include "doctest.h"
#include "lcrm/ensemble.hpp"
#include "lcrm/sampling.hpp"
#include "oracles.hpp"

using namespace lcrm;

namespace {

oracle::Dense to_dense(const Eigen::MatrixXd& A) {
  return oracle::from_rows(static_cast<int>(A.rows()), static_cast<int>(A.cols()),
                           [&](int i, int j) { return A(i, j); });
}

Eigen::MatrixXd draw(int M, int N, std::uint64_t seed) {
  SamplerSpec s;
  s.kind = LpBall{1.0};
  s.dimension = M;
  return assemble_X(s, N, seed).X;
}

}  // namespace

TEST_CASE("SpikeList invariants") {
  const SpikeList s({1.0, 3.0, 2.0});
  CHECK(s.values() == std::vector<double>{3.0, 2.0, 1.0});
  CHECK_THROWS(SpikeList(std::vector<double>(17, 2.0)));
  CHECK_THROWS(SpikeList({2.0, -1.0}));
  CHECK_NOTHROW(SpikeList({2.0, -0.5}));
  CHECK_THROWS(s.require_supercritical(1.5, 0.0));
  CHECK_NOTHROW(s.require_supercritical(0.5, 0.1));
  CHECK_NOTHROW(s.require_separated(1024, 0.1));
  CHECK_THROWS(SpikeList({2.0, 2.01}).require_separated(1024, 0.1));
}

TEST_CASE("H and Q assembly match brute force") {
  for (auto [M, N] : {std::pair{4, 7}, std::pair{7, 4}, std::pair{10, 10}}) {
    const auto X = draw(M, N, 1);
    const auto H = assemble_H(X);
    const auto ref = oracle::gram_rows(to_dense(X));
    for (int i = 0; i < M; ++i)
      for (int j = 0; j < M; ++j) CHECK(std::abs(H(i, j) - ref[i][j]) < 1e-13);
    const std::vector<double> d = {2.5, 0.7};
    const auto Q = assemble_spiked(X, SpikeList(d));
    const auto refQ = oracle::spiked_gram(to_dense(X), d);
    for (int i = 0; i < M; ++i)
      for (int j = 0; j < M; ++j) CHECK(std::abs(Q(i, j) - refQ[i][j]) < 1e-13);
    CHECK((Q - Q.transpose()).cwiseAbs().maxCoeff() == 0.0);
  }
  CHECK_THROWS(assemble_spiked(draw(2, 5, 1), SpikeList({1.0, 1.0, 1.0})));
}

TEST_CASE("spectra agree with Jacobi rotations") {
  for (auto [M, N] : {std::pair{6, 15}, std::pair{15, 6}, std::pair{12, 13}}) {
    const auto X = draw(M, N, 2);
    const auto s = h_spectrum(X, {5, true, 2});
    REQUIRE(s.size() == static_cast<std::size_t>(M));
    const auto ref = oracle::jacobi_eigenvalues(oracle::gram_rows(to_dense(X)));
    for (int i = 0; i < M; ++i) CHECK(std::abs(s.eigenvalues[i] - ref[i]) < 1e-11);
    CHECK(std::is_sorted(s.eigenvalues.rbegin(), s.eigenvalues.rend()));
    for (double v : s.eigenvalues) CHECK(v >= 0.0);

    const SpikeList spikes({3.0});
    const auto q = spiked_spectrum(X, spikes);
    const auto refq = oracle::jacobi_eigenvalues(oracle::spiked_gram(to_dense(X), {3.0}));
    for (int i = 0; i < M; ++i) CHECK(std::abs(q.eigenvalues[i] - refq[i]) < 1e-11);
  }
}

TEST_CASE("companion spectrum pads zeros") {
  const auto s = h_spectrum(draw(4, 9, 3));
  const auto c = companion_spectrum(s, 9);
  CHECK(c.size() == 9);
  for (int i = 0; i < 4; ++i) CHECK(c.eigenvalues[i] == s.eigenvalues[i]);
  for (int i = 4; i < 9; ++i) CHECK(c.eigenvalues[i] == 0.0);
  const auto t = companion_spectrum(c, 4);
  CHECK(t.eigenvalues == s.eigenvalues);
}

TEST_CASE("spectrum of a generic symmetric matrix") {
  Eigen::MatrixXd A(3, 3);
  A << 2, -1, 0, -1, 2, -1, 0, -1, 2;
  const auto s = spectrum(A, {3, false, 0});
  CHECK(s.eigenvalues[0] == doctest::Approx(2 + std::sqrt(2.0)));
  CHECK(s.eigenvalues[1] == doctest::Approx(2.0));
  CHECK(s.eigenvalues[2] == doctest::Approx(2 - std::sqrt(2.0)));
  CHECK_THROWS(spectrum(Eigen::MatrixXd(2, 3)));
}

TEST_CASE("numerical errors carry the seed") {
  Eigen::MatrixXd A = Eigen::MatrixXd::Identity(3, 3);
  A(0, 0) = std::numeric_limits<double>::quiet_NaN();
  try {
    spectrum(A, {3, true, 777});
    FAIL("expected NumericalError");
  } catch (const NumericalError& e) {
    CHECK(e.seed() == 777);
  }
}
