#include <cmath>
#include <random>

#include "doctest.h"
#include "lcrm/mp_model.hpp"
#include "lcrm/quadrature.hpp"
#include "oracles.hpp"
#include "reference_values.hpp"

using namespace lcrm;

namespace {

std::vector<cplx> z_grid(const MpModel& model) {
  std::vector<cplx> zs;
  for (double E : {-1.0, 0.05, 0.5, 1.0, 1.7, model.lambda_plus() - 0.01, model.lambda_plus() + 0.3, 12.0})
    for (double eta : {1e-6, 1e-3, 0.1, 1.0, 30.0}) zs.emplace_back(E, eta);
  return zs;
}

}  // namespace

TEST_CASE("edges and domain") {
  const auto e = edges(0.5);
  CHECK(e.lambda_minus == doctest::Approx(std::pow(1 - std::sqrt(0.5), 2)).epsilon(1e-15));
  CHECK(e.lambda_plus == doctest::Approx(std::pow(1 + std::sqrt(0.5), 2)).epsilon(1e-15));
  CHECK_THROWS_AS(edges(1.0), DomainError);
  CHECK_THROWS_AS(edges(0.0), DomainError);
  CHECK_THROWS_AS(edges(-2.0), DomainError);
  const MpModel m(256, 512);
  CHECK(m.y() == 0.5);
  CHECK(*m.M() == 256);
  CHECK(MpModel(2.0).point_mass(1) == doctest::Approx(0.5));
  CHECK(MpModel(0.25).point_mass(2) == doctest::Approx(0.75));
  CHECK(MpModel(0.25).point_mass(1) == 0.0);
}

TEST_CASE("mp_cdf matches the frozen scipy reference") {
  for (const auto& r : reference::kMpCdf) {
    CAPTURE(r.y);
    CAPTURE(r.which);
    CAPTURE(r.x);
    CHECK(std::abs(mp_cdf(r.x, MpModel(r.y), r.which) - r.value) < 1e-10);
  }
}

TEST_CASE("mp_cdf limits, atom and monotonicity") {
  for (double y : {0.3, 0.5, 2.0, 3.5}) {
    const MpModel m(y);
    for (int which : {1, 2}) {
      CHECK(mp_cdf(-1.0, m, which) == 0.0);
      CHECK(mp_cdf(m.lambda_plus() + 1.0, m, which) == doctest::Approx(1.0).epsilon(1e-14));
      CHECK(mp_cdf(0.0, m, which) == doctest::Approx(m.point_mass(which)).epsilon(1e-14));
      double prev = 0.0;
      for (int k = 0; k <= 400; ++k) {
        const double x = m.lambda_minus() + (m.lambda_plus() - m.lambda_minus()) * k / 400.0;
        const double F = mp_cdf(x, m, which);
        CHECK(F >= prev - 1e-15);
        prev = F;
      }
    }
  }
}

TEST_CASE("density integrates to the continuous mass") {
  for (double y : {0.25, 0.5, 2.0}) {
    const MpModel m(y);
    for (int which : {1, 2}) {
      // Trapezoid after x = a + (b - a) sin^2(t), independent of the production rule.
      const double a = m.lambda_minus(), b = m.lambda_plus();
      const int n = 20000;
      double s = 0.0;
      for (int k = 1; k < n; ++k) {
        const double t = 0.5 * M_PI * k / n;
        const double x = a + (b - a) * std::sin(t) * std::sin(t);
        s += mp_density(x, m, which) * (b - a) * std::sin(2 * t);
      }
      s *= 0.5 * M_PI / n;
      CHECK(s == doctest::Approx(m.continuous_mass(which)).epsilon(1e-8));
    }
  }
}

TEST_CASE("stieltjes matches quadrature reference and quadratic-formula oracle") {
  for (const auto& r : reference::kStieltjes) {
    const auto p = stieltjes(cplx(r.re_z, r.im_z), MpModel(r.y));
    CHECK(std::abs(p.m1 - cplx(r.re_m1, r.im_m1)) < 1e-8);
    CHECK(std::abs(p.m2 - cplx(r.re_m2, r.im_m2)) < 1e-8);
    // The oracle itself is validated against the same reference.
    CHECK(std::abs(oracle::mp_m1(cplx(r.re_z, r.im_z), r.y) - cplx(r.re_m1, r.im_m1)) < 1e-8);
  }
  for (double y : {0.1, 0.5, 0.9, 1.5, 4.0}) {
    const MpModel m(y);
    for (cplx z : z_grid(m)) {
      const auto p = stieltjes(z, m);
      CHECK(p.m1.imag() > 0.0);
      CHECK(p.m2.imag() > 0.0);
      CHECK(std::abs(p.m1 - oracle::mp_m1(z, y)) < 1e-10 * (1 + std::abs(p.m1)));
      CHECK(std::abs(p.m2 - oracle::mp_m2(z, y)) < 1e-10 * (1 + std::abs(p.m2)));
    }
  }
}

TEST_CASE("self-consistent and identity residuals vanish") {
  for (double y : {0.2, 0.5, 2.0}) {
    const MpModel m(y);
    for (cplx z : z_grid(m)) {
      const auto p = stieltjes(z, m);
      const auto r = self_consistent_residuals(p, m);
      CHECK(r.r1 < 1e-9);
      CHECK(r.r2 < 1e-9);
      for (double v : identity_residuals(p, m)) CHECK(v < 1e-9);
    }
  }
}

TEST_CASE("implicit derivatives agree with finite differences") {
  const MpModel m(0.5);
  for (cplx z : {cplx(1.0, 0.3), cplx(3.2, 0.05), cplx(-0.5, 1.0), cplx(0.2, 0.02)}) {
    const auto p = stieltjes(z, m);
    const auto d = stieltjes_derivatives(p, m);
    const double h = 1e-6;
    const auto pp = stieltjes(z + h, m), pm = stieltjes(z - h, m);
    const cplx fd1 = (pp.m1 - pm.m1) / (2 * h), fd2 = (pp.m2 - pm.m2) / (2 * h);
    CHECK(std::abs(d.dm1 - fd1) < 1e-6 * (1 + std::abs(fd1)));
    CHECK(std::abs(d.dm2 - fd2) < 1e-6 * (1 + std::abs(fd2)));
    const cplx fdz = ((z + h) * pp.m2 - (z - h) * pm.m2) / (2 * h);
    CHECK(std::abs(d.dzm2 - fdz) < 1e-6 * (1 + std::abs(fdz)));
  }
}

TEST_CASE("real-axis transform outside the support") {
  for (double y : {0.5, 2.0}) {
    const MpModel m(y);
    for (double x : {m.lambda_plus() + 0.05, m.lambda_plus() + 1.0, 10.0}) {
      const auto r = stieltjes_outside(x, m);
      const auto p = stieltjes(cplx(x, 1e-12), m);
      CHECK(r.m1 == doctest::Approx(p.m1.real()).epsilon(1e-9));
      CHECK(r.m2 == doctest::Approx(p.m2.real()).epsilon(1e-9));
      const double h = 1e-6;
      CHECK(r.dm2 == doctest::Approx((stieltjes_outside(x + h, m).m2 - stieltjes_outside(x - h, m).m2) / (2 * h)).epsilon(1e-6));
      CHECK(r.dm1 == doctest::Approx((stieltjes_outside(x + h, m).m1 - stieltjes_outside(x - h, m).m1) / (2 * h)).epsilon(1e-6));
    }
  }
  CHECK_THROWS_AS(stieltjes_outside(1.0, MpModel(0.5)), DomainError);
}

TEST_CASE("Stieltjes inversion recovers the density in the bulk") {
  const MpModel m(0.5);
  for (double x = m.lambda_minus() + 0.1; x < m.lambda_plus() - 0.1; x += 0.2)
    CHECK(std::abs(stieltjes(cplx(x, 1e-9), m).m1.imag() / M_PI - mp_density(x, m, 1)) < 1e-4);
}

TEST_CASE("classical locations") {
  const auto a = classical_locations(6, 12);
  const auto b = classical_locations(12, 6);
  REQUIRE(a.size() == 6);
  REQUIRE(b.size() == 6);
  for (int j = 0; j < 6; ++j) {
    CHECK(a[j] == doctest::Approx(reference::kClassical_6_12[j]).epsilon(1e-10));
    CHECK(b[j] == doctest::Approx(reference::kClassical_12_6[j]).epsilon(1e-10));
  }
  const auto c = classical_locations(300, 600);
  CHECK(std::is_sorted(c.rbegin(), c.rend()));
  CHECK(c.front() < MpModel(0.5).lambda_plus());
  CHECK(c.back() > MpModel(0.5).lambda_minus());
}

TEST_CASE("outlier location") {
  CHECK(theta(2.0, 0.5) == doctest::Approx(3.75));
  CHECK(theta(1.0, 0.25) == doctest::Approx(2.5));
  CHECK_THROWS_AS(theta(0.5, 0.5), DomainError);
}

TEST_CASE("Gauss-Legendre rules") {
  for (int n : {1, 2, 5, 16, 64}) {
    const auto r = gauss_legendre(n);
    double wsum = 0.0;
    for (double w : r.weights) wsum += w;
    CHECK(wsum == doctest::Approx(2.0).epsilon(1e-14));
    // exact for x^(2n-2)
    double s = 0.0;
    for (int i = 0; i < n; ++i) s += r.weights[i] * std::pow(r.nodes[i], 2 * n - 2);
    CHECK(s == doctest::Approx(2.0 / (2 * n - 1)).epsilon(1e-12));
  }
  CHECK(integrate_adaptive([](double x) { return std::sqrt(x); }, 0.0, 1.0) == doctest::Approx(2.0 / 3.0).epsilon(1e-11));
  CHECK(integrate_adaptive([](double x) { return std::exp(-x * x); }, -8.0, 8.0) ==
        doctest::Approx(std::sqrt(M_PI)).epsilon(1e-12));
}
