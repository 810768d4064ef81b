#include "lcrm/mp_model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "lcrm/quadrature.hpp"

namespace lcrm {

Edges edges(double y) {
  if (!(y > 0.0) || !std::isfinite(y)) throw DomainError("edges: y must be positive and finite");
  if (y == 1.0) throw DomainError("edges: y = 1 is excluded");
  const double s = std::sqrt(y);
  return {(1.0 - s) * (1.0 - s), (1.0 + s) * (1.0 + s)};
}

MpModel::MpModel(double y) : y_(y) {
  const auto e = edges(y);
  lambda_minus_ = e.lambda_minus;
  lambda_plus_ = e.lambda_plus;
}

MpModel::MpModel(int M, int N) : MpModel([&] {
  if (M < 1 || N < 1) throw DomainError("MpModel: M and N must be positive");
  return static_cast<double>(M) / static_cast<double>(N);
}()) {
  M_ = M;
  N_ = N;
}

double MpModel::point_mass(int which) const {
  if (which == 1) return std::max(0.0, 1.0 - 1.0 / y_);
  if (which == 2) return std::max(0.0, 1.0 - y_);
  throw std::invalid_argument("point_mass: which must be 1 or 2");
}

double mp_density(double x, const MpModel& model, int which) {
  if (which != 1 && which != 2) throw std::invalid_argument("mp_density: which must be 1 or 2");
  const double lp = model.lambda_plus(), lm = model.lambda_minus();
  if (!(x > lm && x < lp)) return 0.0;
  const double root = std::sqrt((lp - x) * (x - lm));
  const double denom = which == 1 ? 2.0 * std::numbers::pi * x * model.y() : 2.0 * std::numbers::pi * x;
  return root / denom;
}

namespace {

// Continuous mass of nu_{y,1} on [lambda_+ - W sin^2(theta_x), lambda_+].
double tail_mass_theta(double theta_x, const MpModel& model) {
  if (theta_x <= 0.0) return 0.0;
  const double lp = model.lambda_plus();
  const double w = lp - model.lambda_minus();
  const double y = model.y();
  auto integrand = [=](double th) {
    const double s = std::sin(th);
    const double s2 = std::sin(2.0 * th);
    const double t = lp - w * s * s;
    return w * w * s2 * s2 / (4.0 * std::numbers::pi * t * y);
  };
  return integrate_adaptive(integrand, 0.0, theta_x, 1e-13);
}

double theta_of(double x, const MpModel& model) {
  const double lp = model.lambda_plus();
  const double w = lp - model.lambda_minus();
  const double u = std::clamp((lp - x) / w, 0.0, 1.0);
  return std::asin(std::sqrt(u));
}

}  // namespace

double mp_tail_mass(double x, const MpModel& model, int which) {
  if (which != 1 && which != 2) throw std::invalid_argument("mp_tail_mass: which must be 1 or 2");
  if (x >= model.lambda_plus()) return 0.0;
  if (x <= model.lambda_minus()) return model.continuous_mass(which);
  const double m1 = tail_mass_theta(theta_of(x, model), model);
  return which == 1 ? m1 : model.y() * m1;
}

double mp_cdf(double x, const MpModel& model, int which) {
  const double atom = x >= 0.0 ? model.point_mass(which) : 0.0;
  if (x < model.lambda_minus()) return atom;
  return atom + model.continuous_mass(which) - mp_tail_mass(x, model, which);
}

namespace {

// Root of a w^2 + b w + c = 0 with the larger imaginary part; both roots are
// formed without cancellation.
cplx upper_root(cplx a, cplx b, cplx c) {
  cplx disc = std::sqrt(b * b - 4.0 * a * c);
  if (std::real(std::conj(b) * disc) < 0.0) disc = -disc;
  const cplx q = -0.5 * (b + disc);
  const cplx r1 = q / a;
  const cplx r2 = c / q;
  return std::imag(r1) >= std::imag(r2) ? r1 : r2;
}

}  // namespace

StieltjesPair stieltjes(cplx z, const MpModel& model) {
  if (!(z.imag() > 0.0)) throw DomainError("stieltjes: requires Im z > 0");
  const double y = model.y();
  StieltjesPair p;
  p.z = z;
  p.m1 = upper_root(z * y, z - (1.0 - y), 1.0);
  p.m2 = upper_root(z, z + (1.0 - y), 1.0);
  return p;
}

RealStieltjes stieltjes_outside(double x, const MpModel& model) {
  if (!(x > model.lambda_plus())) throw DomainError("stieltjes_outside: requires x > lambda_+");
  const double y = model.y();
  const double root = std::sqrt((x - model.lambda_plus()) * (x - model.lambda_minus()));
  RealStieltjes r;
  r.m1 = (1.0 - y - x + root) / (2.0 * x * y);
  r.m2 = (y - 1.0 - x + root) / (2.0 * x);
  r.dm1 = -(y * r.m1 * r.m1 + r.m1) / (2.0 * x * y * r.m1 + x - 1.0 + y);
  r.dm2 = -(r.m2 * r.m2 + r.m2) / (2.0 * x * r.m2 + x + 1.0 - y);
  return r;
}

StieltjesDerivatives stieltjes_derivatives(const StieltjesPair& p, const MpModel& model) {
  const double y = model.y();
  const cplx z = p.z;
  StieltjesDerivatives d;
  // d/dz of  z y m1^2 + (z - 1 + y) m1 + 1 = 0  and  z m2^2 + (z + 1 - y) m2 + 1 = 0.
  d.dm1 = -(y * p.m1 * p.m1 + p.m1) / (2.0 * z * y * p.m1 + z - 1.0 + y);
  d.dm2 = -(p.m2 * p.m2 + p.m2) / (2.0 * z * p.m2 + z + 1.0 - y);
  d.dzm2 = p.m2 + z * d.dm2;
  return d;
}

SelfConsistentResiduals self_consistent_residuals(const StieltjesPair& p, const MpModel& model) {
  const double y = model.y();
  const cplx z = p.z;
  return {std::abs(z * y * p.m1 * p.m1 + (z - (1.0 - y)) * p.m1 + 1.0),
          std::abs(z * p.m2 * p.m2 + (z + (1.0 - y)) * p.m2 + 1.0)};
}

std::array<double, 3> identity_residuals(const StieltjesPair& p, const MpModel& model) {
  const cplx z = p.z;
  const auto d = stieltjes_derivatives(p, model);
  return {std::abs(p.m1 + 1.0 / (z * (1.0 + p.m2))),
          std::abs(1.0 + z * p.m1 - (1.0 + z * p.m2) / model.y()),
          std::abs(p.m1 * (d.dzm2 + 1.0) - d.dm1 / p.m1)};
}

std::vector<double> classical_locations(int M, int N) {
  const MpModel model(M, N);
  const int K = std::min(M, N);
  const double lp = model.lambda_plus();
  const double w = lp - model.lambda_minus();
  const double y = model.y();
  const double total = model.continuous_mass(2);

  std::vector<double> gamma(K);
  double lo_theta = 0.0;
  for (int j = 1; j <= K; ++j) {
    const double target = (j - 0.5) / N;
    if (target > total) {
      throw DomainError("classical_locations: requested mass " + std::to_string(target) +
                        " exceeds continuous mass " + std::to_string(total));
    }
    // Mass of nu_{y,2} to the right of theta is y * (mass of nu_{y,1}); bisect in theta.
    double lo = lo_theta, hi = std::numbers::pi / 2;
    for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (y * tail_mass_theta(mid, model) < target) lo = mid; else hi = mid;
    }
    const double th = 0.5 * (lo + hi);
    lo_theta = lo;
    const double s = std::sin(th);
    gamma[j - 1] = lp - w * s * s;
  }
  return gamma;
}

double theta(double d, double y) {
  if (!(y > 0.0)) throw DomainError("theta: y must be positive");
  if (!(d > std::sqrt(y))) throw DomainError("theta: spike must exceed sqrt(y)");
  return 1.0 + d + y + y / d;
}

}  // namespace lcrm
