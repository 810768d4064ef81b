#pragma once

#include <array>
#include <complex>
#include <optional>
#include <stdexcept>
#include <vector>

namespace lcrm {

using cplx = std::complex<double>;

// Thrown for arguments outside an operation's mathematical domain.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

struct Edges {
  double lambda_minus;
  double lambda_plus;
};

// (1 - sqrt(y))^2, (1 + sqrt(y))^2. Rejects y <= 0 and y == 1.
Edges edges(double y);

// Marchenko-Pastur law with dimension ratio y = M/N for the identity
// population covariance. Index 1 refers to the law of XX^* (M x M), index 2
// to the law of X^*X (N x N).
class MpModel {
 public:
  explicit MpModel(double y);
  MpModel(int M, int N);

  double y() const { return y_; }
  double lambda_minus() const { return lambda_minus_; }
  double lambda_plus() const { return lambda_plus_; }
  std::optional<int> M() const { return M_; }
  std::optional<int> N() const { return N_; }

  // Atom at the origin: (1 - 1/y)_+ for which = 1, (1 - y)_+ for which = 2.
  double point_mass(int which) const;
  // Mass carried by the absolutely continuous part.
  double continuous_mass(int which) const { return 1.0 - point_mass(which); }

 private:
  double y_;
  double lambda_minus_;
  double lambda_plus_;
  std::optional<int> M_;
  std::optional<int> N_;
};

// Density of the absolutely continuous part; 0 outside [lambda_-, lambda_+].
double mp_density(double x, const MpModel& model, int which);

// Mass of the continuous part of nu_{y,which} on [x, lambda_+], by
// Gauss-Legendre quadrature after x = lambda_+ - (lambda_+ - lambda_-) sin^2(theta).
double mp_tail_mass(double x, const MpModel& model, int which);

// Full CDF of nu_{y,which}, atom included.
double mp_cdf(double x, const MpModel& model, int which);

struct StieltjesPair {
  cplx z;
  cplx m1;
  cplx m2;
};

// m_1(z), m_2(z) for Im z > 0, each chosen as the root of its self-consistent
// quadratic with positive imaginary part.
StieltjesPair stieltjes(cplx z, const MpModel& model);

// Real-axis values outside the support, x > lambda_+: the limits of m_a(x + i0).
struct RealStieltjes {
  double m1, m2;
  double dm1, dm2;  // derivatives in x
};
RealStieltjes stieltjes_outside(double x, const MpModel& model);

// Analytic derivatives obtained by implicit differentiation of the quadratics.
struct StieltjesDerivatives {
  cplx dm1;
  cplx dm2;
  cplx dzm2;  // (z m_2)'
};
StieltjesDerivatives stieltjes_derivatives(const StieltjesPair& pair, const MpModel& model);

struct SelfConsistentResiduals {
  double r1;
  double r2;
};
SelfConsistentResiduals self_consistent_residuals(const StieltjesPair& pair, const MpModel& model);

// |m1 + 1/(z(1+m2))|, |1 + z m1 - (1 + z m2)/y|, |m1((z m2)' + 1) - m1'/m1|.
std::array<double, 3> identity_residuals(const StieltjesPair& pair, const MpModel& model);

// gamma_1 > ... > gamma_K, K = min(M, N): the point where nu_{y,2} carries
// mass (j - 1/2)/N to its right (equivalently nu_{y,1} carries (j - 1/2)/M).
std::vector<double> classical_locations(int M, int N);

// Outlier location 1 + d + y + y/d for a supercritical spike d > sqrt(y).
double theta(double d, double y);

}  // namespace lcrm
