#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace lcrm {

// Airy function Ai: long double Maclaurin series on [-9, 6.5], asymptotic
// expansions beyond.
double airy_ai(double x);

struct OracleParams {
  int nodes = 128;           // Gauss-Legendre nodes on the truncated half-line
  double upper_margin = 14;  // integrate on [s, max(s, 0) + upper_margin]
};

struct OracleValue {
  double value = 0.0;
  bool clamped = false;  // s was outside [-10, 8] and has been clamped
};

inline constexpr double kTwLower = -10.0;
inline constexpr double kTwUpper = 8.0;

// F_1(s) = det(I - K)_{L^2(s, inf)}, K(x, y) = Ai((x + y)/2)/2, by Nystrom
// discretization of the Fredholm determinant.
OracleValue tw1_oracle_cdf(double s, const OracleParams& params = {});

// Tabulated TW_1 CDF with a monotone (Fritsch-Carlson) cubic interpolant.
// Text format: '#' header lines, then "s F" rows with strictly increasing s.
class Tw1Table {
 public:
  Tw1Table(std::vector<double> knots, std::vector<double> cdf);

  static Tw1Table build(double lo, double hi, double step, const OracleParams& params = {});
  static Tw1Table load(const std::filesystem::path& path);
  void save(const std::filesystem::path& path, const std::string& header) const;

  double cdf(double s) const;
  double density(double s) const;  // derivative of the interpolant
  double quantile(double p) const;

  // Moments by quadrature of the interpolant over the table range.
  double mean() const;
  double variance() const;

  const std::vector<double>& knots() const { return knots_; }
  const std::vector<double>& values() const { return values_; }

 private:
  std::size_t segment(double s) const;

  std::vector<double> knots_;
  std::vector<double> values_;
  std::vector<double> slopes_;
};

// Table shipped with the library (LCRM_TW1_TABLE overrides the location).
const Tw1Table& tw1_table();
std::filesystem::path default_tw1_table_path();

double tw1_cdf(double s);
double tw1_quantile(double p);

}  // namespace lcrm
