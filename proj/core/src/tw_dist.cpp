#include "lcrm/tw_dist.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include <Eigen/Dense>

#include "lcrm/format.hpp"
#include "lcrm/quadrature.hpp"

#ifndef LCRM_TW1_TABLE_PATH
#define LCRM_TW1_TABLE_PATH "tw1_table.txt"
#endif
#ifndef LCRM_TW1_TABLE_INSTALLED_PATH
#define LCRM_TW1_TABLE_INSTALLED_PATH LCRM_TW1_TABLE_PATH
#endif

namespace lcrm {

namespace {

constexpr long double kAi0 = 0.355028053887817239260063186004183176L;
constexpr long double kDAi0 = 0.258819403792806798405183560189203963L;  // -Ai'(0)

double airy_maclaurin(double xd) {
  const long double x = xd;
  const long double x3 = x * x * x;
  long double f = 1.0L, g = x;
  long double tf = 1.0L, tg = x;
  for (int k = 1; k < 200; ++k) {
    tf *= x3 / ((3.0L * k - 1.0L) * (3.0L * k));
    tg *= x3 / ((3.0L * k) * (3.0L * k + 1.0L));
    f += tf;
    g += tg;
    if (std::abs(tf) < 1e-30L * std::abs(f) && std::abs(tg) < 1e-30L * (std::abs(g) + 1e-300L)) break;
  }
  return static_cast<double>(kAi0 * f - kDAi0 * g);
}

// Coefficients u_k of the large-argument expansions, up to the smallest term.
double asymptotic_u(int k) {
  double u = 1.0;
  for (int j = 1; j <= k; ++j) u *= (6.0 * j - 5.0) * (6.0 * j - 3.0) * (6.0 * j - 1.0) / ((2.0 * j - 1.0) * 216.0 * j);
  return u;
}

double airy_positive_asymptotic(double x) {
  const double zeta = 2.0 / 3.0 * x * std::sqrt(x);
  double sum = 0.0, u = 1.0, zpow = 1.0, last = std::numeric_limits<double>::infinity();
  for (int k = 0; k < 60; ++k) {
    if (k > 0) u *= (6.0 * k - 5.0) * (6.0 * k - 3.0) * (6.0 * k - 1.0) / ((2.0 * k - 1.0) * 216.0 * k);
    const double term = u / zpow;
    if (term > last) break;
    sum += (k % 2 == 0 ? term : -term);
    last = term;
    zpow *= zeta;
    if (term < 1e-17 * std::abs(sum)) break;
  }
  return std::exp(-zeta) / (2.0 * std::sqrt(std::numbers::pi) * std::pow(x, 0.25)) * sum;
}

double airy_negative_asymptotic(double a) {
  const double zeta = 2.0 / 3.0 * a * std::sqrt(a);
  double p = 0.0, q = 0.0, last = std::numeric_limits<double>::infinity();
  double zpow = 1.0;
  for (int k = 0; k < 60; ++k) {
    const double term = asymptotic_u(k) / zpow;
    if (term > last) break;
    last = term;
    const int sign = (k / 2) % 2 == 0 ? 1 : -1;
    if (k % 2 == 0) p += sign * term; else q += sign * term;
    zpow *= zeta;
    if (term < 1e-17) break;
  }
  const double phase = zeta - std::numbers::pi / 4.0;
  return (std::cos(phase) * p + std::sin(phase) * q) / (std::sqrt(std::numbers::pi) * std::pow(a, 0.25));
}

}  // namespace

double airy_ai(double x) {
  if (x >= -9.0 && x <= 6.5) return airy_maclaurin(x);
  if (x > 0.0) return x > 105.0 ? 0.0 : airy_positive_asymptotic(x);
  return airy_negative_asymptotic(-x);
}

OracleValue tw1_oracle_cdf(double s, const OracleParams& params) {
  OracleValue out;
  if (s < kTwLower || s > kTwUpper || std::isnan(s)) {
    out.clamped = true;
    s = std::isnan(s) ? kTwLower : std::clamp(s, kTwLower, kTwUpper);
  }
  const auto rule = gauss_legendre(params.nodes);
  const double hi = std::max(s, 0.0) + params.upper_margin;
  const double mid = 0.5 * (s + hi), half = 0.5 * (hi - s);
  const int n = params.nodes;
  Eigen::VectorXd x(n), sw(n);
  for (int i = 0; i < n; ++i) {
    x[i] = mid + half * rule.nodes[i];
    sw[i] = std::sqrt(half * rule.weights[i]);
  }
  Eigen::MatrixXd A(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      const double k = 0.5 * airy_ai(0.5 * (x[i] + x[j])) * sw[i] * sw[j];
      A(i, j) = (i == j ? 1.0 : 0.0) - k;
      A(j, i) = A(i, j);
    }
  }
  out.value = std::clamp(A.partialPivLu().determinant(), 0.0, 1.0);
  return out;
}

// ---------------------------------------------------------------------------

Tw1Table::Tw1Table(std::vector<double> knots, std::vector<double> cdf) : knots_(std::move(knots)), values_(std::move(cdf)) {
  const std::size_t n = knots_.size();
  if (n < 3 || values_.size() != n) throw std::invalid_argument("Tw1Table: need >= 3 knots with matching values");
  for (std::size_t i = 1; i < n; ++i) {
    if (!(knots_[i] > knots_[i - 1])) throw std::invalid_argument("Tw1Table: knots must be strictly increasing");
    if (values_[i] < values_[i - 1]) throw std::invalid_argument("Tw1Table: values must be nondecreasing");
  }
  // Fritsch-Carlson slopes: harmonic mean of neighbouring secants, zero at extrema.
  std::vector<double> h(n - 1), delta(n - 1);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    h[i] = knots_[i + 1] - knots_[i];
    delta[i] = (values_[i + 1] - values_[i]) / h[i];
  }
  slopes_.assign(n, 0.0);
  slopes_[0] = delta[0];
  slopes_[n - 1] = delta[n - 2];
  for (std::size_t i = 1; i + 1 < n; ++i) {
    if (delta[i - 1] * delta[i] <= 0.0) continue;
    const double w1 = 2.0 * h[i] + h[i - 1], w2 = h[i] + 2.0 * h[i - 1];
    slopes_[i] = (w1 + w2) / (w1 / delta[i - 1] + w2 / delta[i]);
  }
}

Tw1Table Tw1Table::build(double lo, double hi, double step, const OracleParams& params) {
  if (!(hi > lo) || !(step > 0.0)) throw std::invalid_argument("Tw1Table::build: bad range");
  const auto count = static_cast<std::size_t>(std::llround((hi - lo) / step)) + 1;
  std::vector<double> s(count), f(count);
  for (std::size_t i = 0; i < count; ++i) {
    s[i] = lo + step * static_cast<double>(i);
    f[i] = tw1_oracle_cdf(s[i], params).value;
  }
  // Determinants in the far left tail sit at the rounding floor; keep the
  // table monotone there.
  for (std::size_t i = 1; i < count; ++i) f[i] = std::max(f[i], f[i - 1]);
  return Tw1Table(std::move(s), std::move(f));
}

Tw1Table Tw1Table::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("Tw1Table: cannot open " + path.string());
  std::vector<double> s, f;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ss(line);
    double a, b;
    if (!(ss >> a >> b)) throw std::runtime_error("Tw1Table: malformed row '" + line + "'");
    s.push_back(a);
    f.push_back(b);
  }
  return Tw1Table(std::move(s), std::move(f));
}

void Tw1Table::save(const std::filesystem::path& path, const std::string& header) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("Tw1Table: cannot write " + path.string());
  std::istringstream hs(header);
  std::string line;
  while (std::getline(hs, line)) out << "# " << line << "\n";
  for (std::size_t i = 0; i < knots_.size(); ++i) out << format_double(knots_[i]) << " " << format_double(values_[i]) << "\n";
}

std::size_t Tw1Table::segment(double s) const {
  const auto it = std::upper_bound(knots_.begin(), knots_.end(), s);
  const auto idx = static_cast<std::size_t>(std::distance(knots_.begin(), it));
  return std::clamp<std::size_t>(idx == 0 ? 0 : idx - 1, 0, knots_.size() - 2);
}

double Tw1Table::cdf(double s) const {
  if (s <= knots_.front()) return values_.front();
  if (s >= knots_.back()) return values_.back();
  const std::size_t i = segment(s);
  const double h = knots_[i + 1] - knots_[i];
  const double t = (s - knots_[i]) / h;
  const double t2 = t * t, t3 = t2 * t;
  return (2 * t3 - 3 * t2 + 1) * values_[i] + (t3 - 2 * t2 + t) * h * slopes_[i] + (-2 * t3 + 3 * t2) * values_[i + 1] +
         (t3 - t2) * h * slopes_[i + 1];
}

double Tw1Table::density(double s) const {
  if (s < knots_.front() || s > knots_.back()) return 0.0;
  const std::size_t i = segment(s);
  const double h = knots_[i + 1] - knots_[i];
  const double t = (s - knots_[i]) / h;
  const double t2 = t * t;
  return ((6 * t2 - 6 * t) * values_[i] + (-6 * t2 + 6 * t) * values_[i + 1]) / h + (3 * t2 - 4 * t + 1) * slopes_[i] +
         (3 * t2 - 2 * t) * slopes_[i + 1];
}

double Tw1Table::quantile(double p) const {
  if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("tw1_quantile: p must lie in (0, 1)");
  double lo = knots_.front(), hi = knots_.back();
  for (int it = 0; it < 200 && hi - lo > 1e-14; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (cdf(mid) < p) lo = mid; else hi = mid;
  }
  return 0.5 * (lo + hi);
}

namespace {

// Integral of s^k * F(s) over the table range with 3-point Gauss-Legendre per
// segment (exact for the cubic interpolant times s^k, k <= 2, up to degree 5).
template <class F>
double integrate_segments(const std::vector<double>& knots, F&& f) {
  static const double nodes[3] = {-std::sqrt(0.6), 0.0, std::sqrt(0.6)};
  static const double weights[3] = {5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0};
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < knots.size(); ++i) {
    const double mid = 0.5 * (knots[i] + knots[i + 1]), half = 0.5 * (knots[i + 1] - knots[i]);
    for (int q = 0; q < 3; ++q) total += half * weights[q] * f(mid + half * nodes[q]);
  }
  return total;
}

}  // namespace

double Tw1Table::mean() const {
  // int s dF = [s F] - int F ds
  const double lo = knots_.front(), hi = knots_.back();
  return hi * values_.back() - lo * values_.front() - integrate_segments(knots_, [&](double s) { return cdf(s); });
}

double Tw1Table::variance() const {
  const double lo = knots_.front(), hi = knots_.back();
  const double second = hi * hi * values_.back() - lo * lo * values_.front() -
                        2.0 * integrate_segments(knots_, [&](double s) { return s * cdf(s); });
  const double m = mean();
  return second - m * m;
}

std::filesystem::path default_tw1_table_path() {
  if (const char* env = std::getenv("LCRM_TW1_TABLE"); env && *env) return env;
  const std::filesystem::path build_tree = LCRM_TW1_TABLE_PATH;
  if (std::filesystem::exists(build_tree)) return build_tree;
  return LCRM_TW1_TABLE_INSTALLED_PATH;
}

const Tw1Table& tw1_table() {
  static const Tw1Table table = Tw1Table::load(default_tw1_table_path());
  return table;
}

double tw1_cdf(double s) { return tw1_table().cdf(s); }
double tw1_quantile(double p) { return tw1_table().quantile(p); }

}  // namespace lcrm
