#include "lcrm/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "lcrm/format.hpp"

namespace lcrm {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string format_p(double p) { return std::isinf(p) ? std::string("inf") : format_double(p); }

// Coordinate budget of a pilot calibration run.
constexpr double kPilotCoordinates = 2e7;
constexpr std::int64_t kPilotMinDraws = 20000;
constexpr std::int64_t kPilotMaxDraws = 10000000;
constexpr std::int64_t kChainPilotDraws = 20000;

}  // namespace

std::string kind_name(const SamplerSpec& spec) {
  return std::visit(overloaded{
                        [](const Gaussian&) { return std::string("gaussian"); },
                        [](const LaplaceProduct&) { return std::string("laplace_product"); },
                        [](const LpBall& b) { return "lp_ball(p=" + format_p(b.p) + ")"; },
                        [](const HitAndRun& h) {
                          return "convex_body_hit_and_run(p=" + format_p(h.body.p) + ")";
                        },
                    },
                    spec.kind);
}

int effective_burn_in(const HitAndRun& h, int M) { return h.burn_in > 0 ? h.burn_in : 50 * M; }
int effective_thinning(const HitAndRun& h, int M) { return h.thinning > 0 ? h.thinning : 10 * M; }

void validate(const SamplerSpec& spec) {
  if (spec.dimension < 1) throw std::invalid_argument("sampler: dimension must be >= 1");
  std::visit(overloaded{
                 [](const Gaussian&) {},
                 [](const LaplaceProduct&) {},
                 [](const LpBall& b) {
                   if (!(b.p >= 1.0) || std::isinf(b.p))
                     throw std::invalid_argument("lp_ball: p must be finite and >= 1");
                 },
                 [&](const HitAndRun& h) {
                   if (!(h.body.p >= 1.0)) throw std::invalid_argument("hit_and_run: body p must be >= 1");
                   const int burn = effective_burn_in(h, spec.dimension);
                   if (burn < h.min_burn_in_factor * spec.dimension)
                     throw std::invalid_argument("hit_and_run: burn_in " + std::to_string(burn) +
                                                 " below floor " +
                                                 std::to_string(h.min_burn_in_factor * spec.dimension));
                   if (effective_thinning(h, spec.dimension) < 1)
                     throw std::invalid_argument("hit_and_run: thinning must be >= 1");
                 },
             },
             spec.kind);
}

// ---------------------------------------------------------------------------
// Calibration cache

std::optional<CalibrationCache::Entry> CalibrationCache::find(const std::string& key) const {
  std::lock_guard lock(mutex_);
  if (auto it = entries_.find(key); it != entries_.end()) return it->second;
  return std::nullopt;
}

void CalibrationCache::insert(const std::string& key, Entry entry) {
  std::lock_guard lock(mutex_);
  entries_[key] = entry;
}

std::size_t CalibrationCache::size() const {
  std::lock_guard lock(mutex_);
  return entries_.size();
}

void CalibrationCache::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("calibration cache: cannot open " + path.string());
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ss(line);
    std::string tok, kind, p, m;
    std::optional<double> scale;
    std::int64_t pilot = 0;
    while (ss >> tok) {
      const auto eq = tok.find('=');
      if (eq == std::string::npos) throw std::runtime_error("calibration cache: malformed token at line " + std::to_string(lineno));
      const std::string k = tok.substr(0, eq), v = tok.substr(eq + 1);
      if (k == "kind") kind = v;
      else if (k == "p") p = v;
      else if (k == "M") m = v;
      else if (k == "scale") scale = std::stod(v);
      else if (k == "pilot") pilot = std::stoll(v);
      else throw std::runtime_error("calibration cache: unknown key '" + k + "' at line " + std::to_string(lineno));
    }
    if (kind.empty() || p.empty() || m.empty() || !scale)
      throw std::runtime_error("calibration cache: incomplete record at line " + std::to_string(lineno));
    insert("kind=" + kind + " p=" + p + " M=" + m, {*scale, pilot});
  }
}

void CalibrationCache::save(const std::filesystem::path& path) const {
  std::map<std::string, Entry> snapshot;
  {
    std::lock_guard lock(mutex_);
    snapshot = entries_;
  }
  const auto tmp = std::filesystem::path(path.string() + ".tmp");
  {
    std::ofstream out(tmp);
    if (!out) throw std::runtime_error("calibration cache: cannot write " + tmp.string());
    out << "# isotropy calibration cache: kind p M scale pilot\n";
    for (const auto& [key, e] : snapshot)
      out << key << " scale=" << format_double(e.scale) << " pilot=" << e.pilot_size << "\n";
  }
  std::filesystem::rename(tmp, path);
}

CalibrationCache& CalibrationCache::global() {
  static CalibrationCache cache;
  return cache;
}

std::optional<std::string> calibration_key(const SamplerSpec& spec) {
  const std::string m = " M=" + std::to_string(spec.dimension);
  return std::visit(overloaded{
                        [](const Gaussian&) -> std::optional<std::string> { return std::nullopt; },
                        [](const LaplaceProduct&) -> std::optional<std::string> { return std::nullopt; },
                        [&](const LpBall& b) -> std::optional<std::string> {
                          return "kind=lp_ball p=" + format_p(b.p) + m;
                        },
                        [&](const HitAndRun& h) -> std::optional<std::string> {
                          return "kind=hit_and_run p=" + format_p(h.body.p) + m;
                        },
                    },
                    spec.kind);
}

// ---------------------------------------------------------------------------
// Raw samplers

Eigen::VectorXd lp_ball_raw(double p, int M, Rng& rng) {
  if (!(p >= 1.0) || std::isinf(p)) throw std::invalid_argument("lp_ball_raw: p must be finite and >= 1");
  if (M < 1) throw std::invalid_argument("lp_ball_raw: M must be >= 1");
  std::gamma_distribution<double> gamma(1.0 / p, 1.0);
  std::exponential_distribution<double> expo(1.0);
  std::bernoulli_distribution coin(0.5);
  Eigen::VectorXd g(M);
  double sum = 0.0;
  for (int i = 0; i < M; ++i) {
    const double a = gamma(rng);  // |g_i|^p
    sum += a;
    const double mag = std::pow(a, 1.0 / p);
    g[i] = coin(rng) ? mag : -mag;
  }
  sum += expo(rng);
  return g / std::pow(sum, 1.0 / p);
}

namespace {

double lp_norm_pow(const Eigen::VectorXd& v, double p) {
  double s = 0.0;
  for (double x : v) s += std::pow(std::abs(x), p);
  return s;
}

// Largest t >= 0 with x + t d inside the unit l_p ball.
double chord_end(const Eigen::VectorXd& x, const Eigen::VectorXd& d, double p) {
  if (std::isinf(p)) {
    double t = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      if (d[i] > 0) t = std::min(t, (1.0 - x[i]) / d[i]);
      else if (d[i] < 0) t = std::min(t, (-1.0 - x[i]) / d[i]);
    }
    return std::max(t, 0.0);
  }
  if (p == 2.0) {
    const double b = x.dot(d), c = x.squaredNorm() - 1.0, a = d.squaredNorm();
    return (-b + std::sqrt(std::max(0.0, b * b - a * c))) / a;
  }
  // g(t) = ||x + t d||_p^p - 1 is convex with g(0) <= 0, so Newton from an
  // upper bound decreases monotonically onto the root (finitely for p = 1).
  const double xn = std::pow(lp_norm_pow(x, p), 1.0 / p);
  const double dn = std::pow(lp_norm_pow(d, p), 1.0 / p);
  double t = (1.0 + xn) / dn;
  Eigen::ArrayXd w(x.size());
  for (int it = 0; it < 200; ++it) {
    w = x.array() + t * d.array();
    double g, dg;
    if (p == 1.0) {
      g = w.abs().sum() - 1.0;
      dg = (w.sign() * d.array()).sum();
    } else {
      const Eigen::ArrayXd a = w.abs();
      const Eigen::ArrayXd ap = a.pow(p - 1.0);
      g = (ap * a).sum() - 1.0;
      dg = p * (ap * w.sign() * d.array()).sum();
    }
    if (!(g > 0.0) || !(dg > 0.0)) break;
    const double step = g / dg;
    t -= step;
    if (step <= 1e-15 * t) break;
  }
  // stay on the inside of the boundary
  return std::max(0.0, t * (1.0 - 1e-14));
}

void hit_and_run_step(Eigen::VectorXd& x, double p, Rng& rng, std::normal_distribution<double>& normal,
                      std::uniform_real_distribution<double>& unif) {
  Eigen::VectorXd d(x.size());
  for (Eigen::Index i = 0; i < d.size(); ++i) d[i] = normal(rng);
  d.normalize();
  const double t_hi = chord_end(x, d, p);
  const double t_lo = -chord_end(x, (-d).eval(), p);
  x += (t_lo + (t_hi - t_lo) * unif(rng)) * d;
}

}  // namespace

Eigen::VectorXd hit_and_run_raw(const BodySpec& body, int M, int steps, Rng& rng) {
  if (!(body.p >= 1.0)) throw std::invalid_argument("hit_and_run_raw: p must be >= 1");
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> unif;
  Eigen::VectorXd x = Eigen::VectorXd::Zero(M);
  for (int s = 0; s < steps; ++s) hit_and_run_step(x, body.p, rng, normal, unif);
  return x;
}

// ---------------------------------------------------------------------------
// Calibration

double isotropy_scale(const SamplerSpec& spec, CalibrationCache& cache) {
  validate(spec);
  const auto key = calibration_key(spec);
  if (!key) return 1.0;
  if (auto hit = cache.find(*key)) return hit->scale;

  const int M = spec.dimension;
  Rng rng = make_rng(fnv1a(*key), stream::calibration);
  double sum = 0.0;
  std::int64_t draws = 0;
  if (const auto* b = std::get_if<LpBall>(&spec.kind)) {
    draws = std::clamp<std::int64_t>(static_cast<std::int64_t>(kPilotCoordinates / M), kPilotMinDraws, kPilotMaxDraws);
    for (std::int64_t k = 0; k < draws; ++k) sum += lp_ball_raw(b->p, M, rng).squaredNorm();
  } else if (const auto* h = std::get_if<HitAndRun>(&spec.kind)) {
    draws = kChainPilotDraws;
    std::normal_distribution<double> normal;
    std::uniform_real_distribution<double> unif;
    Eigen::VectorXd x = hit_and_run_raw(h->body, M, effective_burn_in(*h, M), rng);
    const int thin = effective_thinning(*h, M);
    for (std::int64_t k = 0; k < draws; ++k) {
      for (int s = 0; s < thin; ++s) hit_and_run_step(x, h->body.p, rng, normal, unif);
      sum += x.squaredNorm();
    }
  }
  const double second_moment = sum / (static_cast<double>(draws) * M);
  const double scale = 1.0 / std::sqrt(second_moment);
  cache.insert(*key, {scale, draws});
  return scale;
}

// ---------------------------------------------------------------------------
// Column sampling

ColumnSampler::ColumnSampler(SamplerSpec spec, CalibrationCache& cache) : spec_(std::move(spec)) {
  validate(spec_);
  scale_ = isotropy_scale(spec_, cache);
}

void ColumnSampler::sample(Rng& rng, std::span<double> out) const {
  const int M = spec_.dimension;
  if (static_cast<int>(out.size()) != M) throw std::invalid_argument("ColumnSampler: output size mismatch");
  std::visit(overloaded{
                 [&](const Gaussian&) {
                   std::normal_distribution<double> normal;
                   for (double& v : out) v = normal(rng);
                 },
                 [&](const LaplaceProduct&) {
                   // Laplace with b = 1/sqrt(2) has unit variance.
                   std::exponential_distribution<double> expo(1.0);
                   std::bernoulli_distribution coin(0.5);
                   for (double& v : out) {
                     const double e = expo(rng) * std::numbers::sqrt2 / 2.0;
                     v = coin(rng) ? e : -e;
                   }
                 },
                 [&](const LpBall& b) {
                   const Eigen::VectorXd u = lp_ball_raw(b.p, M, rng);
                   for (int i = 0; i < M; ++i) out[i] = scale_ * u[i];
                 },
                 [&](const HitAndRun& h) {
                   const Eigen::VectorXd u = hit_and_run_raw(h.body, M, effective_burn_in(h, M), rng);
                   std::bernoulli_distribution coin(0.5);
                   for (int i = 0; i < M; ++i) out[i] = (coin(rng) ? scale_ : -scale_) * u[i];
                 },
             },
             spec_.kind);
}

Eigen::VectorXd ColumnSampler::sample(Rng& rng) const {
  Eigen::VectorXd v(spec_.dimension);
  sample(rng, std::span<double>(v.data(), static_cast<std::size_t>(v.size())));
  return v;
}

Eigen::VectorXd sample_column(const SamplerSpec& spec, Rng& rng) { return ColumnSampler(spec).sample(rng); }

MatrixDraw assemble_X(const ColumnSampler& sampler, int N, std::uint64_t seed) {
  if (N < 1) throw std::invalid_argument("assemble_X: N must be >= 1");
  const int M = sampler.dimension();
  MatrixDraw draw{Eigen::MatrixXd(M, N), seed, sampler.spec()};
  const double inv_sqrt_n = 1.0 / std::sqrt(static_cast<double>(N));
  for (int j = 0; j < N; ++j) {
    Rng rng = make_rng(seed, stream::column, static_cast<std::uint64_t>(j));
    std::span<double> col(draw.X.col(j).data(), static_cast<std::size_t>(M));
    sampler.sample(rng, col);
    for (double& v : col) v *= inv_sqrt_n;
  }
  return draw;
}

MatrixDraw assemble_X(const SamplerSpec& spec, int N, std::uint64_t seed) {
  return assemble_X(ColumnSampler(spec), N, seed);
}

MatrixDraw wishart_partner(int M, int N, std::uint64_t seed) {
  return assemble_X(SamplerSpec{Gaussian{}, M}, N, substream_seed(seed, stream::wishart));
}

Eigen::MatrixXd interpolate(const Eigen::MatrixXd& X, const Eigen::MatrixXd& Xw, double t) {
  if (!(t >= 0.0 && t <= 1.0)) throw std::invalid_argument("interpolate: t must lie in [0, 1]");
  if (X.rows() != Xw.rows() || X.cols() != Xw.cols()) throw std::invalid_argument("interpolate: shape mismatch");
  if (t == 0.0) return X;
  if (t == 1.0) return Xw;
  return std::sqrt(1.0 - t) * X + std::sqrt(t) * Xw;
}

}  // namespace lcrm
