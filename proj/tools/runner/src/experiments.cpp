#include "lcrm/runner/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <map>
#include <thread>

#include "lcrm/ensemble.hpp"
#include "lcrm/format.hpp"
#include "lcrm/green.hpp"
#include "lcrm/mp_model.hpp"
#include "lcrm/rng.hpp"
#include "lcrm/sampling.hpp"
#include "lcrm/stats.hpp"
#include "lcrm/tw_dist.hpp"
#include "lcrm/runner/pool.hpp"

#ifndef LCRM_VERSION
#define LCRM_VERSION "unknown"
#endif

namespace lcrm::runner {

int default_threads() {
  if (const char* env = std::getenv("LCRM_THREADS"); env && *env) {
    const int v = std::atoi(env);
    if (v > 0) return v;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

std::uint64_t trial_seed(std::uint64_t seed, std::uint64_t group, std::uint64_t trial) {
  return substream_seed(substream_seed(seed, stream::trial, group), stream::trial, trial);
}

namespace {

using Clock = std::chrono::steady_clock;

struct Context {
  const ExperimentConfig& cfg;
  int threads;
  const RunOptions& opts;
  ExperimentResult result;
  Clock::time_point start = Clock::now();

  Context(const ExperimentConfig& c, const RunOptions& o)
      : cfg(c), threads(o.threads > 0 ? o.threads : default_threads()), opts(o) {
    validate(c);
    result.config = c;
    result.version = LCRM_VERSION;
  }

  void log(const std::string& msg) const {
    if (opts.log) opts.log(msg);
  }

  void row(const std::string& group, int trial, std::uint64_t seed, const std::string& metric, double value) {
    result.rows.push_back({group, trial, seed, metric, value});
  }
  void agg(const std::string& group, const std::string& metric, double value) {
    result.aggregates.push_back({group, -1, 0, metric, value});
  }
  void verdict(std::string name, bool pass, double value, double threshold, std::string detail = {}) {
    result.verdicts.push_back({std::move(name), pass, value, threshold, std::move(detail)});
  }

  ExperimentResult finish() {
    result.wall_seconds = std::chrono::duration<double>(Clock::now() - start).count();
    return std::move(result);
  }
};

std::string group_name(const char* key, double v) {
  std::string s = format_double(v);
  return std::string(key) + "=" + s;
}

std::string eps_name(double e) { return format_double(e); }

double ks_tolerance(const ExperimentConfig& cfg, double fallback) { return cfg.tolerance.ks.value_or(fallback); }

std::vector<std::pair<double, double>> curve(double lo, double hi, int n, const std::function<double(double)>& f) {
  std::vector<std::pair<double, double>> out;
  for (int k = 0; k <= n; ++k) {
    const double x = lo + (hi - lo) * k / n;
    out.emplace_back(x, f(x));
  }
  return out;
}

bool decreasing(const std::vector<double>& v) {
  if (v.size() < 2) return true;
  for (std::size_t i = 1; i < v.size(); ++i)
    if (v[i] > v[i - 1]) return false;
  return v.back() < v.front();
}

SpectrumOptions spec_opts(std::uint64_t seed, int verify = 5) {
  SpectrumOptions o;
  o.seed = seed;
  o.verify_pairs = verify;
  return o;
}

}  // namespace

// ---------------------------------------------------------------------------

ExperimentResult run_mp_check(const ExperimentConfig& cfg, const RunOptions& options) {
  Context ctx(cfg, options);
  const int M = cfg.M, N = cfg.N;
  const MpModel model(M, N);
  const ColumnSampler sampler(cfg.sampler.spec(M));
  const std::string g = group_name("N", N);
  std::vector<double> ks(cfg.trials), top(cfg.trials), bottom(cfg.trials);
  std::vector<double> last;
  ctx.log("mp-check: " + std::to_string(cfg.trials) + " trials, M=" + std::to_string(M) + " N=" + std::to_string(N));
  parallel_for(cfg.trials, ctx.threads, [&](int t) {
    const auto seed = trial_seed(cfg.seed, 0, t);
    const auto s = h_spectrum(assemble_X(sampler, N, seed).X, spec_opts(seed));
    ks[t] = ks_distance(s.eigenvalues, [&](double x) { return mp_cdf(x, model, 1); });
    top[t] = s.eigenvalues.front();
    bottom[t] = s.eigenvalues[std::min(M, N) - 1];
    if (t == cfg.trials - 1) last = s.eigenvalues;
  });
  for (int t = 0; t < cfg.trials; ++t) {
    const auto seed = trial_seed(cfg.seed, 0, t);
    ctx.row(g, t, seed, "ks", ks[t]);
    ctx.row(g, t, seed, "lambda_max", top[t]);
    ctx.row(g, t, seed, "lambda_min_nonzero", bottom[t]);
  }
  const auto ms = mean_se(ks);
  const double tol = ks_tolerance(cfg, 0.02);
  ctx.agg(g, "mean_ks", ms.mean);
  ctx.agg(g, "se_ks", ms.se);
  ctx.agg(g, "max_ks", *std::max_element(ks.begin(), ks.end()));
  ctx.agg(g, "lambda_plus", model.lambda_plus());
  ctx.agg(g, "lambda_minus", model.lambda_minus());
  ctx.verdict("mean_ks", ms.mean <= tol, ms.mean, tol, "mean KS distance of the ESD to the MP law");

  HistogramPanel h;
  h.title = "Eigenvalues of XX* vs MP density (y=" + format_double(model.y()) + ")";
  h.samples = last;
  if (model.y() > 1.0) std::erase_if(h.samples, [](double v) { return v <= 1e-12; });
  const double cm = model.continuous_mass(1);
  h.curve = curve(model.lambda_minus(), model.lambda_plus(), 300,
                  [&](double x) { return mp_density(x, model, 1) / cm; });
  ctx.result.figures.push_back({"mp_check_density", {h}});
  return ctx.finish();
}

ExperimentResult run_rigidity(const ExperimentConfig& cfg, const RunOptions& options) {
  Context ctx(cfg, options);
  const std::vector<int> Ns = cfg.Ns.empty() ? std::vector<int>{cfg.N} : cfg.Ns;
  std::vector<double> med_edge;
  RigidityProfile last_profile;
  for (std::size_t gi = 0; gi < Ns.size(); ++gi) {
    const int N = Ns[gi];
    const int M = static_cast<int>(std::lround(cfg.y * N));
    const std::string g = group_name("N", N);
    ctx.log("rigidity: N=" + std::to_string(N) + " M=" + std::to_string(M));
    const auto gamma = classical_locations(M, N);
    const ColumnSampler sampler(cfg.sampler.spec(M));
    std::vector<RigidityProfile> prof(cfg.trials);
    parallel_for(cfg.trials, ctx.threads, [&](int t) {
      const auto seed = trial_seed(cfg.seed, gi, t);
      const auto s = h_spectrum(assemble_X(sampler, N, seed).X, spec_opts(seed));
      prof[t] = rigidity_profile(s.eigenvalues, gamma, N);
    });
    std::vector<double> maxr, edge;
    for (int t = 0; t < cfg.trials; ++t) {
      const auto seed = trial_seed(cfg.seed, gi, t);
      ctx.row(g, t, seed, "max_ratio", prof[t].max_ratio);
      ctx.row(g, t, seed, "argmax", prof[t].argmax);
      ctx.row(g, t, seed, "edge_deviation", prof[t].deviation.front());
      maxr.push_back(prof[t].max_ratio);
      edge.push_back(prof[t].deviation.front());
    }
    const double threshold = std::pow(static_cast<double>(N), cfg.tolerance.slack_exponent);
    const double med = median(maxr);
    med_edge.push_back(median(edge));
    ctx.agg(g, "median_max_ratio", med);
    ctx.agg(g, "median_edge_deviation", med_edge.back());
    ctx.agg(g, "threshold", threshold);
    ctx.verdict("median_max_ratio[" + g + "]", med <= threshold, med, threshold,
                "median over trials of max_j |lambda_j - gamma_j| / budget_j");
    if (gi + 1 == Ns.size()) last_profile = prof.back();
  }
  if (Ns.size() >= 3) {
    const auto fit = scaling_exponent(Ns, med_edge);
    ctx.agg("", "edge_slope", fit.slope);
    ctx.agg("", "edge_slope_ci_low", fit.ci_low);
    ctx.agg("", "edge_slope_ci_high", fit.ci_high);
    const bool ok = fit.slope >= cfg.tolerance.slope_low && fit.slope <= cfg.tolerance.slope_high;
    ctx.verdict("edge_slope", ok, fit.slope, cfg.tolerance.slope_high,
                "log-log slope of median |lambda_1 - gamma_1| in [" + format_double(cfg.tolerance.slope_low) + ", " +
                    format_double(cfg.tolerance.slope_high) + "]");
  }
  LinePanel p;
  p.title = "Rigidity ratio by index (N=" + std::to_string(Ns.back()) + ", last trial)";
  p.xlabel = "j";
  p.ylabel = "ratio";
  for (std::size_t j = 0; j < last_profile.ratio.size(); ++j) {
    p.x.push_back(static_cast<double>(j + 1));
    p.y.push_back(last_profile.ratio[j]);
  }
  Figure fig{"rigidity_ratio", {p}};
  if (Ns.size() >= 2) {
    LinePanel s;
    s.title = "Median |lambda_1 - gamma_1| vs N";
    s.xlabel = "log10 N";
    s.ylabel = "deviation";
    s.log_y = true;
    for (std::size_t i = 0; i < Ns.size(); ++i) {
      s.x.push_back(std::log10(static_cast<double>(Ns[i])));
      s.y.push_back(med_edge[i]);
    }
    fig.panels.push_back(s);
  }
  ctx.result.figures.push_back(fig);
  return ctx.finish();
}

ExperimentResult run_local_law(const ExperimentConfig& cfg, const RunOptions& options) {
  Context ctx(cfg, options);
  const int M = cfg.M, N = cfg.N;
  const MpModel model(M, N);
  const auto grid = SpectralDomainGrid::make(model, N, cfg.epsilon, cfg.n_energy, cfg.n_eta);
  const ColumnSampler sampler(cfg.sampler.spec(M));
  const double threshold = std::pow(static_cast<double>(N), cfg.tolerance.slack_exponent);
  const std::size_t P = grid.points.size();
  std::vector<double> etas;
  for (int b = 0; b < cfg.n_eta; ++b) etas.push_back(grid.points[static_cast<std::size_t>(b)].imag());

  struct TrialOut {
    std::vector<double> ratio, entry_ratio, refined;
  };
  std::vector<TrialOut> out(cfg.trials);
  ctx.log("local-law: " + std::to_string(P) + " grid points, " + std::to_string(cfg.trials) + " trials");
  parallel_for(cfg.trials, ctx.threads, [&](int t) {
    const auto seed = trial_seed(cfg.seed, 0, t);
    const auto X = assemble_X(sampler, N, seed).X;
    const auto probe = local_law_scan(X, model, grid, cfg.index_count, seed);
    auto& o = out[t];
    for (const auto& p : probe.points) {
      o.ratio.push_back(p.ratio());
      o.entry_ratio.push_back(p.entrywise_ratio());
    }
    auto s = h_spectrum(X, spec_opts(seed));
    for (double kappa : cfg.kappas)
      for (double eta : etas) o.refined.push_back(edge_refined_residual(s, model, model.lambda_plus() + kappa, eta).ratio());
  });

  const std::string g = group_name("N", N);
  std::size_t pass = 0, total = 0, epass = 0, rpass = 0, rtotal = 0;
  std::vector<std::vector<double>> per_point(P);
  for (int t = 0; t < cfg.trials; ++t) {
    const auto seed = trial_seed(cfg.seed, 0, t);
    const auto& o = out[t];
    std::size_t tp = 0, te = 0, tr = 0;
    for (std::size_t k = 0; k < P; ++k) {
      tp += o.ratio[k] <= threshold;
      te += o.entry_ratio[k] <= threshold;
      per_point[k].push_back(o.ratio[k]);
    }
    for (double r : o.refined) tr += r <= threshold;
    pass += tp, epass += te, total += P, rpass += tr, rtotal += o.refined.size();
    ctx.row(g, t, seed, "max_ratio", *std::max_element(o.ratio.begin(), o.ratio.end()));
    ctx.row(g, t, seed, "pass_fraction", static_cast<double>(tp) / P);
    ctx.row(g, t, seed, "entrywise_max_ratio", *std::max_element(o.entry_ratio.begin(), o.entry_ratio.end()));
    ctx.row(g, t, seed, "refined_max_ratio",
            o.refined.empty() ? 0.0 : *std::max_element(o.refined.begin(), o.refined.end()));
  }
  const double frac = static_cast<double>(pass) / total;
  const double rfrac = rtotal ? static_cast<double>(rpass) / rtotal : 1.0;
  ctx.agg(g, "grid_points", static_cast<double>(P));
  ctx.agg(g, "threshold", threshold);
  ctx.agg(g, "pass_fraction", frac);
  ctx.agg(g, "entrywise_pass_fraction", static_cast<double>(epass) / total);
  ctx.agg(g, "refined_pass_fraction", rfrac);
  std::vector<double> med(P);
  for (std::size_t k = 0; k < P; ++k) med[k] = median(per_point[k]);
  ctx.agg(g, "median_point_ratio_max", *std::max_element(med.begin(), med.end()));
  ctx.verdict("pass_fraction", frac >= cfg.tolerance.fraction, frac, cfg.tolerance.fraction,
              "fraction of (point, trial) pairs with |m2N - m2| N eta <= N^slack");
  ctx.verdict("refined_pass_fraction", rfrac >= cfg.tolerance.refined_fraction, rfrac, cfg.tolerance.refined_fraction,
              "edge refined budget, kappa in grid.kappas");

  HeatmapPanel h;
  h.title = "median log10 ratio over D(eps)";
  h.xlabel = "E";
  h.ylabel = "eta (log grid)";
  for (int a = 0; a < cfg.n_energy; ++a) h.x.push_back(grid.points[static_cast<std::size_t>(a * cfg.n_eta)].real());
  h.y = etas;
  h.values.resize(P);
  for (int a = 0; a < cfg.n_energy; ++a)
    for (int b = 0; b < cfg.n_eta; ++b)
      h.values[static_cast<std::size_t>(b * cfg.n_energy + a)] = std::log10(med[static_cast<std::size_t>(a * cfg.n_eta + b)]);
  ctx.result.figures.push_back({"local_law_heatmap", {h}});
  return ctx.finish();
}

ExperimentResult run_edge_tw(const ExperimentConfig& cfg, const RunOptions& options) {
  Context ctx(cfg, options);
  const int M = cfg.M, N = cfg.N;
  const ColumnSampler sampler(cfg.sampler.spec(M));
  const auto& table = tw1_table();
  std::vector<double> stat(cfg.trials), top(cfg.trials);
  ctx.log("edge-tw: " + std::to_string(cfg.trials) + " trials");
  parallel_for(cfg.trials, ctx.threads, [&](int t) {
    const auto seed = trial_seed(cfg.seed, 0, t);
    const auto s = h_spectrum(assemble_X(sampler, N, seed).X, spec_opts(seed, 1));
    top[t] = s.largest();
    stat[t] = edge_rescale(top[t], M, N);
  });
  const std::string g = group_name("N", N);
  for (int t = 0; t < cfg.trials; ++t) {
    const auto seed = trial_seed(cfg.seed, 0, t);
    ctx.row(g, t, seed, "lambda_1", top[t]);
    ctx.row(g, t, seed, "rescaled", stat[t]);
  }
  const double ks = ks_distance(stat, [&](double s) { return table.cdf(s); });
  const auto ms = mean_se(stat);
  double var = 0.0;
  for (double s : stat) var += (s - ms.mean) * (s - ms.mean);
  var /= std::max(1, cfg.trials - 1);
  const double tol = ks_tolerance(cfg, 0.05);
  ctx.agg(g, "ks", ks);
  ctx.agg(g, "mean_rescaled", ms.mean);
  ctx.agg(g, "var_rescaled", var);
  ctx.agg(g, "tw1_mean", table.mean());
  ctx.agg(g, "tw1_variance", table.variance());
  ctx.verdict("ks_tw1", ks <= tol, ks, tol, "KS of the rescaled largest eigenvalue against TW1");

  HistogramPanel h;
  h.title = "Rescaled lambda_1 vs TW1 density";
  h.samples = stat;
  h.curve = curve(-6.0, 4.0, 300, [&](double s) { return table.density(s); });
  ctx.result.figures.push_back({"edge_tw_histogram", {h}});
  return ctx.finish();
}

ExperimentResult run_spike(const ExperimentConfig& cfg, const RunOptions& options) {
  Context ctx(cfg, options);
  const int M = cfg.M, N = cfg.N;
  const double y = static_cast<double>(M) / N;
  const SpikeList spikes(cfg.spikes);
  spikes.require_supercritical(y, 0.0);
  if (spikes.size() > 1) spikes.require_separated(N, cfg.epsilon);
  const std::size_t r = spikes.size();
  const ColumnSampler sampler(cfg.sampler.spec(M));

  std::vector<SpikePrediction> pred;
  for (std::size_t i = 0; i < r; ++i) {
    ctx.log("spike: pilot for d=" + format_double(spikes.values()[i]));
    pred.push_back(spike_prediction(spikes.values()[i], y, N, sampler, cfg.pilot,
                                    substream_seed(cfg.seed, stream::pilot, i), static_cast<int>(i)));
  }
  std::vector<std::vector<double>> lambda(r, std::vector<double>(cfg.trials)), phi = lambda;
  ctx.log("spike: " + std::to_string(cfg.trials) + " trials");
  parallel_for(cfg.trials, ctx.threads, [&](int t) {
    const auto seed = trial_seed(cfg.seed, 0, t);
    const auto s = spiked_spectrum(assemble_X(sampler, N, seed).X, spikes, spec_opts(seed));
    for (std::size_t i = 0; i < r; ++i) {
      lambda[i][t] = s.eigenvalues[i];
      phi[i][t] = phi_statistic(s.eigenvalues[i], pred[i], y, N);
    }
  });
  const double tol = ks_tolerance(cfg, 0.05);
  Figure fig{"spike_phi", {}};
  for (std::size_t i = 0; i < r; ++i) {
    const std::string g = "spike=" + std::to_string(i + 1);
    const auto& p = pred[i];
    for (int t = 0; t < cfg.trials; ++t) {
      const auto seed = trial_seed(cfg.seed, 0, t);
      ctx.row(g, t, seed, "lambda", lambda[i][t]);
      ctx.row(g, t, seed, "phi", phi[i][t]);
    }
    const double scale = std::sqrt((p.d * p.d - y) / N);
    const auto ml = mean_se(lambda[i]);
    const double predicted = p.theta + p.a * scale;
    const double se = std::hypot(ml.se, p.a_se * scale);
    const double ks = ks_distance(phi[i], normal_cdf);
    const auto mp = mean_se(phi[i]);
    ctx.agg(g, "d", p.d);
    ctx.agg(g, "theta", p.theta);
    ctx.agg(g, "a", p.a);
    ctx.agg(g, "a_se", p.a_se);
    ctx.agg(g, "b", p.b);
    ctx.agg(g, "kurtosis", p.kurtosis);
    ctx.agg(g, "mixed_moment", p.mixed_moment);
    ctx.agg(g, "pilot", static_cast<double>(p.pilot));
    ctx.agg(g, "mean_lambda", ml.mean);
    ctx.agg(g, "se_lambda", ml.se);
    ctx.agg(g, "predicted_mean", predicted);
    ctx.agg(g, "mean_phi", mp.mean);
    ctx.agg(g, "ks_phi", ks);
    const double gap = std::abs(ml.mean - predicted);
    ctx.verdict("mean_lambda[" + g + "]", gap <= cfg.tolerance.se_multiplier * se, gap, cfg.tolerance.se_multiplier * se,
                "|mean lambda - (theta + a sqrt((d^2 - y)/N))| within SE multiple");
    ctx.verdict("ks_phi[" + g + "]", ks <= tol, ks, tol, "KS of the studentized outlier against N(0,1)");

    HistogramPanel h;
    h.title = "Studentized Phi, d=" + format_double(p.d);
    h.samples = phi[i];
    h.curve = curve(-4.0, 4.0, 200, [](double s) { return std::exp(-0.5 * s * s) / std::sqrt(2.0 * M_PI); });
    fig.panels.push_back(h);
  }
  ctx.result.figures.push_back(fig);
  return ctx.finish();
}

ExperimentResult run_concentration(const ExperimentConfig& cfg, const RunOptions& options) {
  Context ctx(cfg, options);
  const std::vector<int> Ms = cfg.Ms.empty() ? std::vector<int>{cfg.M} : cfg.Ms;
  const std::vector<double> eps = {0.05, 0.1, 0.2};
  std::map<double, std::vector<double>> lin, quad;
  Figure fig{"concentration", {}};
  for (std::size_t gi = 0; gi < Ms.size(); ++gi) {
    const int M = Ms[gi];
    const int N = static_cast<int>(std::lround(M / cfg.y));
    const std::string g = group_name("M", M);
    ctx.log("concentration: M=" + std::to_string(M) + " N=" + std::to_string(N));
    const ColumnSampler sampler(cfg.sampler.spec(M));
    const Eigen::VectorXd A = Eigen::VectorXd::Ones(M);
    Eigen::MatrixXd B(M, M);
    {
      Rng rng = make_rng(cfg.seed, stream::probe, static_cast<std::uint64_t>(M));
      for (int i = 0; i < M; ++i)
        for (int j = i; j < M; ++j) B(i, j) = B(j, i) = (rng() >> 63) ? 1.0 : -1.0;
    }
    LinearTailReport lr;
    QuadraticTailReport qr;
    ThinShellReport ts;
    // Three independent Monte Carlo streams; run them side by side.
    parallel_for(3, ctx.threads, [&](int job) {
      if (job == 0) lr = hw_linear_test(sampler, A, N, cfg.tail_trials, trial_seed(cfg.seed, 3 * gi, 0), eps);
      if (job == 1) qr = hw_quadratic_test(sampler, B, N, cfg.tail_trials, trial_seed(cfg.seed, 3 * gi + 1, 0), eps);
      if (job == 2) ts = thin_shell(sampler, N, cfg.tail_trials, trial_seed(cfg.seed, 3 * gi + 2, 0));
    });
    for (std::size_t e = 0; e < eps.size(); ++e) {
      ctx.agg(g, "linear_exceedance_eps" + eps_name(eps[e]), lr.exceedance[e]);
      ctx.agg(g, "quadratic_exceedance_eps" + eps_name(eps[e]), qr.exceedance[e]);
      lin[eps[e]].push_back(lr.exceedance[e]);
      quad[eps[e]].push_back(qr.exceedance[e]);
    }
    ctx.agg(g, "quadratic_fit_rate", qr.fit_rate);
    ctx.agg(g, "quadratic_fit_r2", qr.fit_r2);
    ctx.agg(g, "quadratic_variance_ratio", qr.variance / (qr.hs_norm * qr.hs_norm / (static_cast<double>(N) * N)));
    ctx.agg(g, "thin_shell_constant", ts.constant);
    ctx.verdict("thin_shell[" + g + "]", ts.constant < cfg.tolerance.thin_shell, ts.constant, cfg.tolerance.thin_shell,
                "Var(||x||^2) N^2 / M");
    bool monotone = true;
    for (std::size_t k = 1; k < qr.t_exceedance.size(); ++k) monotone &= qr.t_exceedance[k] <= qr.t_exceedance[k - 1];
    ctx.agg(g, "quadratic_tail_monotone", monotone ? 1.0 : 0.0);
    ctx.verdict("quadratic_tail_monotone[" + g + "]", monotone, monotone, 1.0, "P(|S| >= t) non-increasing on the t grid");
    if (gi + 1 == Ms.size()) {
      LinePanel p;
      p.title = "Quadratic form tail, M=" + std::to_string(M);
      p.xlabel = "shape min(Nt/|B|_HS, sqrt(Nt/|B|))";
      p.ylabel = "P(|S| >= t)";
      p.log_y = true;
      p.x = qr.shape;
      p.y = qr.t_exceedance;
      fig.panels.push_back(p);
    }
  }
  for (double e : eps) {
    const bool dl = decreasing(lin[e]), dq = decreasing(quad[e]);
    ctx.verdict("linear_decreasing[eps=" + eps_name(e) + "]", dl, lin[e].back(), lin[e].front(),
                "exceedance non-increasing in M and strictly lower at the largest M");
    ctx.verdict("quadratic_decreasing[eps=" + eps_name(e) + "]", dq, quad[e].back(), quad[e].front(),
                "exceedance non-increasing in M and strictly lower at the largest M");
  }
  {
    LinePanel p;
    p.title = "Linear form exceedance at eps=0.1";
    p.xlabel = "M";
    p.ylabel = "exceedance";
    for (std::size_t i = 0; i < Ms.size(); ++i) {
      p.x.push_back(Ms[i]);
      p.y.push_back(lin[0.1][i]);
    }
    fig.panels.insert(fig.panels.begin(), p);
  }

  // Rademacher quadratic CLT on a realistic draw at (M, N).
  {
    const int M = cfg.M, N = cfg.N;
    const MpModel model(M, N);
    const double d = cfg.spikes.empty() ? 2.0 : cfg.spikes.front();
    const double z = theta(d, model.y());
    const ColumnSampler sampler(cfg.sampler.spec(M));
    const auto X = assemble_X(sampler, N, trial_seed(cfg.seed, 1000, 0)).X;
    const auto rr = row_removed_resolvent(X, 0, z);
    const auto st = stieltjes_outside(z, model);
    const auto moments = spike_prediction(d, model.y(), N, sampler, 20000, substream_seed(cfg.seed, stream::pilot, 1000));
    const double b_sq = 2.0 * (st.dm2 - st.m2 * st.m2) + st.m2 * st.m2 * (moments.kurtosis - 1.0);
    const auto clt = rademacher_quadratic_clt(rr.x_row, rr.G, cfg.sign_trials, trial_seed(cfg.seed, 1001, 0), b_sq);
    const std::string g = group_name("N", N);
    ctx.agg(g, "clt_D2", clt.D2);
    ctx.agg(g, "clt_D2_limit", 2.0 * st.dm2 - 2.0 * st.m2 * st.m2);
    ctx.agg(g, "clt_b_sq", clt.b_sq);
    ctx.agg(g, "clt_empirical_var", clt.empirical_var);
    ctx.agg(g, "clt_ks", clt.ks);
    ctx.verdict("rademacher_clt_ks", clt.ks <= cfg.tolerance.clt_ks, clt.ks, cfg.tolerance.clt_ks,
                "KS of Q1/sqrt(b1^2+b2^2) against N(0, D2/(b1^2+b2^2))");
    HistogramPanel h;
    h.title = "Rademacher quadratic form";
    h.samples = clt.normalized;
    const double sd = std::sqrt(clt.predicted_var);
    h.curve = curve(-4 * sd, 4 * sd, 200,
                    [sd](double s) { return std::exp(-0.5 * s * s / (sd * sd)) / (sd * std::sqrt(2.0 * M_PI)); });
    fig.panels.push_back(h);
  }
  ctx.result.figures.push_back(fig);
  return ctx.finish();
}

ExperimentResult run_interp(const ExperimentConfig& cfg, const RunOptions& options) {
  Context ctx(cfg, options);
  const int M = cfg.M, N = cfg.N;
  const ColumnSampler sampler(cfg.sampler.spec(M));
  const double eta_star = std::pow(static_cast<double>(N), -cfg.phi_star);
  const RegularityConstants constants{cfg.c_V, cfg.C_V};
  const std::size_t T = cfg.t_grid.size();
  struct TrialOut {
    bool exact0 = false, exact1 = false, regular = false;
    RegularityReport rep;
    std::vector<double> edge, second;
  };
  std::vector<TrialOut> out(cfg.trials);
  ctx.log("interp: " + std::to_string(cfg.trials) + " trials");
  parallel_for(cfg.trials, ctx.threads, [&](int t) {
    const auto seed = trial_seed(cfg.seed, 0, t);
    const auto X = assemble_X(sampler, N, seed).X;
    const auto Xw = wishart_partner(M, N, seed).X;
    auto& o = out[t];
    const auto X0 = interpolate(X, Xw, 0.0), X1 = interpolate(X, Xw, 1.0);
    o.exact0 = std::memcmp(X0.data(), X.data(), sizeof(double) * X.size()) == 0;
    o.exact1 = std::memcmp(X1.data(), Xw.data(), sizeof(double) * Xw.size()) == 0;
    for (double tt : cfg.t_grid) {
      const auto Xt = interpolate(X, Xw, tt);
      const auto s = h_spectrum(Xt, spec_opts(seed, 1));
      o.edge.push_back(edge_rescale(s.largest(), M, N));
      o.second.push_back(Xt.squaredNorm() / N);  // mean squared column norm, expected M/N
      if (tt == 0.0) {
        o.rep = eta_star_regularity(s, eta_star, constants);
        o.regular = o.rep.pass();
      }
    }
    if (std::find(cfg.t_grid.begin(), cfg.t_grid.end(), 0.0) == cfg.t_grid.end()) {
      o.rep = eta_star_regularity(h_spectrum(X, spec_opts(seed, 1)), eta_star, constants);
      o.regular = o.rep.pass();
    }
  });
  const std::string g = group_name("N", N);
  int ok0 = 0, ok1 = 0, reg = 0;
  std::vector<std::vector<double>> edge(T), second(T);
  for (int t = 0; t < cfg.trials; ++t) {
    const auto seed = trial_seed(cfg.seed, 0, t);
    const auto& o = out[t];
    ok0 += o.exact0, ok1 += o.exact1, reg += o.regular;
    ctx.row(g, t, seed, "exact_t0", o.exact0);
    ctx.row(g, t, seed, "exact_t1", o.exact1);
    ctx.row(g, t, seed, "regular", o.regular);
    ctx.row(g, t, seed, "regularity_min_i", o.rep.min_i);
    ctx.row(g, t, seed, "regularity_max_i", o.rep.max_i);
    ctx.row(g, t, seed, "regularity_min_ii", o.rep.min_ii);
    ctx.row(g, t, seed, "regularity_max_ii", o.rep.max_ii);
    for (std::size_t k = 0; k < T; ++k) {
      ctx.row(g, t, seed, "rescaled_lambda1_t" + format_double(cfg.t_grid[k]), o.edge[k]);
      edge[k].push_back(o.edge[k]);
      second[k].push_back(o.second[k]);
    }
  }
  LinePanel p;
  p.title = "Mean rescaled lambda_1 along X(t)";
  p.xlabel = "t";
  p.ylabel = "mean rescaled lambda_1";
  for (std::size_t k = 0; k < T; ++k) {
    const std::string tk = format_double(cfg.t_grid[k]);
    ctx.agg(g, "mean_rescaled_lambda1_t" + tk, mean_se(edge[k]).mean);
    ctx.agg(g, "mean_column_norm_sq_t" + tk, mean_se(second[k]).mean);
    p.x.push_back(cfg.t_grid[k]);
    p.y.push_back(mean_se(edge[k]).mean);
  }
  const double rfrac = static_cast<double>(reg) / cfg.trials;
  ctx.agg(g, "regular_fraction", rfrac);
  ctx.agg(g, "eta_star", eta_star);
  ctx.verdict("exact_t0", ok0 == cfg.trials, ok0, cfg.trials, "interpolate(X, Xw, 0) is bitwise X");
  ctx.verdict("exact_t1", ok1 == cfg.trials, ok1, cfg.trials, "interpolate(X, Xw, 1) is bitwise Xw");
  ctx.verdict("regular_fraction", rfrac >= cfg.tolerance.regularity_fraction, rfrac, cfg.tolerance.regularity_fraction,
              "eta*-regularity of the spectrum of H");
  ctx.result.figures.push_back({"interp_edge", {p}});
  return ctx.finish();
}

ExperimentResult run_green_compare(const ExperimentConfig& cfg, const RunOptions& options) {
  Context ctx(cfg, options);
  const int M = cfg.M, N = cfg.N;
  const MpModel model(M, N);
  const double E = model.lambda_plus();
  const double eta0 = std::pow(static_cast<double>(N), -2.0 / 3.0 - cfg.epsilon);
  const ColumnSampler sa(cfg.sampler.spec(M)), sb(cfg.reference.spec(M));
  std::vector<SpectralSample> A(cfg.trials), B(cfg.trials);
  const int probes = std::min(cfg.probe_trials, cfg.trials);
  std::vector<EdgeGreenBounds> bounds(static_cast<std::size_t>(probes));
  ctx.log("green-compare: " + std::to_string(cfg.trials) + " trials per ensemble");
  parallel_for(2 * cfg.trials, ctx.threads, [&](int k) {
    const int which = k % 2, t = k / 2;
    const auto seed = trial_seed(cfg.seed, which, t);
    const auto X = assemble_X(which == 0 ? sa : sb, N, seed).X;
    (which == 0 ? A : B)[t] = h_spectrum(X, spec_opts(seed, 1));
    if (which == 0 && t < probes) bounds[t] = edge_green_bounds(X, E, cfg.epsilon);
  });
  auto F = [](double x) { return x; };
  const auto r = green_comparison_statistic(A, B, E, eta0, F);
  const auto r1 = green_comparison_statistic(A, B, E, eta0, [](double) { return 1.0; });
  for (int t = 0; t < cfg.trials; ++t) {
    for (int which = 0; which < 2; ++which) {
      const auto& s = (which == 0 ? A : B)[t];
      ctx.row(which == 0 ? "A" : "B", t, trial_seed(cfg.seed, which, t), "n_eta_im_m2N",
              N * eta0 * m2N_from_h(s, cplx(E, eta0)).imag());
    }
  }
  const double budget = cfg.tolerance.se_multiplier * r.se_diff + std::pow(static_cast<double>(N), cfg.tolerance.comparison_exponent);
  ctx.agg("", "E", E);
  ctx.agg("", "eta0", eta0);
  ctx.agg("A", "mean", r.mean_a);
  ctx.agg("A", "se", r.se_a);
  ctx.agg("B", "mean", r.mean_b);
  ctx.agg("B", "se", r.se_b);
  ctx.agg("", "diff", r.diff);
  ctx.agg("", "se_diff", r.se_diff);
  ctx.agg("", "diff_constant_F", r1.diff);
  ctx.verdict("comparison", std::abs(r.diff) <= budget, std::abs(r.diff), budget,
              "|E_A F - E_B F| <= SE multiple + N^exponent, F(x) = x");
  if (probes > 0) {
    const double n13 = std::cbrt(static_cast<double>(N));
    const double lim = std::pow(static_cast<double>(N), 0.15);
    int q_ok = 0, d_ok = 0;
    double sym = 0.0;
    for (int t = 0; t < probes; ++t) {
      const auto& b = bounds[t];
      const auto seed = trial_seed(cfg.seed, 0, t);
      ctx.row("A", t, seed, "q_form_scaled", b.q_form / n13);
      ctx.row("A", t, seed, "diag_dev_scaled", b.diag_dev * n13);
      ctx.row("A", t, seed, "offdiag_max", b.offdiag_max);
      ctx.row("A", t, seed, "sq_entry_max", b.sq_entry_max);
      q_ok += b.q_form / n13 <= lim;
      d_ok += b.diag_dev * n13 <= lim;
      sym = std::max(sym, b.symmetry_defect);
    }
    ctx.agg("A", "q_form_pass_fraction", static_cast<double>(q_ok) / probes);
    ctx.agg("A", "diag_dev_pass_fraction", static_cast<double>(d_ok) / probes);
    ctx.agg("A", "symmetry_defect_max", sym);
  }
  HistogramPanel ha, hb;
  ha.title = "N eta0 Im m2N, ensemble A (" + cfg.sampler.kind + ")";
  hb.title = "N eta0 Im m2N, ensemble B (" + cfg.reference.kind + ")";
  for (int t = 0; t < cfg.trials; ++t) {
    ha.samples.push_back(N * eta0 * m2N_from_h(A[t], cplx(E, eta0)).imag());
    hb.samples.push_back(N * eta0 * m2N_from_h(B[t], cplx(E, eta0)).imag());
  }
  ctx.result.figures.push_back({"green_compare", {ha, hb}});
  return ctx.finish();
}

ExperimentResult run(const ExperimentConfig& cfg, const RunOptions& options) {
  if (cfg.calibration_cache && std::filesystem::exists(*cfg.calibration_cache))
    CalibrationCache::global().load(*cfg.calibration_cache);
  const auto& e = cfg.experiment;
  if (e == "mp-check") return run_mp_check(cfg, options);
  if (e == "rigidity") return run_rigidity(cfg, options);
  if (e == "local-law") return run_local_law(cfg, options);
  if (e == "edge-tw") return run_edge_tw(cfg, options);
  if (e == "spike") return run_spike(cfg, options);
  if (e == "concentration") return run_concentration(cfg, options);
  if (e == "interp") return run_interp(cfg, options);
  if (e == "green-compare") return run_green_compare(cfg, options);
  throw ConfigError({"experiment: unknown experiment '" + e + "'"});
}

}  // namespace lcrm::runner
