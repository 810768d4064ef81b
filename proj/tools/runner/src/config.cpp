#include "lcrm/runner/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace lcrm::runner {

using nlohmann::json;

namespace {

std::string join(const std::vector<std::string>& lines) {
  std::string out = "invalid configuration:";
  for (const auto& l : lines) out += "\n  - " + l;
  return out;
}

class Reader {
 public:
  Reader(const json& obj, std::string prefix, std::vector<std::string>& problems)
      : obj_(obj), prefix_(std::move(prefix)), problems_(problems) {}

  template <class T>
  void get(const char* key, T& out) {
    seen_.insert(key);
    if (!obj_.contains(key)) return;
    try {
      out = obj_.at(key).get<T>();
    } catch (const json::exception&) {
      problems_.push_back(prefix_ + key + ": wrong type (" + std::string(obj_.at(key).type_name()) + ")");
    }
  }

  template <class T>
  void get(const char* key, std::optional<T>& out) {
    seen_.insert(key);
    if (!obj_.contains(key)) return;
    try {
      out = obj_.at(key).get<T>();
    } catch (const json::exception&) {
      problems_.push_back(prefix_ + key + ": wrong type (" + std::string(obj_.at(key).type_name()) + ")");
    }
  }

  bool has(const char* key) const { return obj_.contains(key); }
  const json& sub(const char* key) {
    seen_.insert(key);
    return obj_.at(key);
  }

  void reject_unknown() {
    for (const auto& [k, v] : obj_.items()) {
      if (!seen_.count(k)) problems_.push_back(prefix_ + k + ": unknown key");
    }
  }

 private:
  const json& obj_;
  std::string prefix_;
  std::vector<std::string>& problems_;
  std::set<std::string> seen_;
};

void read_sampler(const json& j, const std::string& name, SamplerConfig& s, std::vector<std::string>& problems) {
  if (!j.is_object()) {
    problems.push_back(name + ": must be an object");
    return;
  }
  Reader r(j, name + ".", problems);
  r.get("kind", s.kind);
  r.get("p", s.p);
  r.get("burn_in", s.burn_in);
  r.get("thinning", s.thinning);
  r.reject_unknown();
}

void check_sampler(const SamplerConfig& s, const std::string& name, int M, std::vector<std::string>& problems) {
  static const std::set<std::string> kinds = {"gaussian", "laplace_product", "lp_ball", "hit_and_run"};
  if (!kinds.count(s.kind)) {
    problems.push_back(name + ".kind: unknown sampler '" + s.kind + "'");
    return;
  }
  if (M < 1) return;
  try {
    lcrm::validate(s.spec(M));
  } catch (const std::exception& e) {
    problems.push_back(name + ": " + e.what());
  }
}

json sampler_json(const SamplerConfig& s) {
  json j = {{"kind", s.kind}};
  if (s.kind == "lp_ball" || s.kind == "hit_and_run") j["p"] = s.p;
  if (s.kind == "hit_and_run") {
    j["burn_in"] = s.burn_in;
    j["thinning"] = s.thinning;
  }
  return j;
}

}  // namespace

ConfigError::ConfigError(std::vector<std::string> problems) : std::runtime_error(join(problems)), problems_(std::move(problems)) {}

SamplerSpec SamplerConfig::spec(int M) const {
  SamplerSpec s;
  s.dimension = M;
  if (kind == "gaussian") s.kind = Gaussian{};
  else if (kind == "laplace_product") s.kind = LaplaceProduct{};
  else if (kind == "lp_ball") s.kind = LpBall{p};
  else if (kind == "hit_and_run") s.kind = HitAndRun{BodySpec{p}, burn_in, thinning};
  else throw std::invalid_argument("unknown sampler kind '" + kind + "'");
  return s;
}

namespace {
std::vector<std::string> validation_problems(const ExperimentConfig& c);
}

ExperimentConfig parse_config(const json& doc, std::string_view experiment) {
  std::vector<std::string> problems;
  ExperimentConfig c;
  c.experiment = std::string(experiment);
  if (!doc.is_object()) throw ConfigError({"top level: must be a JSON object"});

  Reader r(doc, "", problems);
  std::string doc_experiment;
  r.get("experiment", doc_experiment);
  if (!doc_experiment.empty() && doc_experiment != c.experiment)
    problems.push_back("experiment: config says '" + doc_experiment + "' but '" + c.experiment + "' was requested");
  if (r.has("sampler")) read_sampler(r.sub("sampler"), "sampler", c.sampler, problems);
  if (r.has("reference_sampler")) read_sampler(r.sub("reference_sampler"), "reference_sampler", c.reference, problems);

  std::optional<int> M;
  std::optional<double> y;
  r.get("M", M);
  r.get("y", y);
  r.get("N", c.N);
  if (M && y && c.N > 0 && std::abs(static_cast<double>(*M) / c.N - *y) > 1e-12)
    problems.push_back("M, y: inconsistent (M / N = " + std::to_string(static_cast<double>(*M) / c.N) + ", y = " +
                       std::to_string(*y) + ")");
  if (M) {
    c.M = *M;
    if (c.N > 0) c.y = static_cast<double>(c.M) / c.N;
  } else {
    if (y) c.y = *y;
    c.M = static_cast<int>(std::lround(c.y * c.N));
  }
  r.get("Ns", c.Ns);
  r.get("Ms", c.Ms);
  r.get("trials", c.trials);
  r.get("seed", c.seed);
  r.get("epsilon", c.epsilon);
  if (r.has("grid")) {
    const json& g = r.sub("grid");
    if (!g.is_object()) {
      problems.push_back("grid: must be an object");
    } else {
      Reader gr(g, "grid.", problems);
      gr.get("n_energy", c.n_energy);
      gr.get("n_eta", c.n_eta);
      gr.get("index_count", c.index_count);
      gr.get("kappas", c.kappas);
      gr.reject_unknown();
    }
  }
  r.get("spikes", c.spikes);
  r.get("pilot", c.pilot);
  r.get("t_grid", c.t_grid);
  r.get("phi_star", c.phi_star);
  r.get("c_V", c.c_V);
  r.get("C_V", c.C_V);
  r.get("sign_trials", c.sign_trials);
  r.get("tail_trials", c.tail_trials);
  r.get("probe_trials", c.probe_trials);
  if (r.has("tolerance")) {
    const json& t = r.sub("tolerance");
    if (!t.is_object()) {
      problems.push_back("tolerance: must be an object");
    } else {
      Reader tr(t, "tolerance.", problems);
      auto& tol = c.tolerance;
      tr.get("ks", tol.ks);
      tr.get("slack_exponent", tol.slack_exponent);
      tr.get("fraction", tol.fraction);
      tr.get("refined_fraction", tol.refined_fraction);
      tr.get("slope_low", tol.slope_low);
      tr.get("slope_high", tol.slope_high);
      tr.get("se_multiplier", tol.se_multiplier);
      tr.get("thin_shell", tol.thin_shell);
      tr.get("clt_ks", tol.clt_ks);
      tr.get("comparison_exponent", tol.comparison_exponent);
      tr.get("regularity_fraction", tol.regularity_fraction);
      tr.reject_unknown();
    }
  }
  std::string out;
  r.get("output_dir", out);
  if (!out.empty()) c.output_dir = out;
  std::string cache;
  r.get("calibration_cache", cache);
  if (!cache.empty()) c.calibration_cache = cache;
  r.reject_unknown();

  for (auto& p : validation_problems(c)) problems.push_back(std::move(p));
  if (!problems.empty()) throw ConfigError(problems);
  return c;
}

void validate(const ExperimentConfig& c) {
  auto problems = validation_problems(c);
  if (!problems.empty()) throw ConfigError(problems);
}

namespace {

std::vector<std::string> validation_problems(const ExperimentConfig& c) {
  std::vector<std::string> problems;
  const auto& names = experiment_names();
  if (std::find(names.begin(), names.end(), c.experiment) == names.end())
    problems.push_back("experiment: unknown experiment '" + c.experiment + "'");
  if (c.trials < 1) problems.push_back("trials: must be >= 1 (got " + std::to_string(c.trials) + ")");
  if (c.N < 1) problems.push_back("N: must be >= 1");
  if (c.M < 1) problems.push_back("M: must be >= 1 (M = y N rounds to " + std::to_string(c.M) + ")");
  if (!(c.y > 0.0)) problems.push_back("y: must be positive");
  if (c.M == c.N) problems.push_back("y: must differ from 1 (M = N = " + std::to_string(c.N) + ")");
  for (int n : c.Ns) {
    if (n < 2) problems.push_back("Ns: entries must be >= 2");
    else if (std::lround(c.y * n) == n) problems.push_back("Ns: y N = N for N = " + std::to_string(n));
  }
  for (int m : c.Ms)
    if (m < 2) problems.push_back("Ms: entries must be >= 2");
  if (!(c.epsilon > 0.0 && c.epsilon < 1.0)) problems.push_back("epsilon: must lie in (0, 1)");
  if (c.n_energy < 1 || c.n_eta < 1) problems.push_back("grid: n_energy and n_eta must be >= 1");
  if (c.index_count < 1) problems.push_back("grid.index_count: must be >= 1");
  for (double k : c.kappas)
    if (!(k >= 0.0)) problems.push_back("grid.kappas: entries must be >= 0");
  if (c.spikes.size() > SpikeList::kMaxSpikes) problems.push_back("spikes: at most 16 spikes");
  for (double d : c.spikes)
    if (!(d > -1.0)) problems.push_back("spikes: entries must exceed -1");
  if (c.experiment == "spike") {
    if (c.spikes.empty()) problems.push_back("spikes: the spike experiment needs at least one spike");
    for (double d : c.spikes)
      if (!(d > std::sqrt(c.y))) problems.push_back("spikes: " + std::to_string(d) + " is not above sqrt(y)");
    if (c.pilot < 10000) problems.push_back("pilot: must be >= 10000 columns");
  }
  for (double t : c.t_grid)
    if (!(t >= 0.0 && t <= 1.0)) problems.push_back("t_grid: entries must lie in [0, 1]");
  if (!(c.phi_star > 0.0 && c.phi_star <= 2.0 / 3.0)) problems.push_back("phi_star: must lie in (0, 2/3]");
  if (!(c.c_V > 0.0 && c.C_V > 1.0)) problems.push_back("c_V, C_V: must be positive with C_V > 1");
  if (c.sign_trials < 2) problems.push_back("sign_trials: must be >= 2");
  if (c.tail_trials < 2) problems.push_back("tail_trials: must be >= 2");
  if (c.probe_trials < 0) problems.push_back("probe_trials: must be >= 0");
  if (c.tolerance.ks && !(*c.tolerance.ks > 0.0 && *c.tolerance.ks <= 1.0)) problems.push_back("tolerance.ks: must lie in (0, 1]");
  if (!(c.tolerance.fraction > 0.0 && c.tolerance.fraction <= 1.0)) problems.push_back("tolerance.fraction: must lie in (0, 1]");
  if (!(c.tolerance.slope_low < c.tolerance.slope_high)) problems.push_back("tolerance: slope_low must be < slope_high");
  check_sampler(c.sampler, "sampler", c.M, problems);
  if (c.experiment == "green-compare") check_sampler(c.reference, "reference_sampler", c.M, problems);
  if (c.output_dir.empty()) problems.push_back("output_dir: must not be empty");
  return problems;
}

}  // namespace

ExperimentConfig load_config(const std::filesystem::path& path, std::string_view experiment) {
  std::ifstream in(path);
  if (!in) throw ConfigError({"config: cannot open " + path.string()});
  json doc;
  try {
    doc = json::parse(in, nullptr, true, true);
  } catch (const json::parse_error& e) {
    throw ConfigError({std::string("config: ") + e.what()});
  }
  return parse_config(doc, experiment);
}

json ExperimentConfig::to_json() const {
  json j = {{"experiment", experiment},
            {"sampler", sampler_json(sampler)},
            {"M", M},
            {"N", N},
            {"y", y},
            {"trials", trials},
            {"seed", seed},
            {"epsilon", epsilon},
            {"grid", {{"n_energy", n_energy}, {"n_eta", n_eta}, {"index_count", index_count}, {"kappas", kappas}}},
            {"spikes", spikes},
            {"pilot", pilot},
            {"t_grid", t_grid},
            {"phi_star", phi_star},
            {"c_V", c_V},
            {"C_V", C_V},
            {"sign_trials", sign_trials},
            {"tail_trials", tail_trials},
            {"probe_trials", probe_trials},
            {"output_dir", output_dir.string()}};
  if (experiment == "green-compare") j["reference_sampler"] = sampler_json(reference);
  if (!Ns.empty()) j["Ns"] = Ns;
  if (!Ms.empty()) j["Ms"] = Ms;
  json tol = {{"slack_exponent", tolerance.slack_exponent},
              {"fraction", tolerance.fraction},
              {"refined_fraction", tolerance.refined_fraction},
              {"slope_low", tolerance.slope_low},
              {"slope_high", tolerance.slope_high},
              {"se_multiplier", tolerance.se_multiplier},
              {"thin_shell", tolerance.thin_shell},
              {"clt_ks", tolerance.clt_ks},
              {"comparison_exponent", tolerance.comparison_exponent},
              {"regularity_fraction", tolerance.regularity_fraction}};
  if (tolerance.ks) tol["ks"] = *tolerance.ks;
  j["tolerance"] = tol;
  if (calibration_cache) j["calibration_cache"] = calibration_cache->string();
  return j;
}

}  // namespace lcrm::runner
