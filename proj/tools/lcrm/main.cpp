#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "lcrm/ensemble.hpp"
#include "lcrm/mp_model.hpp"
#include "lcrm/runner/config.hpp"
#include "lcrm/runner/experiments.hpp"
#include "lcrm/runner/result.hpp"
#include "lcrm/sampling.hpp"

namespace {

std::string join(const std::vector<std::string>& v) {
  std::string s;
  for (const auto& x : v) s += (s.empty() ? "" : ", ") + x;
  return s;
}

}  // namespace

int main(int argc, char** argv) {
  using namespace lcrm::runner;
  CLI::App app{"Monte Carlo campaigns for sample covariance matrices of log-concave columns"};
  app.set_version_flag("--version", std::string(LCRM_VERSION));

  std::string experiment, config_path;
  std::optional<std::uint64_t> seed;
  std::optional<int> trials, threads;
  std::optional<std::string> out;
  bool quiet = false, no_plots = false;

  app.add_option("experiment", experiment, "One of: " + join(experiment_names()))
      ->required()
      ->check(CLI::IsMember(experiment_names()));
  app.add_option("-c,--config", config_path, "JSON config file")->required()->check(CLI::ExistingFile);
  app.add_option("--seed", seed, "Override the master seed");
  app.add_option("--trials", trials, "Override the trial count");
  app.add_option("-o,--out", out, "Override the output directory");
  app.add_option("-j,--threads", threads, "Worker threads (default: LCRM_THREADS or all cores)");
  app.add_flag("-q,--quiet", quiet, "No progress lines on stderr");
  app.add_flag("--no-plots", no_plots, "Skip SVG figures");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    auto cfg = load_config(config_path, experiment);
    if (seed) cfg.seed = *seed;
    if (trials) cfg.trials = *trials;
    if (out) cfg.output_dir = *out;
    validate(cfg);

    RunOptions opts;
    if (threads) opts.threads = *threads;
    if (!quiet) opts.log = [](const std::string& msg) { std::cerr << "[lcrm] " << msg << '\n'; };

    auto result = run(cfg, opts);
    write_outputs(result, cfg.output_dir);
    if (!no_plots) {
      std::vector<std::string> warnings;
      emit_plots(result, cfg.output_dir, &warnings);
      for (const auto& w : warnings) std::cerr << "warning: " << w << '\n';
    }

    for (const auto& v : result.verdicts)
      std::printf("%s %-40s value=%-12.6g threshold=%.6g\n", v.pass ? "PASS" : "FAIL", v.name.c_str(), v.value,
                  v.threshold);
    std::printf("%s: %s in %.1fs, results in %s\n", cfg.experiment.c_str(), result.all_pass() ? "pass" : "FAIL",
                result.wall_seconds, cfg.output_dir.c_str());
    return result.all_pass() ? 0 : 2;
  } catch (const ConfigError& e) {
    std::cerr << "invalid configuration:\n";
    for (const auto& p : e.problems()) std::cerr << "  " << p << '\n';
    return 1;
  } catch (const lcrm::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return 1;
  } catch (const lcrm::DomainError& e) {
    std::cerr << "domain error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
