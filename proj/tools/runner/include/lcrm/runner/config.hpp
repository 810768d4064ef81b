#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "lcrm/ensemble.hpp"
#include "lcrm/sampling.hpp"

namespace lcrm::runner {

inline const std::vector<std::string>& experiment_names() {
  static const std::vector<std::string> names = {"mp-check", "rigidity", "local-law", "edge-tw",
                                                 "spike", "concentration", "interp", "green-compare"};
  return names;
}

// Lists every problem found, one per line.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(std::vector<std::string> problems);
  const std::vector<std::string>& problems() const { return problems_; }

 private:
  std::vector<std::string> problems_;
};

struct SamplerConfig {
  std::string kind = "gaussian";  // gaussian | laplace_product | lp_ball | hit_and_run
  double p = 1.0;                 // lp_ball and hit_and_run body
  int burn_in = 0;
  int thinning = 0;

  SamplerSpec spec(int M) const;
};

// Unset fields fall back to per-experiment defaults (see tolerance_* below).
struct Tolerances {
  std::optional<double> ks;
  double slack_exponent = 0.1;   // ratio <= N^slack
  double fraction = 0.95;        // local-law / regularity pass fraction
  double refined_fraction = 0.90;
  double slope_low = -0.8;
  double slope_high = -0.55;
  double se_multiplier = 3.0;
  double thin_shell = 10.0;
  double clt_ks = 0.06;
  double comparison_exponent = -1.0 / 6.0 + 0.1;
  double regularity_fraction = 0.95;
};

struct ExperimentConfig {
  std::string experiment;
  SamplerConfig sampler;
  SamplerConfig reference;  // second ensemble for green-compare
  int M = 0;
  int N = 512;
  double y = 0.5;
  std::vector<int> Ns;  // rigidity scaling sweep; empty means {N}
  std::vector<int> Ms;  // concentration sweep, N = M / y
  int trials = 10;
  std::uint64_t seed = 1;
  double epsilon = 0.1;
  int n_energy = 20;
  int n_eta = 10;
  int index_count = 32;
  std::vector<double> kappas = {0.1, 0.5, 1.0};
  std::vector<double> spikes;
  std::int64_t pilot = 100000;
  std::vector<double> t_grid = {0.0, 0.25, 0.5, 0.75, 1.0};
  double phi_star = 0.6;
  double c_V = 0.05;
  double C_V = 40.0;
  int sign_trials = 5000;
  int tail_trials = 20000;
  int probe_trials = 50;  // edge Green-function bound probes
  Tolerances tolerance;
  std::filesystem::path output_dir = "lcrm-out";
  std::optional<std::filesystem::path> calibration_cache;

  nlohmann::json to_json() const;
};

// Unknown keys, wrong types and out-of-range values are all reported together.
// `experiment` (from the command line) must agree with an "experiment" key
// when the document has one.
ExperimentConfig parse_config(const nlohmann::json& doc, std::string_view experiment);
ExperimentConfig load_config(const std::filesystem::path& path, std::string_view experiment);

// Re-checks a config after command-line overrides.
void validate(const ExperimentConfig& cfg);

}  // namespace lcrm::runner
