#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "doctest.h"
#include "json.hpp"
#include "lcrm/runner/config.hpp"
#include "lcrm/runner/experiments.hpp"
#include "lcrm/runner/pool.hpp"
#include "lcrm/runner/result.hpp"

using namespace lcrm::runner;
using nlohmann::json;

namespace {

std::vector<std::string> problems_of(const json& doc, const std::string& experiment) {
  try {
    parse_config(doc, experiment);
  } catch (const ConfigError& e) {
    return e.problems();
  }
  return {};
}

bool mentions(const std::vector<std::string>& v, const std::string& key) {
  for (const auto& s : v)
    if (s.find(key) != std::string::npos) return true;
  return false;
}

ExperimentConfig small(const std::string& experiment) {
  json doc = {{"N", 60}, {"y", 0.5}, {"trials", 6}, {"seed", 3}};
  return parse_config(doc, experiment);
}

}  // namespace

TEST_CASE("config defaults and derived dimensions") {
  const auto c = parse_config(json::object(), "mp-check");
  CHECK(c.N == 512);
  CHECK(c.M == 256);
  CHECK(c.sampler.kind == "gaussian");
  const auto d = parse_config(json{{"M", 300}, {"N", 100}}, "mp-check");
  CHECK(d.y == 3.0);
  const auto e = parse_config(json{{"y", 0.25}, {"N", 400}, {"tolerance", {{"ks", 0.01}}}}, "edge-tw");
  CHECK(e.M == 100);
  CHECK(*e.tolerance.ks == 0.01);
}

TEST_CASE("config validation lists every problem") {
  auto p = problems_of(json{{"trials", 0}, {"bogus", 1}, {"sampler", {{"kind", "lp_ball"}, {"p", 0.5}}}}, "edge-tw");
  CHECK(mentions(p, "trials"));
  CHECK(mentions(p, "bogus"));
  p = problems_of(json{{"trials", 0}, {"sampler", {{"kind", "lp_ball"}, {"p", 0.5}}}}, "edge-tw");
  CHECK(mentions(p, "trials"));
  CHECK(mentions(p, "sampler"));
  CHECK(mentions(problems_of(json{{"M", 10}, {"y", 0.5}}, "mp-check"), "M, y"));
  CHECK(mentions(problems_of(json{{"M", 512}, {"N", 512}}, "mp-check"), "y"));
  CHECK(mentions(problems_of(json{{"trials", "ten"}}, "mp-check"), "trials"));
  CHECK(mentions(problems_of(json{{"grid", {{"n_eta", 3}, {"nope", 1}}}}, "local-law"), "grid.nope"));
  CHECK(mentions(problems_of(json{{"spikes", json::array()}}, "spike"), "spikes"));
  CHECK(mentions(problems_of(json{{"spikes", {0.5}}}, "spike"), "sqrt(y)"));
  CHECK(mentions(problems_of(json{{"experiment", "rigidity"}}, "mp-check"), "experiment"));
  CHECK(mentions(problems_of(json{{"sampler", {{"kind", "banana"}}}}, "mp-check"), "banana"));
  CHECK(mentions(problems_of(json{{"phi_star", 0.9}}, "interp"), "phi_star"));
  CHECK(mentions(problems_of(json::array(), "mp-check"), "object"));
}

TEST_CASE("config echo round-trips") {
  auto c = parse_config(json{{"N", 300}, {"y", 2.0}, {"sampler", {{"kind", "hit_and_run"}, {"p", 1.5}}}}, "mp-check");
  const auto back = parse_config(c.to_json(), "mp-check");
  CHECK(back.to_json() == c.to_json());
}

TEST_CASE("load_config reads files with comments") {
  const auto path = std::filesystem::temp_directory_path() / "lcrm_cfg_test.json";
  std::ofstream(path) << "{\n  // small\n  \"N\": 100, \"y\": 0.5\n}\n";
  CHECK(load_config(path, "edge-tw").M == 50);
  std::ofstream(path) << "{ \"N\": 100, ";
  CHECK_THROWS_AS(load_config(path, "edge-tw"), ConfigError);
  std::filesystem::remove(path);
  CHECK_THROWS_AS(load_config("/nonexistent.json", "edge-tw"), ConfigError);
}

TEST_CASE("trial seeds") {
  CHECK(trial_seed(1, 0, 0) == trial_seed(1, 0, 0));
  CHECK(trial_seed(1, 0, 0) != trial_seed(1, 0, 1));
  CHECK(trial_seed(1, 0, 0) != trial_seed(1, 1, 0));
  CHECK(trial_seed(1, 0, 0) != trial_seed(2, 0, 0));
}

TEST_CASE("parallel_for covers every index and reports the lowest failure") {
  std::vector<int> hit(1000, 0);
  parallel_for(1000, 4, [&](int i) { hit[i] += 1; });
  for (int h : hit) CHECK(h == 1);
  try {
    parallel_for(100, 3, [](int i) {
      if (i == 17 || i == 60) throw std::runtime_error(std::to_string(i));
    });
    FAIL("expected exception");
  } catch (const std::runtime_error& e) {
    CHECK(std::string(e.what()) == "17");
  }
}

TEST_CASE("results are independent of the thread count") {
  for (const char* name : {"mp-check", "rigidity", "edge-tw", "interp"}) {
    auto cfg = small(name);
    if (std::string(name) == "rigidity") cfg.Ns = {40, 60, 80};
    const auto a = run(cfg, {1, {}});
    const auto b = run(cfg, {3, {}});
    CAPTURE(name);
    CHECK(to_csv(a) == to_csv(b));
    CHECK_FALSE(a.rows.empty());
    CHECK_FALSE(a.verdicts.empty());
  }
}

TEST_CASE("CSV layout") {
  const auto r = run(small("edge-tw"), {1, {}});
  std::istringstream in(to_csv(r));
  std::string line;
  std::getline(in, line);
  CHECK(line.rfind("# schema=lcrm-results/1 experiment=edge-tw", 0) == 0);
  std::getline(in, line);
  CHECK(line.rfind("# ", 0) == 0);
  std::getline(in, line);
  CHECK(line == kCsvHeader);
  int trial = 0, aggregate = 0, verdict = 0;
  while (std::getline(in, line)) {
    CHECK(std::count(line.begin(), line.end(), ',') == 5);
    const auto kind = line.substr(0, line.find(','));
    trial += kind == "trial";
    aggregate += kind == "aggregate";
    verdict += kind == "verdict";
    const auto value = line.substr(line.rfind(',') + 1);
    CHECK_NOTHROW((void)std::stod(value));
  }
  CHECK(trial == 12);
  CHECK(aggregate == static_cast<int>(r.aggregates.size()));
  CHECK(verdict == static_cast<int>(r.verdicts.size()));

  const auto j = to_json(r);
  CHECK(j["schema"] == kSchema);
  CHECK(j["config"]["experiment"] == "edge-tw");
  CHECK(j["verdicts"].size() == r.verdicts.size());
}

TEST_CASE("atomic writes and plots") {
  const auto dir = std::filesystem::temp_directory_path() / "lcrm_out_test";
  std::filesystem::remove_all(dir);
  const auto r = run(small("mp-check"), {1, {}});
  write_outputs(r, dir);
  CHECK(std::filesystem::exists(dir / "results.csv"));
  CHECK(std::filesystem::exists(dir / "results.json"));
  std::vector<std::string> warnings;
  const auto files = emit_plots(r, dir, &warnings);
  REQUIRE(files.size() == 1);
  std::ifstream svg(files[0]);
  std::stringstream ss;
  ss << svg.rdbuf();
  CHECK(ss.str().find("<svg") != std::string::npos);
  CHECK(warnings.empty());
  for (const auto& e : std::filesystem::directory_iterator(dir)) CHECK(e.path().extension() != ".tmp");
  ExperimentResult empty;
  emit_plots(empty, dir, &warnings);
  CHECK(warnings.size() == 1);
  std::filesystem::remove_all(dir);
}

TEST_CASE("every experiment runs at toy size") {
  for (const auto& name : experiment_names()) {
    json doc = {{"N", 80}, {"y", 0.5}, {"trials", 4}, {"seed", 2}};
    if (name == "rigidity") doc["Ns"] = {40, 60, 80};
    if (name == "spike") doc["pilot"] = 10000, doc["spikes"] = {2.0};
    if (name == "concentration") doc["Ms"] = {16, 32}, doc["tail_trials"] = 500, doc["sign_trials"] = 200;
    if (name == "local-law") doc["grid"] = {{"n_energy", 4}, {"n_eta", 3}, {"kappas", {0.5}}};
    if (name == "green-compare") doc["reference_sampler"] = {{"kind", "lp_ball"}, {"p", 1.0}};
    CAPTURE(name);
    const auto r = run(parse_config(doc, name), {2, {}});
    CHECK(r.config.experiment == name);
    CHECK_FALSE(r.verdicts.empty());
    CHECK_FALSE(r.figures.empty());
    CHECK(!r.version.empty());
    for (const auto& f : r.figures) CHECK(render_svg(f).find("</svg>") != std::string::npos);
  }
}
