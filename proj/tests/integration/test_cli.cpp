#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <sys/wait.h>

#include "doctest.h"
#include "json.hpp"

namespace fs = std::filesystem;

namespace {

struct Run {
  int code = -1;
  std::string out;
};

fs::path scratch() {
  static const fs::path dir = [] {
    auto d = fs::temp_directory_path() / ("lcrm_cli_" + std::to_string(::getpid()));
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

Run lcrm(const std::string& args) {
  const std::string cmd = std::string(LCRM_CLI_PATH) + " " + args + " 2>&1";
  Run r;
  FILE* p = ::popen(cmd.c_str(), "r");
  REQUIRE(p);
  char buf[4096];
  while (std::fgets(buf, sizeof buf, p)) r.out += buf;
  const int status = ::pclose(p);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

fs::path config(const std::string& name, const nlohmann::json& doc) {
  const auto path = scratch() / (name + ".json");
  std::ofstream(path) << doc.dump(2);
  return path;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

const nlohmann::json kSmall = {{"sampler", {{"kind", "lp_ball"}, {"p", 1.0}}}, {"N", 120}, {"y", 0.5}, {"trials", 30}};

}  // namespace

TEST_CASE("same config and seed give identical CSV bytes, independent of threads") {
  const auto cfg = config("tw", kSmall);
  const auto a = scratch() / "a", b = scratch() / "b", c = scratch() / "c";
  const auto ra = lcrm("edge-tw --config " + cfg.string() + " --seed 9 --out " + a.string() + " -q --threads 1");
  const auto rb = lcrm("edge-tw --config " + cfg.string() + " --seed 9 --out " + b.string() + " -q --threads 3");
  CHECK((ra.code == 0 || ra.code == 2));
  CHECK(rb.code == ra.code);
  CHECK(slurp(a / "results.csv") == slurp(b / "results.csv"));
  lcrm("edge-tw --config " + cfg.string() + " --seed 10 --out " + c.string() + " -q");
  CHECK(slurp(a / "results.csv") != slurp(c / "results.csv"));
  CHECK(fs::exists(a / "edge_tw_histogram.svg"));
  CHECK(fs::exists(a / "calibration_cache.txt"));
  const auto j = nlohmann::json::parse(slurp(a / "results.json"));
  CHECK(j["config"]["seed"] == 9);
  CHECK(j["config"]["trials"] == 30);
}

TEST_CASE("trials = 0 is a validation error") {
  auto doc = kSmall;
  doc["trials"] = 0;
  const auto r = lcrm("edge-tw --config " + config("zero", doc).string() + " --out " + (scratch() / "z").string());
  CHECK(r.code == 1);
  CHECK(r.out.find("trials") != std::string::npos);
  CHECK_FALSE(fs::exists(scratch() / "z" / "results.csv"));
  const auto o = lcrm("edge-tw --config " + config("tw0", kSmall).string() + " --trials 0 -q");
  CHECK(o.code == 1);
}

TEST_CASE("unknown keys and bad values are rejected with every problem listed") {
  auto doc = kSmall;
  doc["trails"] = 10;
  doc["sampler"]["p"] = 0.2;
  const auto r = lcrm("edge-tw --config " + config("typo", doc).string());
  CHECK(r.code == 1);
  CHECK(r.out.find("trails") != std::string::npos);
  CHECK(r.out.find("sampler") != std::string::npos);
}

TEST_CASE("usage errors") {
  CHECK(lcrm("").code == 1);
  CHECK(lcrm("no-such-experiment --config " + config("x", kSmall).string()).code == 1);
  CHECK(lcrm("edge-tw --config /nonexistent.json").code == 1);
  CHECK(lcrm("--help").code == 0);
  CHECK(lcrm("--version").out.find('.') != std::string::npos);
}

TEST_CASE("CSV schema") {
  const auto out = scratch() / "schema";
  const auto r = lcrm("mp-check --config " + config("mp", kSmall).string() + " --out " + out.string() + " -q");
  CHECK((r.code == 0 || r.code == 2));
  std::istringstream in(slurp(out / "results.csv"));
  std::string line;
  std::getline(in, line);
  CHECK(line == "# schema=lcrm-results/1 experiment=mp-check");
  std::getline(in, line);
  CHECK(line[0] == '#');
  std::getline(in, line);
  CHECK(line == "row,group,trial,seed,metric,value");
  int rows = 0, verdicts = 0;
  while (std::getline(in, line)) {
    std::vector<std::string> f;
    std::stringstream ls(line);
    for (std::string cell; std::getline(ls, cell, ',');) f.push_back(cell);
    REQUIRE(f.size() == 6);
    CHECK((f[0] == "trial" || f[0] == "aggregate" || f[0] == "verdict"));
    CHECK_NOTHROW((void)std::stoll(f[2]));
    CHECK_NOTHROW((void)std::stoull(f[3]));
    CHECK_NOTHROW((void)std::stod(f[5]));
    rows += f[0] == "trial";
    verdicts += f[0] == "verdict";
  }
  CHECK(rows == 30 * 3);
  CHECK(verdicts == 1);
  CHECK(r.out.find("mean_ks") != std::string::npos);
}

TEST_CASE("cleanup") { fs::remove_all(scratch()); }
