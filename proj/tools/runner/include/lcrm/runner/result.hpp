#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "json.hpp"
#include "lcrm/runner/config.hpp"

namespace lcrm::runner {

inline constexpr const char* kSchema = "lcrm-results/1";
inline constexpr const char* kCsvHeader = "row,group,trial,seed,metric,value";

// One (metric, value) observation. Trial rows carry trial >= 0; aggregates
// use trial = -1.
struct Row {
  std::string group;
  int trial = -1;
  std::uint64_t seed = 0;
  std::string metric;
  double value = 0.0;
};

struct Verdict {
  std::string name;
  bool pass = false;
  double value = 0.0;
  double threshold = 0.0;
  std::string detail;
};

// Plot data; emit_plots turns these into SVG files.
struct HistogramPanel {
  std::string title;
  std::vector<double> samples;
  std::vector<std::pair<double, double>> curve;  // reference density
  int bins = 40;
};
struct LinePanel {
  std::string title, xlabel, ylabel;
  std::vector<double> x, y;
  bool log_y = false;
};
struct HeatmapPanel {
  std::string title, xlabel, ylabel;
  std::vector<double> x, y;          // axis coordinates
  std::vector<double> values;        // row-major, y.size() x x.size()
};
using Panel = std::variant<HistogramPanel, LinePanel, HeatmapPanel>;

struct Figure {
  std::string name;  // file stem
  std::vector<Panel> panels;
};

struct ExperimentResult {
  ExperimentConfig config;
  std::vector<Row> rows;
  std::vector<Row> aggregates;
  std::vector<Verdict> verdicts;
  std::vector<Figure> figures;
  double wall_seconds = 0.0;
  std::string version;
  std::vector<std::string> warnings;

  bool all_pass() const;
  const Verdict* verdict(const std::string& name) const;
  double aggregate(const std::string& group, const std::string& metric) const;
};

std::string to_csv(const ExperimentResult& result);
nlohmann::json to_json(const ExperimentResult& result);

// Temp file in the same directory, then rename.
void write_atomic(const std::filesystem::path& path, const std::string& contents);

// results.csv, results.json, the calibration cache and the figures.
void write_outputs(const ExperimentResult& result, const std::filesystem::path& dir);

// Best effort: failures are returned as warnings, never thrown. Returns the
// files written.
std::vector<std::filesystem::path> emit_plots(const ExperimentResult& result, const std::filesystem::path& dir,
                                              std::vector<std::string>* warnings = nullptr);

std::string render_svg(const Figure& figure);

}  // namespace lcrm::runner
