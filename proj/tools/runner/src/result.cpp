#include "lcrm/runner/result.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <random>
#include <sstream>

#include "lcrm/format.hpp"
#include "lcrm/sampling.hpp"

namespace lcrm::runner {

using nlohmann::json;

bool ExperimentResult::all_pass() const {
  return std::all_of(verdicts.begin(), verdicts.end(), [](const Verdict& v) { return v.pass; });
}

const Verdict* ExperimentResult::verdict(const std::string& name) const {
  for (const auto& v : verdicts)
    if (v.name == name) return &v;
  return nullptr;
}

double ExperimentResult::aggregate(const std::string& group, const std::string& metric) const {
  for (const auto& r : aggregates)
    if (r.group == group && r.metric == metric) return r.value;
  throw std::out_of_range("no aggregate " + group + "/" + metric);
}

std::string to_csv(const ExperimentResult& result) {
  std::ostringstream out;
  out << "# schema=" << kSchema << " experiment=" << result.config.experiment << "\n";
  out << "# columns: row (trial|aggregate|verdict), group, trial (-1 unless row=trial), seed (trial seed or 0), "
         "metric, value (verdict rows: 1 pass, 0 fail)\n";
  out << kCsvHeader << "\n";
  auto emit = [&](const char* kind, const Row& r) {
    out << kind << "," << r.group << "," << r.trial << "," << r.seed << "," << r.metric << "," << format_double(r.value)
        << "\n";
  };
  for (const auto& r : result.rows) emit("trial", r);
  for (const auto& r : result.aggregates) emit("aggregate", r);
  for (const auto& v : result.verdicts) emit("verdict", Row{"", -1, 0, v.name, v.pass ? 1.0 : 0.0});
  return out.str();
}

json to_json(const ExperimentResult& result) {
  json aggregates = json::object();
  for (const auto& r : result.aggregates) aggregates[r.group.empty() ? "all" : r.group][r.metric] = r.value;
  json verdicts = json::array();
  for (const auto& v : result.verdicts) {
    verdicts.push_back(
        {{"name", v.name}, {"pass", v.pass}, {"value", v.value}, {"threshold", v.threshold}, {"detail", v.detail}});
  }
  json rows = json::array();
  for (const auto& r : result.rows) rows.push_back({r.group, r.trial, r.seed, r.metric, r.value});
  return {{"schema", kSchema},
          {"experiment", result.config.experiment},
          {"version", result.version},
          {"config", result.config.to_json()},
          {"wall_seconds", result.wall_seconds},
          {"all_pass", result.all_pass()},
          {"verdicts", verdicts},
          {"aggregates", aggregates},
          {"row_columns", {"group", "trial", "seed", "metric", "value"}},
          {"rows", rows},
          {"warnings", result.warnings}};
}

void write_atomic(const std::filesystem::path& path, const std::string& contents) {
  std::filesystem::path tmp = path;
  tmp += ".tmp." + std::to_string(std::random_device{}());
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << contents;
    out.flush();
    if (!out) throw std::runtime_error("write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp);
    throw std::runtime_error("cannot rename onto " + path.string() + ": " + ec.message());
  }
}

void write_outputs(const ExperimentResult& result, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  write_atomic(dir / "results.csv", to_csv(result));
  write_atomic(dir / "results.json", to_json(result).dump(2) + "\n");
  if (CalibrationCache::global().size() > 0) {
    const auto tmp = dir / "calibration_cache.txt.tmp";
    CalibrationCache::global().save(tmp);
    std::filesystem::rename(tmp, dir / "calibration_cache.txt");
  }
}

// ---------------------------------------------------------------------------
// SVG

namespace {

constexpr double kPanelW = 520, kPanelH = 340;
constexpr double kLeft = 62, kRight = 18, kTop = 34, kBottom = 46;

std::string esc(const std::string& s) {
  std::string o;
  for (char c : s) {
    switch (c) {
      case '<': o += "&lt;"; break;
      case '>': o += "&gt;"; break;
      case '&': o += "&amp;"; break;
      case '"': o += "&quot;"; break;
      default: o += c;
    }
  }
  return o;
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string tick_label(double v) {
  char buf[32];
  if (v != 0.0 && (std::abs(v) < 1e-2 || std::abs(v) >= 1e4)) std::snprintf(buf, sizeof buf, "%.1e", v);
  else std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

struct Frame {
  double x0, y0;  // panel origin
  double xmin, xmax, ymin, ymax;
  double px(double x) const { return x0 + kLeft + (x - xmin) / (xmax - xmin) * (kPanelW - kLeft - kRight); }
  double py(double y) const { return y0 + kPanelH - kBottom - (y - ymin) / (ymax - ymin) * (kPanelH - kTop - kBottom); }
};

void pad_range(double& lo, double& hi) {
  if (!std::isfinite(lo) || !std::isfinite(hi)) lo = 0, hi = 1;
  if (hi <= lo) {
    const double d = std::max(1e-12, std::abs(lo) * 0.1 + 1e-12);
    lo -= d;
    hi += d;
  }
}

void axes(std::ostream& o, const Frame& f, const std::string& title, const std::string& xlabel,
          const std::string& ylabel) {
  const double l = f.x0 + kLeft, r = f.x0 + kPanelW - kRight, t = f.y0 + kTop, b = f.y0 + kPanelH - kBottom;
  o << "<rect x=\"" << num(l) << "\" y=\"" << num(t) << "\" width=\"" << num(r - l) << "\" height=\"" << num(b - t)
    << "\" fill=\"none\" stroke=\"#444\"/>\n";
  for (int k = 0; k <= 4; ++k) {
    const double xv = f.xmin + (f.xmax - f.xmin) * k / 4.0, yv = f.ymin + (f.ymax - f.ymin) * k / 4.0;
    o << "<text x=\"" << num(f.px(xv)) << "\" y=\"" << num(b + 16) << "\" text-anchor=\"middle\">" << tick_label(xv)
      << "</text>\n";
    o << "<text x=\"" << num(l - 6) << "\" y=\"" << num(f.py(yv) + 4) << "\" text-anchor=\"end\">" << tick_label(yv)
      << "</text>\n";
  }
  o << "<text x=\"" << num((l + r) / 2) << "\" y=\"" << num(f.y0 + 20) << "\" text-anchor=\"middle\" "
    << "font-weight=\"bold\">" << esc(title) << "</text>\n";
  if (!xlabel.empty())
    o << "<text x=\"" << num((l + r) / 2) << "\" y=\"" << num(b + 36) << "\" text-anchor=\"middle\">" << esc(xlabel)
      << "</text>\n";
  if (!ylabel.empty())
    o << "<text transform=\"translate(" << num(f.x0 + 14) << "," << num((t + b) / 2) << ") rotate(-90)\" "
      << "text-anchor=\"middle\">" << esc(ylabel) << "</text>\n";
}

void polyline(std::ostream& o, const Frame& f, const std::vector<std::pair<double, double>>& pts, const char* color) {
  if (pts.empty()) return;
  o << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.8\" points=\"";
  for (const auto& [x, y] : pts) o << num(f.px(x)) << "," << num(f.py(y)) << " ";
  o << "\"/>\n";
}

void draw(std::ostream& o, const HistogramPanel& p, double x0, double y0) {
  if (p.samples.empty()) return;
  double lo = *std::min_element(p.samples.begin(), p.samples.end());
  double hi = *std::max_element(p.samples.begin(), p.samples.end());
  for (const auto& [x, y] : p.curve) {
    lo = std::min(lo, x);
    hi = std::max(hi, x);
  }
  pad_range(lo, hi);
  const int bins = std::max(1, p.bins);
  const double w = (hi - lo) / bins;
  std::vector<double> h(static_cast<std::size_t>(bins), 0.0);
  for (double s : p.samples) h[static_cast<std::size_t>(std::clamp(static_cast<int>((s - lo) / w), 0, bins - 1))] += 1;
  double ymax = 0.0;
  for (double& v : h) ymax = std::max(ymax, v /= p.samples.size() * w);
  for (const auto& [x, y] : p.curve) ymax = std::max(ymax, std::isfinite(y) ? y : 0.0);
  Frame f{x0, y0, lo, hi, 0.0, ymax > 0 ? ymax * 1.08 : 1.0};
  for (int b = 0; b < bins; ++b) {
    const double xl = f.px(lo + b * w), xr = f.px(lo + (b + 1) * w), yt = f.py(h[b]);
    o << "<rect x=\"" << num(xl) << "\" y=\"" << num(yt) << "\" width=\"" << num(std::max(0.0, xr - xl - 0.5))
      << "\" height=\"" << num(f.py(0) - yt) << "\" fill=\"#9ecae1\"/>\n";
  }
  polyline(o, f, p.curve, "#d62728");
  axes(o, f, p.title, "", "density");
}

void draw(std::ostream& o, const LinePanel& p, double x0, double y0) {
  std::vector<std::pair<double, double>> pts;
  for (std::size_t i = 0; i < std::min(p.x.size(), p.y.size()); ++i) {
    const double yv = p.log_y ? std::log10(p.y[i]) : p.y[i];
    if (std::isfinite(yv)) pts.emplace_back(p.x[i], yv);
  }
  if (pts.empty()) return;
  double xl = pts.front().first, xh = xl, yl = pts.front().second, yh = yl;
  for (const auto& [x, y] : pts) {
    xl = std::min(xl, x), xh = std::max(xh, x), yl = std::min(yl, y), yh = std::max(yh, y);
  }
  pad_range(xl, xh);
  pad_range(yl, yh);
  Frame f{x0, y0, xl, xh, yl, yh};
  polyline(o, f, pts, "#1f77b4");
  if (pts.size() <= 64) {
    for (const auto& [x, y] : pts)
      o << "<circle cx=\"" << num(f.px(x)) << "\" cy=\"" << num(f.py(y)) << "\" r=\"2.5\" fill=\"#1f77b4\"/>\n";
  }
  axes(o, f, p.title, p.xlabel, p.log_y ? "log10 " + p.ylabel : p.ylabel);
}

std::string heat_color(double t) {
  t = std::clamp(t, 0.0, 1.0);
  // blue -> yellow -> red
  const double r = t < 0.5 ? 2 * t : 1.0, g = t < 0.5 ? 2 * t : 2 * (1 - t) + 0.0, b = t < 0.5 ? 1 - 2 * t : 0.0;
  char buf[16];
  std::snprintf(buf, sizeof buf, "#%02x%02x%02x", static_cast<int>(255 * r), static_cast<int>(200 * g + 30),
                static_cast<int>(255 * b));
  return buf;
}

void draw(std::ostream& o, const HeatmapPanel& p, double x0, double y0) {
  const std::size_t nx = p.x.size(), ny = p.y.size();
  if (nx == 0 || ny == 0 || p.values.size() != nx * ny) return;
  double vl = p.values.front(), vh = vl;
  for (double v : p.values)
    if (std::isfinite(v)) vl = std::min(vl, v), vh = std::max(vh, v);
  pad_range(vl, vh);
  Frame f{x0, y0, 0.0, static_cast<double>(nx), 0.0, static_cast<double>(ny)};
  for (std::size_t j = 0; j < ny; ++j) {
    for (std::size_t i = 0; i < nx; ++i) {
      const double v = p.values[j * nx + i];
      o << "<rect x=\"" << num(f.px(i)) << "\" y=\"" << num(f.py(j + 1.0)) << "\" width=\"" << num(f.px(i + 1.0) - f.px(i))
        << "\" height=\"" << num(f.py(j) - f.py(j + 1.0)) << "\" fill=\"" << heat_color((v - vl) / (vh - vl))
        << "\"/>\n";
    }
  }
  std::ostringstream title;
  title << p.title << " [" << tick_label(vl) << ", " << tick_label(vh) << "]";
  const double l = x0 + kLeft, r = x0 + kPanelW - kRight, t = y0 + kTop, b = y0 + kPanelH - kBottom;
  o << "<rect x=\"" << num(l) << "\" y=\"" << num(t) << "\" width=\"" << num(r - l) << "\" height=\"" << num(b - t)
    << "\" fill=\"none\" stroke=\"#444\"/>\n";
  o << "<text x=\"" << num((l + r) / 2) << "\" y=\"" << num(y0 + 20) << "\" text-anchor=\"middle\" font-weight=\"bold\">"
    << esc(title.str()) << "</text>\n";
  o << "<text x=\"" << num(l) << "\" y=\"" << num(b + 16) << "\">" << tick_label(p.x.front()) << "</text>\n";
  o << "<text x=\"" << num(r) << "\" y=\"" << num(b + 16) << "\" text-anchor=\"end\">" << tick_label(p.x.back())
    << "</text>\n";
  o << "<text x=\"" << num((l + r) / 2) << "\" y=\"" << num(b + 36) << "\" text-anchor=\"middle\">" << esc(p.xlabel)
    << "</text>\n";
  o << "<text x=\"" << num(l - 6) << "\" y=\"" << num(b) << "\" text-anchor=\"end\">" << tick_label(p.y.front())
    << "</text>\n";
  o << "<text x=\"" << num(l - 6) << "\" y=\"" << num(t + 10) << "\" text-anchor=\"end\">" << tick_label(p.y.back())
    << "</text>\n";
  o << "<text transform=\"translate(" << num(x0 + 14) << "," << num((t + b) / 2) << ") rotate(-90)\" "
    << "text-anchor=\"middle\">" << esc(p.ylabel) << "</text>\n";
}

}  // namespace

std::string render_svg(const Figure& figure) {
  const std::size_t n = figure.panels.size();
  const std::size_t cols = n <= 1 ? 1 : 2;
  const std::size_t rows = (n + cols - 1) / cols;
  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(cols * kPanelW) << "\" height=\""
    << num(std::max<std::size_t>(rows, 1) * kPanelH) << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  for (std::size_t k = 0; k < n; ++k) {
    const double x0 = static_cast<double>(k % cols) * kPanelW, y0 = static_cast<double>(k / cols) * kPanelH;
    std::visit([&](const auto& p) { draw(o, p, x0, y0); }, figure.panels[k]);
  }
  o << "</svg>\n";
  return o.str();
}

std::vector<std::filesystem::path> emit_plots(const ExperimentResult& result, const std::filesystem::path& dir,
                                              std::vector<std::string>* warnings) {
  std::vector<std::filesystem::path> written;
  auto warn = [&](const std::string& w) {
    if (warnings) warnings->push_back(w);
  };
  if (result.figures.empty()) {
    warn("no figures to plot");
    return written;
  }
  for (const auto& fig : result.figures) {
    try {
      std::filesystem::create_directories(dir);
      const auto path = dir / (fig.name + ".svg");
      write_atomic(path, render_svg(fig));
      written.push_back(path);
    } catch (const std::exception& e) {
      warn("plot " + fig.name + " failed: " + e.what());
    }
  }
  return written;
}

}  // namespace lcrm::runner
