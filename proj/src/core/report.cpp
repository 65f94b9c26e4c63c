#include "core/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>

#include "core/log_io.hpp"

namespace forage::report {

namespace {

constexpr double kWidth = 720.0, kHeight = 480.0;
constexpr double kLeft = 70.0, kRight = 24.0, kTop = 44.0, kBottom = 56.0;

const char* kPalette[6] = {"#1f77b4", "#d62728", "#2ca02c",
                           "#9467bd", "#ff7f0e", "#8c564b"};

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      default: out += c;
    }
  }
  return out;
}

struct Scale {
  double lo = 0.0, hi = 1.0, out_lo = 0.0, out_hi = 1.0;
  double operator()(double v) const {
    return out_lo + (v - lo) / (hi - lo) * (out_hi - out_lo);
  }
};

// CSV rows (no quoting in our outputs); first row is the header.
std::vector<std::vector<std::string>> read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw io::IoError("cannot open csv: " + path);
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    rows.push_back(std::move(cells));
  }
  return rows;
}

double num(const std::string& s) { return std::strtod(s.c_str(), nullptr); }

}  // namespace

std::string render_chart_svg(const ChartSpec& spec) {
  double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
  double ymin = xmin, ymax = -xmin;
  for (const auto& s : spec.series) {
    for (const auto& [x, y] : s.points) {
      xmin = std::min(xmin, x);
      xmax = std::max(xmax, x);
      ymin = std::min(ymin, y);
      ymax = std::max(ymax, y);
    }
  }
  for (double m : spec.marks) {
    xmin = std::min(xmin, m);
    xmax = std::max(xmax, m);
  }
  if (!(xmin <= xmax)) {
    xmin = 0.0;
    xmax = 1.0;
  }
  if (!(ymin <= ymax)) {
    ymin = 0.0;
    ymax = 1.0;
  }
  if (xmax == xmin) {
    xmin -= 0.5;
    xmax += 0.5;
  }
  if (ymax == ymin) {
    ymin -= 0.5;
    ymax += 0.5;
  }
  const double ypad = (ymax - ymin) * 0.06;
  ymin -= ypad;
  ymax += ypad;

  const Scale sx{xmin, xmax, kLeft, kWidth - kRight};
  const Scale sy{ymin, ymax, kHeight - kBottom, kTop};

  std::string svg;
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fmt(kWidth) +
         "\" height=\"" + fmt(kHeight) + "\" viewBox=\"0 0 " + fmt(kWidth) +
         " " + fmt(kHeight) + "\">\n";
  svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg += "<text x=\"" + fmt(kWidth / 2) +
         "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" "
         "font-size=\"16\">" +
         escape(spec.title) + "</text>\n";

  // axes
  svg += "<line x1=\"" + fmt(kLeft) + "\" y1=\"" + fmt(kHeight - kBottom) +
         "\" x2=\"" + fmt(kWidth - kRight) + "\" y2=\"" +
         fmt(kHeight - kBottom) + "\" stroke=\"black\"/>\n";
  svg += "<line x1=\"" + fmt(kLeft) + "\" y1=\"" + fmt(kTop) + "\" x2=\"" +
         fmt(kLeft) + "\" y2=\"" + fmt(kHeight - kBottom) +
         "\" stroke=\"black\"/>\n";

  for (int i = 0; i <= 4; ++i) {
    const double fx = xmin + (xmax - xmin) * i / 4.0;
    const double fy = ymin + (ymax - ymin) * i / 4.0;
    svg += "<line x1=\"" + fmt(sx(fx)) + "\" y1=\"" + fmt(kHeight - kBottom) +
           "\" x2=\"" + fmt(sx(fx)) + "\" y2=\"" +
           fmt(kHeight - kBottom + 5) + "\" stroke=\"black\"/>\n";
    svg += "<text x=\"" + fmt(sx(fx)) + "\" y=\"" +
           fmt(kHeight - kBottom + 20) +
           "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
           "font-size=\"11\">" +
           fmt(fx) + "</text>\n";
    svg += "<line x1=\"" + fmt(kLeft - 5) + "\" y1=\"" + fmt(sy(fy)) +
           "\" x2=\"" + fmt(kLeft) + "\" y2=\"" + fmt(sy(fy)) +
           "\" stroke=\"black\"/>\n";
    svg += "<text x=\"" + fmt(kLeft - 8) + "\" y=\"" + fmt(sy(fy) + 4) +
           "\" text-anchor=\"end\" font-family=\"sans-serif\" "
           "font-size=\"11\">" +
           fmt(fy) + "</text>\n";
  }
  svg += "<text x=\"" + fmt((kLeft + kWidth - kRight) / 2) + "\" y=\"" +
         fmt(kHeight - 14) +
         "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
         "font-size=\"13\">" +
         escape(spec.x_label) + "</text>\n";
  svg += "<text x=\"18\" y=\"" + fmt((kTop + kHeight - kBottom) / 2) +
         "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
         "font-size=\"13\" transform=\"rotate(-90 18 " +
         fmt((kTop + kHeight - kBottom) / 2) + ")\">" +
         escape(spec.y_label) + "</text>\n";

  for (double m : spec.marks) {
    svg += "<rect x=\"" + fmt(sx(m) - 1.5) + "\" y=\"" +
           fmt(kHeight - kBottom - 8) +
           "\" width=\"3\" height=\"8\" fill=\"#444444\"/>\n";
  }

  for (const auto& s : spec.series) {
    if (s.points.empty()) continue;
    std::string pts;
    for (const auto& [x, y] : s.points) {
      if (!pts.empty()) pts += " ";
      pts += fmt(sx(x)) + "," + fmt(sy(y));
    }
    if (s.points.size() > 1) {
      svg += "<polyline fill=\"none\" stroke=\"" + s.color +
             "\" stroke-width=\"1.8\" points=\"" + pts + "\"/>\n";
    }
    if (s.markers || s.points.size() == 1) {
      for (const auto& [x, y] : s.points)
        svg += "<circle cx=\"" + fmt(sx(x)) + "\" cy=\"" + fmt(sy(y)) +
               "\" r=\"3.2\" fill=\"" + s.color + "\"/>\n";
    }
  }

  // legend
  double ly = kTop + 6.0;
  for (const auto& s : spec.series) {
    if (s.label.empty()) continue;
    svg += "<line x1=\"" + fmt(kWidth - kRight - 150) + "\" y1=\"" + fmt(ly) +
           "\" x2=\"" + fmt(kWidth - kRight - 126) + "\" y2=\"" + fmt(ly) +
           "\" stroke=\"" + s.color + "\" stroke-width=\"2.5\"/>\n";
    svg += "<text x=\"" + fmt(kWidth - kRight - 120) + "\" y=\"" +
           fmt(ly + 4) +
           "\" font-family=\"sans-serif\" font-size=\"12\">" +
           escape(s.label) + "</text>\n";
    ly += 17.0;
  }

  svg += "</svg>\n";
  return svg;
}

namespace {

void write_svg(const std::string& path, const std::string& content, int& count) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw io::IoError("cannot write " + path);
  out << content;
  ++count;
  io::log(io::LogLevel::kInfo, "wrote " + path);
}

bool have(const std::filesystem::path& p) {
  return std::filesystem::is_regular_file(p);
}

}  // namespace

int render_reports(const std::string& analysis_dir, const std::string& out_dir) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(analysis_dir))
    throw io::IoError("analysis directory does not exist: " + analysis_dir);
  fs::create_directories(out_dir);
  const auto in = [&](const char* name) { return fs::path(analysis_dir) / name; };
  const auto out = [&](const char* name) {
    return (fs::path(out_dir) / name).string();
  };
  int count = 0;

  if (have(in("scores.csv"))) {
    const auto rows = read_csv(in("scores.csv").string());
    Series s{"mean score", kPalette[0], {}, true};
    for (std::size_t i = 1; i < rows.size(); ++i)
      s.points.push_back({num(rows[i][0]), num(rows[i][1])});
    write_svg(out("scores.svg"),
              render_chart_svg({"Score vs patch distance", "patch distance (m)",
                                "episode score", {s}, {}}),
              count);
  } else {
    io::log(io::LogLevel::kWarn, "report: scores.csv missing, skipped");
  }

  if (have(in("leaving_times.csv"))) {
    const auto rows = read_csv(in("leaving_times.csv").string());
    Series obs{"observed", kPalette[0], {}, true};
    for (std::size_t i = 1; i < rows.size(); ++i)
      obs.points.push_back({num(rows[i][0]), num(rows[i][1])});
    std::vector<Series> series{obs};
    if (have(in("optimality_gap.csv"))) {
      const auto gaps = read_csv(in("optimality_gap.csv").string());
      Series opt{"optimal", kPalette[1], {}, true};
      for (std::size_t i = 1; i < gaps.size(); ++i)
        opt.points.push_back({num(gaps[i][0]), num(gaps[i][2])});
      series.push_back(opt);
    }
    write_svg(out("leaving_times.svg"),
              render_chart_svg({"Patch leaving time vs distance",
                                "patch distance (m)", "leave step", series, {}}),
              count);
  } else {
    io::log(io::LogLevel::kWarn, "report: leaving_times.csv missing, skipped");
  }

  if (have(in("rate_curve.csv"))) {
    const auto rows = read_csv(in("rate_curve.csv").string());
    std::map<double, Series> per_distance;
    for (std::size_t i = 1; i < rows.size(); ++i) {
      const double d = num(rows[i][0]);
      const double t = num(rows[i][1]);
      if (t > 400) continue;  // the maximum sits well inside this range
      auto& s = per_distance[d];
      s.points.push_back({t, num(rows[i][2])});
    }
    std::vector<Series> series;
    int k = 0;
    for (auto& [d, s] : per_distance) {
      s.label = fmt(d) + " m";
      s.color = kPalette[k++ % 6];
      series.push_back(s);
    }
    write_svg(out("rate_curve.svg"),
              render_chart_svg({"Average rate vs patch residence",
                                "patch steps", "reward per step", series, {}}),
              count);
  } else {
    io::log(io::LogLevel::kWarn, "report: rate_curve.csv missing, skipped");
  }

  if (have(in("indifference_curve.csv"))) {
    const auto rows = read_csv(in("indifference_curve.csv").string());
    std::map<double, Series> per_distance;
    double pmin = 1e300, pmax = -1e300;
    for (std::size_t i = 1; i < rows.size(); ++i) {
      const double d = num(rows[i][0]);
      const double p = num(rows[i][1]);
      auto& s = per_distance[d];
      s.points.push_back({p, num(rows[i][2])});
      pmin = std::min(pmin, p);
      pmax = std::max(pmax, p);
    }
    std::vector<Series> series;
    int k = 0;
    for (auto& [d, s] : per_distance) {
      s.label = fmt(d) + " m";
      s.color = kPalette[k++ % 6];
      series.push_back(s);
    }
    if (pmin <= pmax)
      series.push_back({"unity", "#888888", {{pmin, pmin}, {pmax, pmax}}, false});
    write_svg(out("indifference_curve.svg"),
              render_chart_svg({"Stay/leave indifference vs assumed patch steps",
                                "assumed patch steps", "indifference step",
                                series, {}}),
              count);
  } else {
    io::log(io::LogLevel::kWarn,
            "report: indifference_curve.csv missing, skipped");
  }

  if (have(in("quartile_traces.csv"))) {
    const auto rows = read_csv(in("quartile_traces.csv").string());
    std::map<int, Series> per_quartile;
    for (std::size_t i = 1; i < rows.size(); ++i) {
      const int q = static_cast<int>(num(rows[i][1]));
      auto& s = per_quartile[q];
      s.points.push_back({num(rows[i][0]), num(rows[i][2])});
    }
    static const char* names[4] = {"Earliest", "Early", "Late", "Latest"};
    std::vector<Series> series;
    for (auto& [q, s] : per_quartile) {
      s.label = q >= 0 && q < 4 ? names[q] : "q" + std::to_string(q);
      s.color = kPalette[q % 6];
      series.push_back(s);
    }
    std::vector<double> marks;
    if (have(in("sliding_slope_entry.csv"))) {
      const auto sig = read_csv(in("sliding_slope_entry.csv").string());
      for (std::size_t i = 1; i < sig.size(); ++i)
        if (sig[i].back() == "1") marks.push_back(num(sig[i][0]));
    }
    write_svg(out("quartile_traces.svg"),
              render_chart_svg({"Entry-aligned mean state by leaving quartile",
                                "steps from patch entry", "state value", series,
                                marks}),
              count);
  } else {
    io::log(io::LogLevel::kWarn, "report: quartile_traces.csv missing, skipped");
  }

  return count;
}

}  // namespace forage::report
