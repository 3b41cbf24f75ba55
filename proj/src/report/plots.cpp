#include <nsdim/report.hpp>
#include <nsdim/stats.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>

namespace nsdim::report {

namespace fs = std::filesystem;

namespace {

constexpr double kWidth = 640.0;
constexpr double kHeight = 400.0;
constexpr double kLeft = 70.0;
constexpr double kRight = 20.0;
constexpr double kTop = 40.0;
constexpr double kBottom = 50.0;

const char* const kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd",
                                "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

std::string escape_xml(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string num(double x) {
  std::ostringstream os;
  os.precision(6);
  os << x;
  return os.str();
}

std::string coord(double x) {
  std::ostringstream os;
  os.setf(std::ios::fixed);
  os.precision(2);
  os << x;
  return os.str();
}

std::vector<double> linear_ticks(double lo, double hi) {
  std::vector<double> t;
  for (int i = 0; i <= 4; ++i) t.push_back(lo + (hi - lo) * i / 4.0);
  return t;
}

}  // namespace

std::string render_svg_chart(const ChartSpec& spec) {
  double xlo = std::numeric_limits<double>::infinity();
  double xhi = -xlo;
  double ylo = xlo;
  double yhi = -xlo;
  for (const auto& s : spec.series) {
    if (s.x.size() != s.y.size()) throw std::invalid_argument("chart series '" + s.name + "': x and y differ in length");
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      xlo = std::min(xlo, s.x[i]);
      xhi = std::max(xhi, s.x[i]);
      if (spec.log_y && !(s.y[i] > 0.0)) continue;
      ylo = std::min(ylo, s.y[i]);
      yhi = std::max(yhi, s.y[i]);
    }
  }
  if (!std::isfinite(xlo)) {
    xlo = 0.0;
    xhi = 1.0;
  }
  if (!std::isfinite(ylo)) {
    ylo = spec.log_y ? 1e-16 : 0.0;
    yhi = spec.log_y ? 1.0 : 1.0;
  }
  if (spec.y_min) ylo = *spec.y_min;
  if (xhi <= xlo) {
    xlo -= 0.5;
    xhi += 0.5;
  }
  if (yhi <= ylo) {
    if (spec.log_y) {
      yhi = ylo * 10.0;
    } else {
      ylo -= 0.5;
      yhi += 0.5;
    }
  }

  auto ty = [&](double y) { return spec.log_y ? std::log10(std::max(y, ylo)) : y; };
  const double plot_w = kWidth - kLeft - kRight;
  const double plot_h = kHeight - kTop - kBottom;
  const double a0 = ty(ylo);
  const double a1 = ty(yhi);
  auto px = [&](double x) { return kLeft + (x - xlo) / (xhi - xlo) * plot_w; };
  auto py = [&](double y) { return kTop + plot_h - (ty(y) - a0) / (a1 - a0) * plot_h; };

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
     << "\" viewBox=\"0 0 " << kWidth << " " << kHeight << "\" data-y-min=\"" << format_real(ylo)
     << "\" data-y-max=\"" << format_real(yhi) << "\" data-log-y=\"" << (spec.log_y ? "true" : "false") << "\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << kWidth / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"16\">" << escape_xml(spec.title)
     << "</text>\n";
  os << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << plot_w << "\" height=\"" << plot_h
     << "\" fill=\"none\" stroke=\"black\"/>\n";

  for (double t : linear_ticks(xlo, xhi)) {
    os << "<text x=\"" << coord(px(t)) << "\" y=\"" << coord(kTop + plot_h + 18)
       << "\" text-anchor=\"middle\" font-size=\"11\">" << num(t) << "</text>\n";
  }
  std::vector<double> yticks;
  if (spec.log_y) {
    const int d0 = static_cast<int>(std::ceil(a0 - 1e-9));
    const int d1 = static_cast<int>(std::floor(a1 + 1e-9));
    const int step = std::max(1, (d1 - d0 + 7) / 8);
    for (int d = d0; d <= d1; d += step) yticks.push_back(std::pow(10.0, d));
  } else {
    yticks = linear_ticks(ylo, yhi);
  }
  for (double t : yticks) {
    const std::string y = coord(py(t));
    os << "<line x1=\"" << kLeft << "\" x2=\"" << kLeft + plot_w << "\" y1=\"" << y << "\" y2=\"" << y
       << "\" stroke=\"#dddddd\"/>\n";
    os << "<text x=\"" << kLeft - 6 << "\" y=\"" << y << "\" text-anchor=\"end\" dominant-baseline=\"middle\" "
       << "font-size=\"11\">" << num(t) << "</text>\n";
  }
  os << "<text x=\"" << kLeft + plot_w / 2 << "\" y=\"" << kHeight - 10 << "\" text-anchor=\"middle\" font-size=\"13\">"
     << escape_xml(spec.x_label) << "</text>\n";
  os << "<text x=\"16\" y=\"" << kTop + plot_h / 2 << "\" text-anchor=\"middle\" font-size=\"13\" transform=\"rotate(-90 16 "
     << kTop + plot_h / 2 << ")\">" << escape_xml(spec.y_label) << "</text>\n";

  for (std::size_t k = 0; k < spec.series.size(); ++k) {
    const auto& s = spec.series[k];
    const char* color = kPalette[k % std::size(kPalette)];
    std::string pts;
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      pts += (i ? " " : "") + coord(px(s.x[i])) + "," + coord(py(s.y[i]));
    }
    os << "<g data-series=\"" << escape_xml(s.name) << "\">\n";
    if (s.x.size() > 1) {
      os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"" << pts << "\"/>\n";
    }
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      os << "<circle cx=\"" << coord(px(s.x[i])) << "\" cy=\"" << coord(py(s.y[i])) << "\" r=\"2.5\" fill=\"" << color
         << "\"/>\n";
    }
    os << "</g>\n";
    os << "<text x=\"" << kLeft + plot_w - 8 << "\" y=\"" << kTop + 16 + 14 * k << "\" text-anchor=\"end\" font-size=\"11\" fill=\""
       << color << "\">" << escape_xml(s.name) << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

namespace {

// Median of `value` grouped by (group, x), one series per group.
std::map<double, ChartSeries> grouped_medians(const CsvTable& t, std::size_t group_col, std::size_t x_col,
                                              std::size_t y_col, const std::string& prefix) {
  std::map<double, std::map<double, std::vector<double>>> cells;
  for (const auto& row : t.rows) cells[row[group_col]][row[x_col]].push_back(row[y_col]);
  std::map<double, ChartSeries> out;
  for (const auto& [g, xs] : cells) {
    ChartSeries s;
    s.name = prefix + num(g);
    for (const auto& [x, ys] : xs) {
      s.x.push_back(x);
      s.y.push_back(stats::median(ys));
    }
    out[g] = std::move(s);
  }
  return out;
}

ChartSeries medians_by(const CsvTable& t, std::size_t x_col, std::size_t y_col, const std::string& name) {
  std::map<double, std::vector<double>> cells;
  for (const auto& row : t.rows) cells[row[x_col]].push_back(row[y_col]);
  ChartSeries s;
  s.name = name;
  for (const auto& [x, ys] : cells) {
    s.x.push_back(x);
    s.y.push_back(stats::median(ys));
  }
  return s;
}

std::string r_tag(double r) {
  std::string s = num(r);
  std::replace(s.begin(), s.end(), '.', 'p');
  return s;
}

}  // namespace

ReportBundle render_plots(const ReportBundle& bundle) {
  BundleWriter writer(bundle);
  for (const auto& file : bundle.files) {
    const fs::path rel(file.path);
    const std::string src = file.path;
    const fs::path full = bundle.dir / rel;
    if (rel.parent_path() == "spectra" && rel.extension() == ".csv") {
      const CsvTable t = read_csv(full);
      const auto k = t.column("k", src);
      const auto sigma = t.column("sigma_k", src);
      ChartSeries s;
      s.name = "sigma_k";
      for (const auto& row : t.rows) {
        s.x.push_back(row[k]);
        s.y.push_back(row[sigma]);
      }
      ChartSpec spec;
      spec.title = "Singular values: " + rel.stem().string();
      spec.x_label = "k";
      spec.y_label = "sigma_k";
      spec.log_y = true;
      spec.y_min = 1e-16;
      spec.series.push_back(std::move(s));
      writer.write("plots/spectrum_" + rel.stem().string() + ".svg", render_svg_chart(spec));
    } else if (src == "nnsv_vs_width.csv") {
      const CsvTable t = read_csv(full);
      const auto r = t.column("R", src);
      const auto w = t.column("width", src);
      const auto c = t.column("nnsv_count", src);
      ChartSpec combined;
      combined.title = "NNSV count vs width";
      combined.x_label = "width";
      combined.y_label = "NNSV count (median)";
      for (auto& [rv, series] : grouped_medians(t, r, w, c, "R=")) {
        ChartSpec one = combined;
        one.title = "NNSV count vs width, R=" + num(rv);
        one.series = {series};
        writer.write("plots/nnsv_vs_width_R" + r_tag(rv) + ".svg", render_svg_chart(one));
        combined.series.push_back(std::move(series));
      }
      writer.write("plots/nnsv_vs_width.svg", render_svg_chart(combined));
    } else if (src == "nsdim_vs_R.csv") {
      const CsvTable t = read_csv(full);
      ChartSpec spec;
      spec.title = "NNSV count vs R";
      spec.x_label = "R";
      spec.y_label = "NNSV count (median)";
      spec.series.push_back(medians_by(t, t.column("R", src), t.column("nnsv_count", src), "median"));
      writer.write("plots/nsdim_vs_R.svg", render_svg_chart(spec));
    } else if (src == "nnsv_vs_depth.csv") {
      const CsvTable t = read_csv(full);
      ChartSpec spec;
      spec.title = "NNSV count vs depth";
      spec.x_label = "hidden layers";
      spec.y_label = "NNSV count (median)";
      spec.series.push_back(medians_by(t, t.column("depth", src), t.column("nnsv_count", src), "median"));
      writer.write("plots/nnsv_vs_depth.svg", render_svg_chart(spec));
    }
  }
  return writer.finish(bundle.complete);
}

}  // namespace nsdim::report
