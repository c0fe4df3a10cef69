#include "coarsequant/report.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace cq::report {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

void add_row(Table& t, const std::vector<double>& values) {
  std::vector<std::string> row;
  row.reserve(values.size());
  for (double v : values) row.push_back(format_double(v));
  t.rows.push_back(std::move(row));
}

std::string to_csv(const Table& t) {
  std::ostringstream out;
  for (std::size_t i = 0; i < t.header.size(); ++i)
    out << (i ? "," : "") << t.header[i];
  out << '\n';
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i)
      out << (i ? "," : "") << row[i];
    out << '\n';
  }
  return out.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open '" + path + "' for writing");
  f.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!f) throw IoError("write failed for '" + path + "'");
}

namespace {
double parse_num(const std::string& s) {
  try {
    return std::stod(s);
  } catch (const std::exception&) {
    return std::nan("");
  }
}
}  // namespace

std::string to_svg(const Table& t, int x_col, const std::vector<int>& y_cols,
                   const std::string& title, bool log_y) {
  const int W = 640, H = 400, ML = 70, MR = 20, MT = 40, MB = 50;
  std::vector<double> xs;
  std::vector<std::vector<double>> series(y_cols.size());
  double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
  for (const auto& row : t.rows) {
    const double x = parse_num(row[x_col]);
    if (std::isnan(x)) continue;
    xs.push_back(x);
    xmin = std::min(xmin, x);
    xmax = std::max(xmax, x);
    for (std::size_t s = 0; s < y_cols.size(); ++s) {
      double y = parse_num(row[y_cols[s]]);
      if (log_y) y = y > 0 ? std::log10(y) : std::nan("");
      series[s].push_back(y);
      if (!std::isnan(y)) {
        ymin = std::min(ymin, y);
        ymax = std::max(ymax, y);
      }
    }
  }
  if (xs.empty() || !(xmax > xmin)) xmin = 0, xmax = 1;
  if (!(ymax > ymin)) ymin = 0, ymax = 1;
  const double xspan = xmax - xmin, yspan = ymax - ymin;
  auto px = [&](double x) { return ML + (x - xmin) / xspan * (W - ML - MR); };
  auto py = [&](double y) {
    return H - MB - (y - ymin) / yspan * (H - MT - MB);
  };

  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c",
                                 "#9467bd", "#ff7f0e", "#8c564b"};
  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W
      << "\" height=\"" << H << "\">\n";
  svg << "<rect width=\"" << W << "\" height=\"" << H
      << "\" fill=\"white\"/>\n";
  svg << "<text x=\"" << W / 2 << "\" y=\"20\" text-anchor=\"middle\" "
         "font-family=\"sans-serif\" font-size=\"14\">"
      << title << (log_y ? " (log10 y)" : "") << "</text>\n";
  // axes
  svg << "<line x1=\"" << ML << "\" y1=\"" << H - MB << "\" x2=\"" << W - MR
      << "\" y2=\"" << H - MB << "\" stroke=\"black\"/>\n";
  svg << "<line x1=\"" << ML << "\" y1=\"" << MT << "\" x2=\"" << ML
      << "\" y2=\"" << H - MB << "\" stroke=\"black\"/>\n";
  for (int tscale = 0; tscale <= 4; ++tscale) {
    const double fx = xmin + xspan * tscale / 4.0;
    const double fy = ymin + yspan * tscale / 4.0;
    svg << "<text x=\"" << px(fx) << "\" y=\"" << H - MB + 18
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
           "font-size=\"11\">"
        << format_double(fx) << "</text>\n";
    svg << "<text x=\"" << ML - 6 << "\" y=\"" << py(fy) + 4
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" "
           "font-size=\"11\">"
        << format_double(fy) << "</text>\n";
  }
  for (std::size_t s = 0; s < series.size(); ++s) {
    svg << "<polyline fill=\"none\" stroke=\"" << colors[s % 6]
        << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < xs.size(); ++i) {
      if (std::isnan(series[s][i])) continue;
      svg << px(xs[i]) << "," << py(series[s][i]) << " ";
    }
    svg << "\"/>\n";
    svg << "<text x=\"" << W - MR - 6 << "\" y=\"" << MT + 16 * (s + 1)
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" "
           "font-size=\"11\" fill=\""
        << colors[s % 6] << "\">" << t.header[y_cols[s]] << "</text>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace cq::report
