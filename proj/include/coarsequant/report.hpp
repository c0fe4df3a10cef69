#pragma once
//
// CSV and SVG emission. CSV schema is fixed: header row, comma separators,
// '.' decimal point, LF line endings. The SVG plot is a pure function of the
// CSV table contents.
//

#include "coarsequant/common.hpp"

#include <string>

namespace cq::report {

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

std::string format_double(double v);

void add_row(Table& t, const std::vector<double>& values);

std::string to_csv(const Table& t);

void write_file(const std::string& path, const std::string& content);

// Line plot of the chosen y-columns against the x-column; one polyline per
// metric. Returns the SVG document.
std::string to_svg(const Table& t, int x_col,
                   const std::vector<int>& y_cols, const std::string& title,
                   bool log_y = false);

}  // namespace cq::report
