#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

namespace klfls {

// Tabular output: numeric cells render with 12 significant digits,
// locale independent, so identical runs produce identical bytes.
struct Table {
  using Cell = std::variant<double, std::int64_t, std::string>;
  std::vector<std::string> header;
  std::vector<std::vector<Cell>> rows;
};

std::string csv_to_string(const Table& table);
void write_csv(const Table& table, const std::string& path);

std::string format_double(double v);  // 12 significant digits

struct Series {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
};

// Self-contained 800x500 line chart, one polyline per series, linear axes
// with labelled ticks.
std::string svg_to_string(const std::vector<Series>& series,
                          const std::string& x_label,
                          const std::string& y_label);
void render_svg(const std::vector<Series>& series, const std::string& x_label,
                const std::string& y_label, const std::string& path);

}  // namespace klfls
