#include "klfls/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "klfls/error.hpp"

namespace klfls {

std::string format_double(double v) {
  char buf[40];
  auto res = std::to_chars(buf, buf + sizeof(buf), v,
                           std::chars_format::general, 12);
  return std::string(buf, res.ptr);
}

std::string csv_to_string(const Table& table) {
  std::string out;
  for (size_t i = 0; i < table.header.size(); ++i) {
    if (i) out += ',';
    out += table.header[i];
  }
  out += '\n';
  for (const auto& row : table.rows) {
    for (size_t i = 0; i < row.size(); ++i) {
      if (i) out += ',';
      if (std::holds_alternative<double>(row[i]))
        out += format_double(std::get<double>(row[i]));
      else if (std::holds_alternative<std::int64_t>(row[i]))
        out += std::to_string(std::get<std::int64_t>(row[i]));
      else
        out += std::get<std::string>(row[i]);
    }
    out += '\n';
  }
  return out;
}

namespace {
void write_file(const std::string& path, const std::string& content) {
  std::filesystem::path p(path);
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream f(path, std::ios::binary);
  if (!f) fail(ErrorCode::IoError, "cannot open for writing: " + path);
  f << content;
  if (!f) fail(ErrorCode::IoError, "write failed: " + path);
}

std::string tick_label(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), v,
                           std::chars_format::general, 4);
  return std::string(buf, res.ptr);
}
}  // namespace

void write_csv(const Table& table, const std::string& path) {
  write_file(path, csv_to_string(table));
}

std::string svg_to_string(const std::vector<Series>& series,
                          const std::string& x_label,
                          const std::string& y_label) {
  const int W = 800, H = 500;
  const double ml = 70, mr = 20, mt = 20, mb = 50;
  const double pw = W - ml - mr, ph = H - mt - mb;

  double xmin = 0, xmax = 1, ymin = 0, ymax = 1;
  bool first = true;
  for (const auto& s : series)
    for (size_t i = 0; i < s.x.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      if (first) {
        xmin = xmax = s.x[i];
        ymin = ymax = s.y[i];
        first = false;
      } else {
        xmin = std::min(xmin, s.x[i]);
        xmax = std::max(xmax, s.x[i]);
        ymin = std::min(ymin, s.y[i]);
        ymax = std::max(ymax, s.y[i]);
      }
    }
  if (xmax == xmin) xmax = xmin + 1;
  if (ymax == ymin) ymax = ymin + 1;

  auto px = [&](double x) { return ml + (x - xmin) / (xmax - xmin) * pw; };
  auto py = [&](double y) { return mt + ph - (y - ymin) / (ymax - ymin) * ph; };

  static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                  "#9467bd", "#8c564b", "#17becf", "#7f7f7f"};
  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W
      << "\" height=\"" << H << "\" viewBox=\"0 0 " << W << ' ' << H << "\">\n";
  svg << "<rect width=\"" << W << "\" height=\"" << H << "\" fill=\"white\"/>\n";
  // axes
  svg << "<line x1=\"" << ml << "\" y1=\"" << mt + ph << "\" x2=\"" << ml + pw
      << "\" y2=\"" << mt + ph << "\" stroke=\"black\"/>\n";
  svg << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml
      << "\" y2=\"" << mt + ph << "\" stroke=\"black\"/>\n";
  const int nticks = 5;
  for (int i = 0; i <= nticks; ++i) {
    double xv = xmin + (xmax - xmin) * i / nticks;
    double yv = ymin + (ymax - ymin) * i / nticks;
    svg << "<line x1=\"" << px(xv) << "\" y1=\"" << mt + ph << "\" x2=\""
        << px(xv) << "\" y2=\"" << mt + ph + 5 << "\" stroke=\"black\"/>\n";
    svg << "<text x=\"" << px(xv) << "\" y=\"" << mt + ph + 20
        << "\" font-size=\"11\" text-anchor=\"middle\">" << tick_label(xv)
        << "</text>\n";
    svg << "<line x1=\"" << ml - 5 << "\" y1=\"" << py(yv) << "\" x2=\"" << ml
        << "\" y2=\"" << py(yv) << "\" stroke=\"black\"/>\n";
    svg << "<text x=\"" << ml - 8 << "\" y=\"" << py(yv) + 4
        << "\" font-size=\"11\" text-anchor=\"end\">" << tick_label(yv)
        << "</text>\n";
  }
  svg << "<text x=\"" << ml + pw / 2 << "\" y=\"" << H - 10
      << "\" font-size=\"13\" text-anchor=\"middle\">" << x_label
      << "</text>\n";
  svg << "<text x=\"15\" y=\"" << mt + ph / 2
      << "\" font-size=\"13\" text-anchor=\"middle\" transform=\"rotate(-90 15 "
      << mt + ph / 2 << ")\">" << y_label << "</text>\n";

  for (size_t si = 0; si < series.size(); ++si) {
    const auto& s = series[si];
    const char* color = palette[si % 8];
    svg << "<polyline fill=\"none\" stroke=\"" << color
        << "\" stroke-width=\"1.5\" points=\"";
    for (size_t i = 0; i < s.x.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      svg << px(s.x[i]) << ',' << py(s.y[i]) << ' ';
    }
    svg << "\"/>\n";
    svg << "<text x=\"" << ml + pw - 8 << "\" y=\"" << mt + 16 + 16 * si
        << "\" font-size=\"12\" text-anchor=\"end\" fill=\"" << color << "\">"
        << s.name << "</text>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

void render_svg(const std::vector<Series>& series, const std::string& x_label,
                const std::string& y_label, const std::string& path) {
  write_file(path, svg_to_string(series, x_label, y_label));
}

}  // namespace klfls
