#include "qmarket/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include "qmarket/errors.hpp"

namespace qmarket {

namespace {

std::ofstream open_out(const std::string& path) {
  const std::filesystem::path p(path);
  if (p.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(p.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot open output file: " + path);
  return out;
}

void close_out(std::ofstream& out, const std::string& path) {
  out.flush();
  if (!out) throw ConfigError("write failed: " + path);
}

}  // namespace

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.15g", x);
  return buf;
}

void write_series_csv(const std::string& path, const TimeSeries& s) {
  const size_t n = s.t.size();
  if (s.n_shares.size() != n || s.n_cash.size() != n || s.n_loi.size() != n ||
      s.portfolio.size() != n)
    throw std::invalid_argument("series csv: ragged columns");
  std::ofstream out = open_out(path);
  out << "t,n_shares,n_cash,n_loi,portfolio,conserved_M\n";
  for (size_t i = 0; i < n; ++i) {
    const double conserved = s.n_shares[i] + s.n_cash[i] + s.n_loi[i];
    out << format_double(s.t[i]) << ',' << format_double(s.n_shares[i]) << ','
        << format_double(s.n_cash[i]) << ',' << format_double(s.n_loi[i]) << ','
        << format_double(s.portfolio[i]) << ',' << format_double(conserved) << '\n';
  }
  close_out(out, path);
}

void write_table_csv(const std::string& path, const std::vector<std::string>& header,
                     const std::vector<std::vector<double>>& rows) {
  std::ofstream out = open_out(path);
  for (size_t c = 0; c < header.size(); ++c) out << (c ? "," : "") << header[c];
  out << '\n';
  for (const auto& row : rows) {
    if (row.size() != header.size()) throw std::invalid_argument("table csv: ragged row");
    for (size_t c = 0; c < row.size(); ++c) out << (c ? "," : "") << format_double(row[c]);
    out << '\n';
  }
  close_out(out, path);
}

void write_field_csv(const std::string& path, const Grid2D& grid,
                     const Eigen::MatrixXd& field) {
  if (field.rows() != grid.n1 || field.cols() != grid.n2)
    throw std::invalid_argument("field csv: field not sampled on the grid");
  std::ofstream out = open_out(path);
  out << "q1,q2,value\n";
  for (int i = 0; i < grid.n1; ++i)
    for (int j = 0; j < grid.n2; ++j)
      out << format_double(grid.q1(i)) << ',' << format_double(grid.q2(j)) << ','
          << format_double(field(i, j)) << '\n';
  close_out(out, path);
}

void write_portfolio_csv(const std::string& path, const std::vector<PortfolioPoint>& pts,
                         const std::vector<double>& norms) {
  if (!norms.empty() && norms.size() != pts.size())
    throw std::invalid_argument("portfolio csv: norm column length mismatch");
  std::ofstream out = open_out(path);
  out << "t,pi1,pi2,q1,q2,norm\n";
  for (size_t i = 0; i < pts.size(); ++i) {
    const PortfolioPoint& p = pts[i];
    const double norm = norms.empty() ? 1.0 : norms[i];
    out << format_double(p.t) << ',' << format_double(p.pi1) << ',' << format_double(p.pi2)
        << ',' << format_double(p.q1) << ',' << format_double(p.q2) << ','
        << format_double(norm) << '\n';
  }
  close_out(out, path);
}

namespace {

constexpr double kWidth = 800.0, kHeight = 500.0;
constexpr double kLeft = 70.0, kRight = 170.0, kTop = 40.0, kBottom = 50.0;

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};
constexpr int kPaletteSize = 6;

std::string px(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

std::string tick_label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

}  // namespace

void write_svg(const std::string& path, const std::string& title,
               const std::vector<Curve>& curves) {
  if (curves.empty()) throw std::invalid_argument("svg: no curves");
  double xmin = 0, xmax = 0, ymin = 0, ymax = 0;
  bool first = true;
  for (const Curve& c : curves) {
    if (c.x.size() != c.y.size() || c.x.empty())
      throw std::invalid_argument("svg: curve '" + c.label + "' is empty or ragged");
    for (size_t i = 0; i < c.x.size(); ++i) {
      if (!std::isfinite(c.x[i]) || !std::isfinite(c.y[i]))
        throw std::invalid_argument("svg: non-finite sample in curve '" + c.label + "'");
      if (first) {
        xmin = xmax = c.x[i];
        ymin = ymax = c.y[i];
        first = false;
      }
      xmin = std::min(xmin, c.x[i]);
      xmax = std::max(xmax, c.x[i]);
      ymin = std::min(ymin, c.y[i]);
      ymax = std::max(ymax, c.y[i]);
    }
  }
  if (xmax == xmin) {
    xmin -= 1;
    xmax += 1;
  }
  const double ypad = (ymax == ymin) ? 1.0 : 0.05 * (ymax - ymin);
  ymin -= ypad;
  ymax += ypad;

  const double plot_w = kWidth - kLeft - kRight;
  const double plot_h = kHeight - kTop - kBottom;
  auto sx = [&](double x) { return kLeft + (x - xmin) / (xmax - xmin) * plot_w; };
  auto sy = [&](double y) { return kTop + (ymax - y) / (ymax - ymin) * plot_h; };

  std::ofstream out = open_out(path);
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
      << kHeight << "\" viewBox=\"0 0 " << kWidth << " " << kHeight << "\">\n";
  out << "<rect width=\"" << kWidth << "\" height=\"" << kHeight << "\" fill=\"white\"/>\n";
  out << "<text x=\"" << px(kWidth / 2) << "\" y=\"24\" text-anchor=\"middle\" "
         "font-family=\"sans-serif\" font-size=\"16\">"
      << title << "</text>\n";

  constexpr int kTicks = 5;
  for (int i = 0; i <= kTicks; ++i) {
    const double fx = xmin + (xmax - xmin) * i / kTicks;
    const double fy = ymin + (ymax - ymin) * i / kTicks;
    const double gx = sx(fx), gy = sy(fy);
    out << "<line x1=\"" << px(gx) << "\" y1=\"" << px(kTop) << "\" x2=\"" << px(gx)
        << "\" y2=\"" << px(kTop + plot_h) << "\" stroke=\"#dddddd\" stroke-width=\"1\"/>\n";
    out << "<line x1=\"" << px(kLeft) << "\" y1=\"" << px(gy) << "\" x2=\""
        << px(kLeft + plot_w) << "\" y2=\"" << px(gy)
        << "\" stroke=\"#dddddd\" stroke-width=\"1\"/>\n";
    out << "<text x=\"" << px(gx) << "\" y=\"" << px(kTop + plot_h + 18)
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">"
        << tick_label(fx) << "</text>\n";
    out << "<text x=\"" << px(kLeft - 8) << "\" y=\"" << px(gy + 4)
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">"
        << tick_label(fy) << "</text>\n";
  }
  out << "<rect x=\"" << px(kLeft) << "\" y=\"" << px(kTop) << "\" width=\"" << px(plot_w)
      << "\" height=\"" << px(plot_h) << "\" fill=\"none\" stroke=\"black\"/>\n";

  for (size_t c = 0; c < curves.size(); ++c) {
    const char* color = kPalette[c % kPaletteSize];
    out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    for (size_t i = 0; i < curves[c].x.size(); ++i) {
      if (i) out << ' ';
      out << px(sx(curves[c].x[i])) << ',' << px(sy(curves[c].y[i]));
    }
    out << "\"/>\n";
    const double ly = kTop + 16.0 + 18.0 * static_cast<double>(c);
    out << "<line x1=\"" << px(kLeft + plot_w + 10) << "\" y1=\"" << px(ly - 4) << "\" x2=\""
        << px(kLeft + plot_w + 34) << "\" y2=\"" << px(ly - 4) << "\" stroke=\"" << color
        << "\" stroke-width=\"2\"/>\n";
    out << "<text x=\"" << px(kLeft + plot_w + 40) << "\" y=\"" << px(ly)
        << "\" font-family=\"sans-serif\" font-size=\"12\">" << curves[c].label
        << "</text>\n";
  }
  out << "</svg>\n";
  close_out(out, path);
}

}  // namespace qmarket
