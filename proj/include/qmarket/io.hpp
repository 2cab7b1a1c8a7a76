#pragma once
// File emission: frozen-format CSV tables and self-contained SVG line plots.
// Identical inputs produce identical bytes; nothing here reads the clock or
// the environment.
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qmarket/pilotwave.hpp"
#include "qmarket/types.hpp"

namespace qmarket {

// 15 significant digits, '.' decimal separator.
std::string format_double(double x);

// Header t,n_shares,n_cash,n_loi,portfolio,conserved_M with conserved_M
// computed as the row sum of the three occupations.
void write_series_csv(const std::string& path, const TimeSeries& s);

struct Curve {
  std::string label;
  std::vector<double> x, y;
};

void write_svg(const std::string& path, const std::string& title,
               const std::vector<Curve>& curves);

void write_table_csv(const std::string& path, const std::vector<std::string>& header,
                     const std::vector<std::vector<double>>& rows);

// Flat node-per-row layout: q1,q2,value.
void write_field_csv(const std::string& path, const Grid2D& grid,
                     const Eigen::MatrixXd& field);

// Header t,pi1,pi2,q1,q2,norm; norms may be empty, which writes norm 1.
void write_portfolio_csv(const std::string& path, const std::vector<PortfolioPoint>& pts,
                         const std::vector<double>& norms);

}  // namespace qmarket
