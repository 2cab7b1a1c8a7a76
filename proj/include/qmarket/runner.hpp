#pragma once
// Experiment drivers behind the CLI subcommands.  All of them throw
// ConfigError / NumericalError / ToleranceError; exit-code mapping lives in
// the CLI entry point.
#include <string>
#include <vector>

#include "qmarket/config.hpp"

namespace qmarket {

// Simulates every configured trader and writes one CSV per trader (plus an
// optional SVG of the portfolio curves).
void run_simulate(const std::string& config_path);

// Evaluates the sweep objective over the parameter grid, in parallel up to
// QMARKET_THREADS workers, and writes the table CSV.
void run_sweep(const std::string& config_path, const std::string& sweep_path);

// Compares closed forms against the brute-force evolution and writes a
// pass/fail report; throws ToleranceError when any check fails.
void run_oracle_check(const std::string& config_path);

// Emits the built-in figure parameter sets (CSV + SVG) into out_dir.
void run_figures(const std::string& out_dir);

struct CriticalArgs {
  double omega1 = 0.0;
  double omega2 = 0.0;
  double gamma2 = 0.0;
  double omega_s = 1.0;
  double omega_c = 2.0;
  double Omega_r = 1.0;
  double lambda_inf = 0.1;
  double loi = 5.0;
  double lo = 1e-6;
  double hi = 0.0;  // 0 keeps the default ceiling gamma2
};

// Prints the matching damping for trader 1, or reports that the gains do not
// cross in the bracket.
void run_critical(const CriticalArgs& args);

// Shared helpers, exposed for tests.
TimeSeries simulate_trader(const ExperimentConfig& cfg, int trader);
std::vector<std::string> sweep_value_columns(const ExperimentConfig& cfg,
                                             const SweepSpec& sweep);
std::vector<double> sweep_objective_row(const ExperimentConfig& cfg, const SweepSpec& sweep);

}  // namespace qmarket
