#pragma once

// Two-trader market whose information mode is itself fed and damped by a
// continuum reservoir.  Closed forms are second order in the trader coupling
// with the reservoir back-action on the information mode resummed into a
// complex decay rate; DiscretizedBathIII evolves the same system exactly on
// a finite mode grid.

#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "qmarket/mode_system.hpp"
#include "qmarket/types.hpp"

namespace qmarket {

struct ReservoirSpecIII {
  double omega_s = 0.0;     // share-mode frequency
  double omega_c = 0.0;     // cash-mode frequency
  double Omega = 0.0;       // information-mode frequency
  double Omega_r = 1.0;     // reservoir dispersion slope
  double gamma = 0.0;       // information-reservoir coupling
  double lambda_inf = 0.0;  // trader-information coupling
  double n_r = 0.0;         // flat reservoir occupation per mode
  std::function<double(double)> n_r_density;  // overrides n_r when set
  double window_halfwidth = 0.0;  // quadrature window in Omega_r*k; 0 picks a default
};

struct ModeOccupations {
  double n_shares = 0.0;
  double n_cash = 0.0;
  double n_loi = 0.0;
};

// (e^{zt} - 1)/z with the removable singularity handled by a short series.
Complex expm1_over(Complex z, double t);
// d/dz of expm1_over at fixed t.
Complex expm1_over_dz(Complex z, double t);

// Complex decay rate of the information mode once the reservoir is traced
// out: Re part is the induced damping, Im part the bare frequency.
Complex information_decay(const ReservoirSpecIII& spec);

// First-order trader amplitude sourced by the initial information occupation.
Complex trader_response(const ReservoirSpecIII& spec, double omega_trader, double t);

// Long-time limit of |trader_response|^2.
double trader_response_limit_sq(const ReservoirSpecIII& spec, double omega_trader);

// Information-mode amplitude sourced by reservoir mode k, damping included;
// stays bounded for all t.
Complex reservoir_to_information(const ReservoirSpecIII& spec, double k, double t);

// Trader amplitude sourced by reservoir mode k through the information mode.
Complex reservoir_to_trader(const ReservoirSpecIII& spec, double omega_trader, double k,
                            double t);

// Mode occupations at time t.  The bath term integrates the reservoir
// occupation against the two-step kernels; disable it to isolate the
// information-seeded part.
ModeOccupations occupations_model3(const ReservoirSpecIII& spec, const MarketInit& init,
                                   double t, bool with_bath_term = true);

TimeSeries series_model3(const ReservoirSpecIII& spec, const MarketInit& init,
                         const std::vector<double>& t_grid, bool with_bath_term = true);

// Long-time portfolio gain over the initial trader holdings, from the initial
// information occupation alone.
double delta_pi_model3(const ReservoirSpecIII& spec, double loi0);

struct TraderComparison {
  double delta_pi_1 = 0.0;
  double delta_pi_2 = 0.0;
  int advantaged = 0;  // 1 or 2; 0 on an exact tie
};

// Both specs must agree on the market frequencies, the dispersion slope and
// the trader coupling; the traders differ in information tuning and damping.
TraderComparison compare_traders(const ReservoirSpecIII& trader1,
                                 const ReservoirSpecIII& trader2, double loi0);

struct CriticalGamma {
  bool found = false;
  double gamma1 = 0.0;
  double target_delta_pi = 0.0;
  double residual = 0.0;
};

// Damping for trader 1 at which its long-time gain equals trader 2's.  The
// gain is strictly decreasing in gamma, so the search brackets (lo, hi] with
// hi defaulting to trader 2's damping; found=false when the gains do not
// cross there.
CriticalGamma critical_gamma1(const ReservoirSpecIII& trader1, const ReservoirSpecIII& trader2,
                              double loi0, double lo = 1e-6, double hi = 0.0);

class DiscretizedBathIII {
 public:
  DiscretizedBathIII(const ReservoirSpecIII& spec, const MarketInit& init, BathWindow window);

  ModeOccupations occupations(double t) const;
  double portfolio(double t) const;
  double delta_pi(double t) const;
  // Weight of the information-mode amplitude in the outer 2% of reservoir
  // cells; grows when the window is too small for the requested time.
  double leakage_fraction(double t) const;

  int n_modes() const { return static_cast<int>(kgrid_.size()); }
  const Eigen::MatrixXd& dense_matrix() const { return h_; }
  Eigen::VectorXd initial_occupations() const;

 private:
  ReservoirSpecIII spec_;
  MarketInit init_;
  double dk_ = 0.0;
  Eigen::VectorXd kgrid_;
  Eigen::VectorXd nres_;
  Eigen::MatrixXd h_;
  SpectralPropagator prop_;
};

}  // namespace qmarket
