#pragma once
// Open market, variant one: shares and cash share one frequency and couple to
// a continuum of LoI modes with linear dispersion. A flat-continuum (Markov)
// reduction gives closed-form occupations; a finite discretized bath provides
// the independent oracle for them.
#include <Eigen/Dense>
#include <functional>
#include <utility>
#include <vector>

#include "qmarket/mode_system.hpp"
#include "qmarket/types.hpp"

namespace qmarket {

struct ReservoirSpecII {
  double omega = 0;       // shared share/cash frequency
  double Omega = 0;       // dispersion slope: band mode k sits at Omega*k
  double lambda_inf = 0;  // coupling density
  double n_I = 0;         // uniform bath occupation per mode
  std::function<double(double)> n_density;  // optional k-dependent override
  // Half-width of the kernel integration window in omega - Omega*k.
  // 0 selects the default 40 * max(gamma_prime, 1).
  double window_halfwidth = 0;
};

// Effective relaxation rate 2 pi lambda^2 / Omega.
double gamma_prime(const ReservoirSpecII& spec);

// Response kernel (e^{(i(w - Ok) + g')t} - 1) / (i(w - Ok) + g').
// Rejects lambda_inf = 0, where the relaxation rate vanishes.
Complex eta1_model2(const ReservoirSpecII& spec, double k, double t);

// |eta1|^2 e^{-2 g' t} in a form stable for arbitrarily large t.
double eta1_sq_damped(const ReservoirSpecII& spec, double k, double t);

// Closed-form (N_S, N_K) at time t. lambda_inf = 0 short-circuits to free
// evolution (occupations frozen).
std::pair<double, double> occupations_model2(const ReservoirSpecII& spec,
                                             const MarketInit& init, double t);

TimeSeries series_model2(const ReservoirSpecII& spec, const MarketInit& init,
                         const std::vector<double>& t_grid);

// Long-time portfolio shift -pi0/2 + n_I; independent of every frequency.
double delta_pi_model2(double pi0, double n_I);

// Quadrature value of 2 l^2 O^2 * integral dk / (4 pi^2 l^4 + O^2 (w - O k)^2),
// which is 1 in exact arithmetic for every (l, O, w) with l, O > 0.
double lorentzian_identity(const ReservoirSpecII& spec);

// Finite bath oracle. The share/cash pair rotates into a coupled symmetric
// combination (one arrowhead system) plus a free antisymmetric one, so the
// eigendecomposition stays affordable for thousands of band modes.
class DiscretizedBathII {
 public:
  DiscretizedBathII(const ReservoirSpecII& spec, const MarketInit& init, BathWindow win);
  std::pair<double, double> occupations(double t) const;  // (N_S, N_K)
  double portfolio(double t) const;
  // Fraction of the bath response carried by the outermost 2% of modes on
  // each side; large values mean the window clips the physics.
  double leakage_fraction(double t) const;
  int n_modes() const { return static_cast<int>(kgrid_.size()); }
  // Dense equivalents for cross-checks.
  Eigen::MatrixXd dense_matrix() const;
  Eigen::VectorXd initial_occupations() const;

 private:
  ReservoirSpecII spec_;
  MarketInit init_;
  double dk_;
  Eigen::VectorXd kgrid_, nres_;
  ArrowheadSpectrum arrow_;
};

}  // namespace qmarket
