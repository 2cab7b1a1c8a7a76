#pragma once
#include <complex>
#include <vector>

namespace qmarket {

using Complex = std::complex<double>;

// One trader's mode frequencies and information coupling. The three modes are
// shares (s), cash (c) and a lack-of-information (LoI) mode (i) whose content
// works against the trader and mediates trades between the other two.
struct TraderParams {
  double omega_s = 0;     // share-mode frequency
  double omega_c = 0;     // cash-mode frequency
  double Omega = 0;       // LoI-mode frequency
  double lambda_inf = 0;  // information coupling strength
};

// Initial occupation expectations per mode. The dynamics is linear in these,
// so they need not be integers.
struct MarketInit {
  double shares = 0;
  double cash = 0;
  double loi = 0;
};

// Sampled occupation expectations; portfolio = n_shares + n_cash.
struct TimeSeries {
  std::vector<double> t;
  std::vector<double> n_shares;
  std::vector<double> n_cash;
  std::vector<double> n_loi;
  std::vector<double> portfolio;
};

// Uniform discretization of a reservoir wavenumber window into n_k cells
// (midpoint modes, couplings scaled by sqrt of the cell width).
struct BathWindow {
  double k_min = 0;
  double k_max = 0;
  int n_k = 0;
};

std::vector<double> linspace(double t0, double t1, int n);

}  // namespace qmarket
