#include "qmarket/reservoir_generated.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "qmarket/errors.hpp"
#include "qmarket/quadrature.hpp"

namespace qmarket {

namespace {

void check_spec(const ReservoirSpecIII& spec) {
  if (!(spec.Omega_r > 0))
    throw std::invalid_argument("reservoir spec: dispersion slope must be positive");
  if (spec.gamma < 0) throw std::invalid_argument("reservoir spec: negative damping coupling");
  if (spec.lambda_inf < 0) throw std::invalid_argument("reservoir spec: negative coupling");
}

double bath_density(const ReservoirSpecIII& spec, double k) {
  return spec.n_r_density ? spec.n_r_density(k) : spec.n_r;
}

bool has_bath(const ReservoirSpecIII& spec) {
  return spec.n_r_density != nullptr || spec.n_r != 0.0;
}

// Integration knots in k for kernels peaked where the reservoir is resonant
// with either the trader or the information mode.
std::vector<double> bath_knots(const ReservoirSpecIII& spec, double omega_trader) {
  const double re_g = information_decay(spec).real();
  const double M =
      spec.window_halfwidth > 0 ? spec.window_halfwidth : 40.0 * std::max(1.0, re_g);
  const double lo = std::min(omega_trader, spec.Omega);
  const double hi = std::max(omega_trader, spec.Omega);
  std::vector<double> knots = {(lo - M) / spec.Omega_r, lo / spec.Omega_r, hi / spec.Omega_r,
                               (hi + M) / spec.Omega_r};
  knots.erase(std::unique(knots.begin(), knots.end()), knots.end());
  return knots;
}

double bath_integral(const ReservoirSpecIII& spec, double omega_trader, double t,
                     const std::function<double(double)>& weight) {
  QuadOptions opt;
  opt.rel_tol = 1e-8;
  return integrate_segmented(weight, bath_knots(spec, omega_trader), opt).value;
}

}  // namespace

Complex expm1_over(Complex z, double t) {
  const Complex w = z * t;
  if (std::abs(w) < 1e-4) {
    return t * (1.0 + w * (0.5 + w * (1.0 / 6.0 + w * (1.0 / 24.0 + w / 120.0))));
  }
  return (std::exp(w) - 1.0) / z;
}

Complex expm1_over_dz(Complex z, double t) {
  const Complex w = z * t;
  if (std::abs(w) < 1e-3) {
    const double t2 = t * t;
    return t2 * (0.5 + w * (1.0 / 3.0 + w * (1.0 / 8.0 + w * (1.0 / 30.0 + w / 144.0))));
  }
  const Complex e = std::exp(w);
  return (e * (w - 1.0) + 1.0) / (z * z);
}

Complex information_decay(const ReservoirSpecIII& spec) {
  check_spec(spec);
  return Complex(M_PI * spec.gamma * spec.gamma / spec.Omega_r, spec.Omega);
}

Complex trader_response(const ReservoirSpecIII& spec, double omega_trader, double t) {
  const Complex B = Complex(0.0, omega_trader) - information_decay(spec);
  return expm1_over(B, t);
}

double trader_response_limit_sq(const ReservoirSpecIII& spec, double omega_trader) {
  const Complex g = information_decay(spec);
  const double re = g.real();
  const double detune = omega_trader - spec.Omega;
  const double den = re * re + detune * detune;
  if (den == 0.0)
    throw std::invalid_argument("trader response limit: undamped resonant information mode");
  return 1.0 / den;
}

Complex reservoir_to_information(const ReservoirSpecIII& spec, double k, double t) {
  const Complex g = information_decay(spec);
  const Complex A = g - Complex(0.0, spec.Omega_r * k);
  // Damped form of e^{-g t} (e^{At}-1)/A; both exponentials decay or rotate.
  if (std::abs(A) < 1e-12) return t * std::exp(-g * t);
  return (std::exp(Complex(0.0, -spec.Omega_r * k) * t) - std::exp(-g * t)) / A;
}

Complex reservoir_to_trader(const ReservoirSpecIII& spec, double omega_trader, double k,
                            double t) {
  const Complex g = information_decay(spec);
  const Complex A = g - Complex(0.0, spec.Omega_r * k);
  const Complex B = Complex(0.0, omega_trader) - g;
  if (std::abs(A) < 1e-12) return expm1_over_dz(B, t);
  // A + B is purely imaginary, so both terms stay bounded in t.
  return (expm1_over(A + B, t) - expm1_over(B, t)) / A;
}

ModeOccupations occupations_model3(const ReservoirSpecIII& spec, const MarketInit& init,
                                   double t, bool with_bath_term) {
  check_spec(spec);
  const Complex g = information_decay(spec);
  const double lam2 = spec.lambda_inf * spec.lambda_inf;
  const double gam2 = spec.gamma * spec.gamma;
  const double decay = std::exp(-2.0 * g.real() * t);

  ModeOccupations occ;
  occ.n_shares = init.shares + lam2 * init.loi * std::norm(trader_response(spec, spec.omega_s, t));
  occ.n_cash = init.cash + lam2 * init.loi * std::norm(trader_response(spec, spec.omega_c, t));
  occ.n_loi = init.loi * decay;

  if (with_bath_term && has_bath(spec) && t > 0.0) {
    auto trader_term = [&](double omega) {
      return bath_integral(spec, omega, t, [&](double k) {
        return bath_density(spec, k) * std::norm(reservoir_to_trader(spec, omega, k, t));
      });
    };
    occ.n_shares += lam2 * gam2 * trader_term(spec.omega_s);
    occ.n_cash += lam2 * gam2 * trader_term(spec.omega_c);
    occ.n_loi += gam2 * bath_integral(spec, spec.Omega, t, [&](double k) {
      return bath_density(spec, k) * std::norm(reservoir_to_information(spec, k, t));
    });
  }
  return occ;
}

TimeSeries series_model3(const ReservoirSpecIII& spec, const MarketInit& init,
                         const std::vector<double>& t_grid, bool with_bath_term) {
  TimeSeries out;
  out.t = t_grid;
  const double total0 = init.shares + init.cash + init.loi;
  for (double t : t_grid) {
    const ModeOccupations occ = occupations_model3(spec, init, t, with_bath_term);
    const double pi = occ.n_shares + occ.n_cash;
    out.n_shares.push_back(occ.n_shares);
    out.n_cash.push_back(occ.n_cash);
    out.portfolio.push_back(pi);
    // Information-sector content implied by conservation of the closed system.
    out.n_loi.push_back(total0 - pi);
  }
  return out;
}

double delta_pi_model3(const ReservoirSpecIII& spec, double loi0) {
  check_spec(spec);
  const double lam2 = spec.lambda_inf * spec.lambda_inf;
  return lam2 * loi0 *
         (trader_response_limit_sq(spec, spec.omega_s) +
          trader_response_limit_sq(spec, spec.omega_c));
}

namespace {

void check_shared(const ReservoirSpecIII& a, const ReservoirSpecIII& b) {
  if (a.omega_s != b.omega_s || a.omega_c != b.omega_c)
    throw std::invalid_argument("trader comparison: market frequencies differ");
  if (a.Omega_r != b.Omega_r)
    throw std::invalid_argument("trader comparison: dispersion slopes differ");
  if (a.lambda_inf != b.lambda_inf)
    throw std::invalid_argument("trader comparison: trader couplings differ");
}

}  // namespace

TraderComparison compare_traders(const ReservoirSpecIII& trader1,
                                 const ReservoirSpecIII& trader2, double loi0) {
  check_shared(trader1, trader2);
  TraderComparison out;
  out.delta_pi_1 = delta_pi_model3(trader1, loi0);
  out.delta_pi_2 = delta_pi_model3(trader2, loi0);
  if (out.delta_pi_1 > out.delta_pi_2)
    out.advantaged = 1;
  else if (out.delta_pi_2 > out.delta_pi_1)
    out.advantaged = 2;
  return out;
}

CriticalGamma critical_gamma1(const ReservoirSpecIII& trader1, const ReservoirSpecIII& trader2,
                              double loi0, double lo, double hi) {
  check_shared(trader1, trader2);
  if (!(lo > 0)) throw std::invalid_argument("critical gamma: search floor must be positive");
  if (hi == 0.0) hi = trader2.gamma;
  if (!(hi > lo))
    throw std::invalid_argument("critical gamma: search ceiling must exceed the floor");

  CriticalGamma out;
  out.target_delta_pi = delta_pi_model3(trader2, loi0);
  auto f = [&](double g) {
    ReservoirSpecIII s = trader1;
    s.gamma = g;
    return delta_pi_model3(s, loi0) - out.target_delta_pi;
  };

  double a = lo, b = hi;
  const double fa = f(a), fb = f(b);
  if (fa == 0.0) {
    out.found = true;
    out.gamma1 = a;
    return out;
  }
  if (fb == 0.0) {
    out.found = true;
    out.gamma1 = b;
    return out;
  }
  // The gain falls monotonically with damping, so a crossing needs f(a) > 0
  // and f(b) < 0.
  if (fa < 0.0 || fb > 0.0) return out;

  double mid = 0.5 * (a + b), fm = f(mid);
  for (int iter = 0; iter < 200 && std::abs(fm) >= 1e-10; ++iter) {
    if (fm > 0.0)
      a = mid;
    else
      b = mid;
    const double next = 0.5 * (a + b);
    if (next == mid || next == a || next == b) break;
    mid = next;
    fm = f(mid);
  }
  if (std::abs(fm) >= 1e-10)
    throw NumericalError("critical gamma: bisection stalled above residual tolerance");
  out.found = true;
  out.gamma1 = mid;
  out.residual = std::abs(fm);
  return out;
}

DiscretizedBathIII::DiscretizedBathIII(const ReservoirSpecIII& spec, const MarketInit& init,
                                       BathWindow window)
    : spec_(spec),
      init_(init),
      dk_((window.k_max - window.k_min) / window.n_k),
      kgrid_(window.n_k),
      nres_(window.n_k),
      h_([&] {
        check_spec(spec);
        if (window.n_k < 2 || !(window.k_min < window.k_max))
          throw std::invalid_argument("discretized bath: bad window");
        const int n = window.n_k;
        const double dk = (window.k_max - window.k_min) / n;
        Eigen::MatrixXd h = Eigen::MatrixXd::Zero(n + 3, n + 3);
        h(0, 0) = spec.omega_s;
        h(1, 1) = spec.omega_c;
        h(2, 2) = spec.Omega;
        h(0, 2) = h(2, 0) = spec.lambda_inf;
        h(1, 2) = h(2, 1) = spec.lambda_inf;
        const double w = spec.gamma * std::sqrt(dk);
        for (int j = 0; j < n; ++j) {
          const double k = window.k_min + (j + 0.5) * dk;
          h(3 + j, 3 + j) = spec.Omega_r * k;
          h(2, 3 + j) = h(3 + j, 2) = w;
        }
        return h;
      }()),
      prop_(h_) {
  for (int j = 0; j < n_modes(); ++j) {
    kgrid_(j) = window.k_min + (j + 0.5) * dk_;
    nres_(j) = bath_density(spec_, kgrid_(j));
  }
}

ModeOccupations DiscretizedBathIII::occupations(double t) const {
  const Eigen::VectorXd n0 = initial_occupations();
  ModeOccupations occ;
  occ.n_shares = prop_.occupation(0, n0, t);
  occ.n_cash = prop_.occupation(1, n0, t);
  occ.n_loi = prop_.occupation(2, n0, t);
  return occ;
}

double DiscretizedBathIII::portfolio(double t) const {
  const ModeOccupations occ = occupations(t);
  return occ.n_shares + occ.n_cash;
}

double DiscretizedBathIII::delta_pi(double t) const {
  return portfolio(t) - (init_.shares + init_.cash);
}

double DiscretizedBathIII::leakage_fraction(double t) const {
  const Eigen::VectorXcd col = prop_.column(2, t);
  const int n = n_modes();
  const int band = std::max(1, static_cast<int>(std::lround(0.02 * n)));
  double edge = 0.0, total = 0.0;
  for (int j = 0; j < n; ++j) {
    const double r = std::norm(col(3 + j));
    total += r;
    if (j < band || j >= n - band) edge += r;
  }
  return total > 0.0 ? edge / total : 0.0;
}

Eigen::VectorXd DiscretizedBathIII::initial_occupations() const {
  Eigen::VectorXd n0(n_modes() + 3);
  n0(0) = init_.shares;
  n0(1) = init_.cash;
  n0(2) = init_.loi;
  n0.tail(n_modes()) = nres_;
  return n0;
}

}  // namespace qmarket
