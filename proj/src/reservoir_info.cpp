#include "qmarket/reservoir_info.hpp"

#include <cmath>
#include <stdexcept>

#include "qmarket/errors.hpp"
#include "qmarket/quadrature.hpp"

namespace qmarket {

namespace {

void check_spec(const ReservoirSpecII& spec) {
  if (!(spec.Omega > 0))
    throw std::invalid_argument("reservoir spec: dispersion slope must be positive");
  if (spec.lambda_inf < 0)
    throw std::invalid_argument("reservoir spec: negative coupling");
}

double bath_density(const ReservoirSpecII& spec, double k) {
  return spec.n_density ? spec.n_density(k) : spec.n_I;
}

double window_halfwidth(const ReservoirSpecII& spec) {
  if (spec.window_halfwidth > 0) return spec.window_halfwidth;
  return 40.0 * std::max(gamma_prime(spec), 1.0);
}

}  // namespace

double gamma_prime(const ReservoirSpecII& spec) {
  check_spec(spec);
  return 2.0 * M_PI * spec.lambda_inf * spec.lambda_inf / spec.Omega;
}

Complex eta1_model2(const ReservoirSpecII& spec, double k, double t) {
  check_spec(spec);
  if (spec.lambda_inf == 0.0)
    throw std::invalid_argument("eta1: kernel undefined at zero coupling");
  const Complex z(gamma_prime(spec), spec.omega - spec.Omega * k);
  return (std::exp(z * t) - 1.0) / z;
}

double eta1_sq_damped(const ReservoirSpecII& spec, double k, double t) {
  const double gp = gamma_prime(spec);
  if (spec.lambda_inf == 0.0)
    throw std::invalid_argument("eta1: kernel undefined at zero coupling");
  const double theta = spec.omega - spec.Omega * k;
  const double e = std::exp(-gp * t);
  const double num = 1.0 - 2.0 * e * std::cos(theta * t) + e * e;
  return num / (gp * gp + theta * theta);
}

std::pair<double, double> occupations_model2(const ReservoirSpecII& spec,
                                             const MarketInit& init, double t) {
  check_spec(spec);
  const double S = init.shares, K = init.cash;
  if (spec.lambda_inf == 0.0) return {S, K};

  const double gp = gamma_prime(spec);
  const double E = std::exp(-gp * t);
  double bath = 0.0;
  if (t > 0.0) {
    const double U = window_halfwidth(spec);
    const double k0 = spec.omega / spec.Omega;
    const double hw = U / spec.Omega;
    QuadOptions opt;
    opt.rel_tol = 1e-8;
    auto f = [&](double k) { return bath_density(spec, k) * eta1_sq_damped(spec, k, t); };
    bath = integrate_segmented(f, {k0 - hw, k0, k0 + hw}, opt).value;
  }
  const double lam2 = spec.lambda_inf * spec.lambda_inf;
  const double n_cash = 0.25 * K * (1.0 + E) * (1.0 + E) +
                        0.25 * S * (1.0 - E) * (1.0 - E) + lam2 * bath;
  // The antisymmetric share/cash component evolves freely and just decays.
  const double n_shares = n_cash + (S - K) * E;
  return {n_shares, n_cash};
}

TimeSeries series_model2(const ReservoirSpecII& spec, const MarketInit& init,
                         const std::vector<double>& t_grid) {
  TimeSeries out;
  out.t = t_grid;
  const double pi0 = init.shares + init.cash;
  for (double t : t_grid) {
    auto [ns, nk] = occupations_model2(spec, init, t);
    out.n_shares.push_back(ns);
    out.n_cash.push_back(nk);
    out.portfolio.push_back(ns + nk);
    // Bath content implied by total-quanta conservation, relative to t = 0.
    out.n_loi.push_back(pi0 - (ns + nk));
  }
  return out;
}

double delta_pi_model2(double pi0, double n_I) { return -0.5 * pi0 + n_I; }

double lorentzian_identity(const ReservoirSpecII& spec) {
  check_spec(spec);
  if (spec.lambda_inf <= 0.0)
    throw std::invalid_argument("lorentzian identity: coupling must be positive");
  const double l2 = spec.lambda_inf * spec.lambda_inf;
  const double a = 2.0 * M_PI * l2;  // half-width of the kernel in omega - Omega*k
  auto f = [&](double k) {
    const double th = spec.omega - spec.Omega * k;
    return 1.0 / (a * a + spec.Omega * spec.Omega * th * th);
  };
  QuadOptions opt;
  opt.rel_tol = 1e-9;
  const double val =
      integrate_real_line(f, spec.omega / spec.Omega, a / (spec.Omega * spec.Omega), opt).value;
  return 2.0 * l2 * spec.Omega * spec.Omega * val;
}

DiscretizedBathII::DiscretizedBathII(const ReservoirSpecII& spec, const MarketInit& init,
                                     BathWindow win)
    : spec_(spec),
      init_(init),
      dk_((win.k_max - win.k_min) / win.n_k),
      kgrid_(win.n_k),
      nres_(win.n_k),
      arrow_([&] {
        check_spec(spec);
        if (!(spec.lambda_inf > 0))
          throw std::invalid_argument("discretized bath: coupling must be positive");
        if (win.n_k < 2 || !(win.k_min < win.k_max))
          throw std::invalid_argument("discretized bath: bad window");
        const double dk = (win.k_max - win.k_min) / win.n_k;
        Eigen::VectorXd d(win.n_k), w(win.n_k);
        for (int j = 0; j < win.n_k; ++j) {
          const double k = win.k_min + (j + 0.5) * dk;
          d(j) = spec.Omega * k;
          w(j) = std::sqrt(2.0) * spec.lambda_inf * std::sqrt(dk);
        }
        return ArrowheadSpectrum(spec.omega, d, w);
      }()) {
  for (int j = 0; j < win.n_k; ++j) {
    kgrid_(j) = win.k_min + (j + 0.5) * dk_;
    nres_(j) = bath_density(spec_, kgrid_(j));
  }
}

std::pair<double, double> DiscretizedBathII::occupations(double t) const {
  const Eigen::VectorXcd col = arrow_.shoulder_column(t);
  const Complex wuu = col(0);
  const Complex phase = std::exp(Complex(0.0, -spec_.omega * t));
  const double sym = 0.25 * std::norm(wuu + phase);
  const double asym = 0.25 * std::norm(wuu - phase);
  double bath = 0.0;
  for (int j = 0; j < n_modes(); ++j) bath += std::norm(col(1 + j)) * nres_(j);
  bath *= 0.5;
  const double n_s = sym * init_.shares + asym * init_.cash + bath;
  const double n_c = asym * init_.shares + sym * init_.cash + bath;
  return {n_s, n_c};
}

double DiscretizedBathII::portfolio(double t) const {
  auto [ns, nc] = occupations(t);
  return ns + nc;
}

double DiscretizedBathII::leakage_fraction(double t) const {
  const Eigen::VectorXcd col = arrow_.shoulder_column(t);
  const int n = n_modes();
  const int band = std::max(1, static_cast<int>(std::lround(0.02 * n)));
  double edge = 0.0, total = 0.0;
  for (int j = 0; j < n; ++j) {
    const double r = std::norm(col(1 + j));
    total += r;
    if (j < band || j >= n - band) edge += r;
  }
  return total > 0.0 ? edge / total : 0.0;
}

Eigen::MatrixXd DiscretizedBathII::dense_matrix() const {
  const int n = n_modes();
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(n + 2, n + 2);
  h(0, 0) = h(1, 1) = spec_.omega;
  const double w = spec_.lambda_inf * std::sqrt(dk_);
  for (int j = 0; j < n; ++j) {
    h(2 + j, 2 + j) = spec_.Omega * kgrid_(j);
    h(0, 2 + j) = h(2 + j, 0) = w;
    h(1, 2 + j) = h(2 + j, 1) = w;
  }
  return h;
}

Eigen::VectorXd DiscretizedBathII::initial_occupations() const {
  Eigen::VectorXd n0(n_modes() + 2);
  n0(0) = init_.shares;
  n0(1) = init_.cash;
  n0.tail(n_modes()) = nres_;
  return n0;
}

}  // namespace qmarket
