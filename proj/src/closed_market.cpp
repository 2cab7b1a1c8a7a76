#include "qmarket/closed_market.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <stdexcept>

#include "qmarket/errors.hpp"

namespace qmarket {

std::vector<double> linspace(double t0, double t1, int n) {
  if (n < 2) throw std::invalid_argument("linspace: need at least two samples");
  std::vector<double> t(n);
  const double dt = (t1 - t0) / (n - 1);
  for (int i = 0; i < n; ++i) t[i] = t0 + dt * i;
  t.back() = t1;
  return t;
}

Eigen::Matrix3d coupling_matrix(const TraderParams& p) {
  Eigen::Matrix3d T;
  T << p.omega_s, 0.0, p.lambda_inf,
       0.0, p.omega_c, p.lambda_inf,
       p.lambda_inf, p.lambda_inf, p.Omega;
  return T;
}

TraderPropagator::TraderPropagator(const Eigen::Matrix3d& T) {
  if ((T - T.transpose()).cwiseAbs().maxCoeff() > 1e-12)
    throw std::invalid_argument("propagator: coupling matrix must be symmetric");
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(T);
  if (es.info() != Eigen::Success)
    throw NumericalError("propagator: eigendecomposition failed");
  vecs_ = es.eigenvectors();
  vals_ = es.eigenvalues();
  const double resid = (T * vecs_ - vecs_ * vals_.asDiagonal()).cwiseAbs().maxCoeff();
  if (resid > 1e-10)
    throw NumericalError("propagator: eigendecomposition residual " + std::to_string(resid));
}

Eigen::Matrix3cd TraderPropagator::at(double t) const {
  Eigen::Vector3cd phase;
  for (int m = 0; m < 3; ++m) phase(m) = std::exp(Complex(0.0, -vals_(m) * t));
  Eigen::Matrix3cd V = vecs_.cast<Complex>() * phase.asDiagonal() *
                       vecs_.transpose().cast<Complex>();
  if ((V * V.adjoint() - Eigen::Matrix3cd::Identity()).cwiseAbs().maxCoeff() > 1e-10)
    throw NumericalError("propagator: V(t) lost unitarity");
  return V;
}

Eigen::Matrix3cd propagator(const Eigen::Matrix3d& T, double t) {
  return TraderPropagator(T).at(t);
}

Eigen::Vector3d occupations(const Eigen::Matrix3cd& V, const MarketInit& init) {
  const Eigen::Vector3d n0(init.shares, init.cash, init.loi);
  return V.cwiseAbs2() * n0;
}

TimeSeries portfolio_series(const TraderParams& p, const MarketInit& init,
                            const std::vector<double>& t_grid) {
  TraderPropagator prop(coupling_matrix(p));
  TimeSeries out;
  out.t = t_grid;
  out.n_shares.reserve(t_grid.size());
  out.n_cash.reserve(t_grid.size());
  out.n_loi.reserve(t_grid.size());
  out.portfolio.reserve(t_grid.size());
  for (double t : t_grid) {
    const Eigen::Vector3d n = occupations(prop.at(t), init);
    out.n_shares.push_back(n(0));
    out.n_cash.push_back(n(1));
    out.n_loi.push_back(n(2));
    out.portfolio.push_back(n(0) + n(1));
  }
  return out;
}

double peak_to_peak(const std::vector<double>& y) {
  if (y.empty()) throw std::invalid_argument("peak_to_peak: empty series");
  auto [lo, hi] = std::minmax_element(y.begin(), y.end());
  return *hi - *lo;
}

double dominant_frequency(const std::vector<double>& y, double dt) {
  const int n = static_cast<int>(y.size());
  if (n < 4) throw std::invalid_argument("dominant_frequency: series too short");
  if (!(dt > 0)) throw std::invalid_argument("dominant_frequency: dt must be positive");
  int best = 1;
  double best_mag = -1.0;
  for (int m = 1; m <= n / 2; ++m) {
    Complex acc(0, 0);
    const double w = -2.0 * M_PI * m / n;
    for (int j = 0; j < n; ++j) acc += y[j] * std::exp(Complex(0.0, w * j));
    const double mag = std::abs(acc);
    if (mag > best_mag) {
      best_mag = mag;
      best = m;
    }
  }
  return 2.0 * M_PI * best / (n * dt);
}

}  // namespace qmarket
