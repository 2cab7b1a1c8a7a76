#include "qmarket/mode_system.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "qmarket/errors.hpp"

namespace qmarket {

SpectralPropagator::SpectralPropagator(const Eigen::MatrixXd& h) {
  if (h.rows() != h.cols()) throw std::invalid_argument("spectral propagator: square matrix required");
  if ((h - h.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, h.cwiseAbs().maxCoeff()))
    throw std::invalid_argument("spectral propagator: matrix must be symmetric");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h);
  if (es.info() != Eigen::Success)
    throw NumericalError("spectral propagator: eigendecomposition failed");
  vecs_ = es.eigenvectors();
  vals_ = es.eigenvalues();
  const double resid = (h * vecs_ - vecs_ * vals_.asDiagonal()).cwiseAbs().maxCoeff();
  if (resid > 1e-8)
    throw NumericalError("spectral propagator: eigendecomposition residual " +
                         std::to_string(resid));
}

Eigen::VectorXcd SpectralPropagator::column(int b, double t) const {
  if (b < 0 || b >= size()) throw std::invalid_argument("spectral propagator: mode index out of range");
  Eigen::VectorXcd amp(size());
  for (int m = 0; m < size(); ++m)
    amp(m) = vecs_(b, m) * std::exp(Complex(0.0, -vals_(m) * t));
  return vecs_.cast<Complex>() * amp;
}

double SpectralPropagator::occupation(int a, const Eigen::VectorXd& n0, double t) const {
  if (n0.size() != size()) throw std::invalid_argument("spectral propagator: occupation vector size mismatch");
  return column(a, t).cwiseAbs2().dot(n0);
}

ArrowheadSpectrum::ArrowheadSpectrum(double a0, const Eigen::VectorXd& d,
                                     const Eigen::VectorXd& w)
    : a0_(a0), d_(d), w_(w) {
  const int n = static_cast<int>(d.size());
  if (n < 1 || w.size() != n)
    throw std::invalid_argument("arrowhead: band and coupling sizes must match");
  for (int j = 0; j + 1 < n; ++j)
    if (!(d(j) < d(j + 1)))
      throw std::invalid_argument("arrowhead: band frequencies must be strictly increasing");
  for (int j = 0; j < n; ++j)
    if (w(j) == 0.0)
      throw std::invalid_argument("arrowhead: zero coupling decouples a band mode");

  const int N = n + 1;
  sigma_.resize(N);
  off_.resize(N);
  c2_.resize(N);
  anchor_.assign(N, 0);

  const double wnorm = w.norm();

  // Root below the band: sigma = d_0 + off, off < 0.
  {
    double lo = -(wnorm + std::max(0.0, d(0) - a0) + 1.0);
    while (secular(0, lo, nullptr) >= 0.0) lo *= 2.0;
    anchor_[0] = 0;
    off_(0) = solve_offset(0, lo, 0.0);
    sigma_(0) = d(0) + off_(0);
  }
  // One root per interior gap.
  for (int i = 0; i + 1 < n; ++i) {
    const double gap = d(i + 1) - d(i);
    const double fmid = secular(i, 0.5 * gap, nullptr);
    int anchor;
    double lo, hi;
    if (fmid >= 0.0) {          // root in the left half, measure from d_i
      anchor = i; lo = 0.0; hi = 0.5 * gap;
    } else {                    // right half, measure from d_{i+1}
      anchor = i + 1; lo = -0.5 * gap; hi = 0.0;
    }
    anchor_[i + 1] = anchor;
    off_(i + 1) = solve_offset(anchor, lo, hi);
    sigma_(i + 1) = d(anchor) + off_(i + 1);
  }
  // Root above the band: sigma = d_{n-1} + off, off > 0.
  {
    double hi = wnorm + std::max(0.0, a0 - d(n - 1)) + 1.0;
    while (secular(n - 1, hi, nullptr) <= 0.0) hi *= 2.0;
    anchor_[N - 1] = n - 1;
    off_(N - 1) = solve_offset(n - 1, 0.0, hi);
    sigma_(N - 1) = d(n - 1) + off_(N - 1);
  }

  double total = 0.0;
  for (int m = 0; m < N; ++m) {
    double s = 1.0;
    for (int j = 0; j < n; ++j) {
      const double den = (d(anchor_[m]) - d(j)) + off_(m);
      const double r = w(j) / den;
      s += r * r;
    }
    c2_(m) = 1.0 / s;
    total += c2_(m);
  }
  // Completeness of the shoulder row is a sharp end-to-end accuracy check.
  if (std::abs(total - 1.0) > 1e-10)
    throw NumericalError("arrowhead: shoulder weights sum to " + std::to_string(total));
}

// f(d_anchor + off) evaluated without forming sigma - d_j by subtraction.
double ArrowheadSpectrum::secular(int anchor, double off, double* deriv) const {
  const int n = static_cast<int>(d_.size());
  double f = (d_(anchor) - a0_) + off;
  double df = 1.0;
  for (int j = 0; j < n; ++j) {
    const double den = (d_(anchor) - d_(j)) + off;
    const double r = w_(j) / den;
    f -= w_(j) * r;
    df += r * r;
  }
  if (deriv) *deriv = df;
  return f;
}

// Safeguarded Newton on the offset; the bracket (lo, hi) has f(lo) < 0 < f(hi)
// in the open interval, with poles only at the excluded endpoints.
double ArrowheadSpectrum::solve_offset(int anchor, double lo, double hi) const {
  double x = 0.5 * (lo + hi);
  for (int iter = 0; iter < 200; ++iter) {
    double df;
    const double f = secular(anchor, x, &df);
    if (f == 0.0) return x;
    if (f < 0.0) lo = x; else hi = x;
    double xn = x - f / df;
    if (!(xn > lo && xn < hi)) xn = 0.5 * (lo + hi);
    if (xn == x) break;  // fixed point at machine resolution
    x = xn;
    if (hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() *
                       std::max(std::abs(lo), std::abs(hi)))
      break;
  }
  return x;
}

Eigen::VectorXcd ArrowheadSpectrum::shoulder_column(double t) const {
  const int n = static_cast<int>(d_.size());
  const int N = n + 1;
  Eigen::VectorXcd z(N);
  for (int m = 0; m < N; ++m)
    z(m) = c2_(m) * std::exp(Complex(0.0, -sigma_(m) * t));
  Eigen::VectorXcd col = Eigen::VectorXcd::Zero(N);
  col(0) = z.sum();
  for (int m = 0; m < N; ++m) {
    const double da = d_(anchor_[m]);
    const double off = off_(m);
    const Complex zm = z(m);
    for (int j = 0; j < n; ++j)
      col(1 + j) += zm * (w_(j) / ((da - d_(j)) + off));
  }
  return col;
}

}  // namespace qmarket
