#pragma once
// Adaptive Gauss-Kronrod (7,15) quadrature on finite intervals, plus a
// rational change of variables for integrands over the whole real line.
// Error estimation follows the classic scaled |K15-G7| recipe.
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <queue>
#include <vector>

#include "qmarket/errors.hpp"

namespace qmarket {

struct QuadOptions {
  double rel_tol = 1e-10;
  double abs_tol = 0.0;
  int max_intervals = 50000;
  bool throw_on_failure = true;
};

struct QuadResult {
  double value = 0;
  double error = 0;  // conservative absolute error estimate
  int intervals = 0;
  bool converged = false;
};

namespace quad_detail {

// 15-point Kronrod abscissae (positive half) and weights, with the embedded
// 7-point Gauss weights sitting on the odd-indexed abscissae.
inline constexpr double kXgk[8] = {
    0.991455371120813, 0.949107912342759, 0.864864423359769,
    0.741531185599394, 0.586087235467691, 0.405845151377397,
    0.207784955007898, 0.000000000000000};
inline constexpr double kWgk[8] = {
    0.022935322010529, 0.063092092629979, 0.104790010322250,
    0.140653259715525, 0.169004726639267, 0.190350578064785,
    0.204432940075298, 0.209482141084728};
inline constexpr double kWg[4] = {
    0.129484966168870, 0.279705391489277, 0.381830050505119,
    0.417959183673469};

struct Segment {
  double a, b;
  double value, error;
  bool operator<(const Segment& o) const { return error < o.error; }
};

template <class F>
Segment gk15(F& f, double a, double b) {
  const double h = 0.5 * (b - a);
  const double c = 0.5 * (a + b);
  double fv[15];
  fv[7] = f(c);
  for (int j = 0; j < 7; ++j) {
    const double dx = h * kXgk[j];
    fv[j] = f(c - dx);
    fv[14 - j] = f(c + dx);
  }
  double resk = kWgk[7] * fv[7];
  double resg = kWg[3] * fv[7];
  double resabs = kWgk[7] * std::abs(fv[7]);
  for (int j = 0; j < 7; ++j) {
    const double s = fv[j] + fv[14 - j];
    resk += kWgk[j] * s;
    resabs += kWgk[j] * (std::abs(fv[j]) + std::abs(fv[14 - j]));
    if (j % 2 == 1) resg += kWg[j / 2] * s;
  }
  const double reskh = 0.5 * resk;
  double resasc = kWgk[7] * std::abs(fv[7] - reskh);
  for (int j = 0; j < 7; ++j)
    resasc += kWgk[j] * (std::abs(fv[j] - reskh) + std::abs(fv[14 - j] - reskh));
  resasc *= std::abs(h);
  resabs *= std::abs(h);
  double err = std::abs((resk - resg) * h);
  if (resasc != 0.0 && err != 0.0)
    err = resasc * std::min(1.0, std::pow(200.0 * err / resasc, 1.5));
  const double eps50 = 50.0 * std::numeric_limits<double>::epsilon();
  if (resabs > std::numeric_limits<double>::min() / eps50)
    err = std::max(eps50 * resabs, err);
  return Segment{a, b, resk * h, err};
}

}  // namespace quad_detail

template <class F>
QuadResult integrate_segmented(F&& f, const std::vector<double>& knots,
                               QuadOptions opt = {}) {
  if (knots.size() < 2) throw std::invalid_argument("quadrature: need at least one interval");
  std::priority_queue<quad_detail::Segment> heap;
  double value = 0, error = 0;
  int count = 0;
  for (size_t i = 0; i + 1 < knots.size(); ++i) {
    if (!(knots[i] < knots[i + 1]))
      throw std::invalid_argument("quadrature: knots must be strictly increasing");
    auto seg = quad_detail::gk15(f, knots[i], knots[i + 1]);
    value += seg.value;
    error += seg.error;
    heap.push(seg);
    ++count;
  }
  auto tolerance = [&] { return std::max(opt.abs_tol, opt.rel_tol * std::abs(value)); };
  while (error > tolerance() && count < opt.max_intervals) {
    auto worst = heap.top();
    heap.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    if (mid <= worst.a || mid >= worst.b) {  // interval at machine resolution
      heap.push(quad_detail::Segment{worst.a, worst.b, worst.value, 0.0});
      continue;
    }
    auto left = quad_detail::gk15(f, worst.a, mid);
    auto right = quad_detail::gk15(f, mid, worst.b);
    value += left.value + right.value - worst.value;
    error += left.error + right.error - worst.error;
    heap.push(left);
    heap.push(right);
    ++count;
  }
  QuadResult res{value, error, count, error <= tolerance()};
  if (!res.converged && opt.throw_on_failure)
    throw NumericalError("quadrature did not converge: estimated error " +
                         std::to_string(error) + " exceeds tolerance after " +
                         std::to_string(count) + " intervals");
  return res;
}

template <class F>
QuadResult integrate(F&& f, double a, double b, QuadOptions opt = {}) {
  return integrate_segmented(std::forward<F>(f), std::vector<double>{a, b}, opt);
}

// Integral of f over (-inf, inf) via u = center + scale*s/(1-s^2), s in (-1,1).
// `scale` should be of the order of the integrand's characteristic width around
// `center`; integrable 1/u^2 tails become bounded near s = +-1.
template <class F>
QuadResult integrate_real_line(F&& f, double center, double scale,
                               QuadOptions opt = {}) {
  if (!(scale > 0)) throw std::invalid_argument("quadrature: scale must be positive");
  auto g = [&f, center, scale](double s) {
    const double om = 1.0 - s * s;
    const double u = center + scale * s / om;
    const double jac = scale * (1.0 + s * s) / (om * om);
    const double fu = f(u);
    const double val = fu * jac;
    return std::isfinite(val) ? val : 0.0;
  };
  return integrate_segmented(g, std::vector<double>{-1.0, 0.0, 1.0}, opt);
}

}  // namespace qmarket
