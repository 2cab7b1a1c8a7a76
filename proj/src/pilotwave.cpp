#include "qmarket/pilotwave.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include <unsupported/Eigen/FFT>

#include "qmarket/errors.hpp"

namespace qmarket {

namespace {

void check_grid(const Grid2D& g) {
  if (g.n1 < 4 || g.n2 < 4) throw std::invalid_argument("grid: need at least 4 nodes per axis");
  if (!(g.q1_max > g.q1_min) || !(g.q2_max > g.q2_min))
    throw std::invalid_argument("grid: empty extent");
}

int wrap(int i, int n) { return (i % n + n) % n; }

// FFT wavenumber for bin m on a ring of n nodes with period L.
double wavenumber(int m, int n, double L) {
  const int f = m <= n / 2 ? m : m - n;
  return 2.0 * M_PI * f / L;
}

void fft2(Eigen::MatrixXcd& a, bool forward) {
  Eigen::FFT<double> fft;
  Eigen::VectorXcd tmp;
  for (int j = 0; j < a.cols(); ++j) {
    Eigen::VectorXcd col = a.col(j);
    if (forward)
      fft.fwd(tmp, col);
    else
      fft.inv(tmp, col);
    a.col(j) = tmp;
  }
  for (int i = 0; i < a.rows(); ++i) {
    Eigen::VectorXcd row = a.row(i);
    if (forward)
      fft.fwd(tmp, row);
    else
      fft.inv(tmp, row);
    a.row(i) = tmp.transpose();
  }
}

Eigen::MatrixXcd kinetic_phase(const WaveField& psi, double dt) {
  const Grid2D& g = psi.grid;
  const double L1 = g.q1_max - g.q1_min;
  const double L2 = g.q2_max - g.q2_min;
  Eigen::MatrixXcd phase(g.n1, g.n2);
  for (int i = 0; i < g.n1; ++i) {
    const double k1 = wavenumber(i, g.n1, L1);
    for (int j = 0; j < g.n2; ++j) {
      const double k2 = wavenumber(j, g.n2, L2);
      const double ksq = k1 * k1 + k2 * k2;
      phase(i, j) = std::exp(Complex(0.0, -psi.hbar * ksq * dt / (2.0 * psi.mass)));
    }
  }
  return phase;
}

Eigen::MatrixXcd potential_half_phase(const WaveField& psi, const PotentialField& pot,
                                      double dt) {
  return (Complex(0.0, -0.5 * dt / psi.hbar) * pot.V.array()).exp().matrix();
}

}  // namespace

double total_probability(const WaveField& psi) {
  check_grid(psi.grid);
  return psi.values.squaredNorm() * psi.grid.dq1() * psi.grid.dq2();
}

void normalize(WaveField& psi) {
  const double p = total_probability(psi);
  if (!(p > 0)) throw NumericalError("normalize: zero wave field");
  psi.values /= std::sqrt(p);
}

WaveField gaussian_packet(const Grid2D& grid, double sigma, double center1, double center2,
                          double hbar, double mass) {
  check_grid(grid);
  if (!(sigma > 0)) throw std::invalid_argument("gaussian packet: width must be positive");
  if (!(hbar > 0) || !(mass > 0))
    throw std::invalid_argument("gaussian packet: hbar and mass must be positive");
  WaveField psi;
  psi.grid = grid;
  psi.hbar = hbar;
  psi.mass = mass;
  psi.values.resize(grid.n1, grid.n2);
  for (int i = 0; i < grid.n1; ++i) {
    const double d1 = grid.q1(i) - center1;
    for (int j = 0; j < grid.n2; ++j) {
      const double d2 = grid.q2(j) - center2;
      psi.values(i, j) = std::exp(-(d1 * d1 + d2 * d2) / (4.0 * sigma * sigma));
    }
  }
  normalize(psi);
  return psi;
}

PotentialField free_potential(const Grid2D& grid) {
  check_grid(grid);
  PotentialField pot;
  pot.grid = grid;
  pot.V = Eigen::MatrixXd::Zero(grid.n1, grid.n2);
  return pot;
}

WaveField schrodinger_step(const WaveField& psi, const PotentialField& pot, double dt) {
  return evolve(psi, pot, dt, 1);
}

WaveField evolve(const WaveField& psi, const PotentialField& pot, double dt, int n_steps) {
  check_grid(psi.grid);
  if (!psi.grid.same_as(pot.grid))
    throw std::invalid_argument("schrodinger step: grids do not match");
  if (pot.V.rows() != psi.grid.n1 || pot.V.cols() != psi.grid.n2)
    throw std::invalid_argument("schrodinger step: potential not sampled on the grid");
  if (n_steps < 0) throw std::invalid_argument("schrodinger step: negative step count");
  if (!(psi.hbar > 0) || !(psi.mass > 0))
    throw std::invalid_argument("schrodinger step: hbar and mass must be positive");

  WaveField out = psi;
  if (n_steps == 0 || dt == 0.0) return out;

  const Eigen::MatrixXcd vp = potential_half_phase(psi, pot, dt);
  const Eigen::MatrixXcd kp = kinetic_phase(psi, dt);
  const double norm0 = out.values.squaredNorm();
  for (int s = 0; s < n_steps; ++s) {
    out.values = out.values.cwiseProduct(vp);
    fft2(out.values, true);
    out.values = out.values.cwiseProduct(kp);
    fft2(out.values, false);
    out.values = out.values.cwiseProduct(vp);
  }
  const double drift = std::abs(out.values.squaredNorm() / norm0 - 1.0);
  if (drift > 1e-10 * std::max(1, n_steps))
    throw NumericalError("schrodinger step: norm drift beyond unitary bound");
  return out;
}

PotentialField quantum_potential(const WaveField& psi, double r_floor) {
  check_grid(psi.grid);
  if (!(r_floor > 0)) throw std::invalid_argument("quantum potential: floor must be positive");
  const Grid2D& g = psi.grid;
  PotentialField pot = free_potential(g);
  pot.R = psi.values.cwiseAbs();
  pot.U.resize(g.n1, g.n2);
  pot.mask.resize(g.n1, g.n2);
  const double inv_d1 = 1.0 / (g.dq1() * g.dq1());
  const double inv_d2 = 1.0 / (g.dq2() * g.dq2());
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (int i = 0; i < g.n1; ++i) {
    for (int j = 0; j < g.n2; ++j) {
      const double r = pot.R(i, j);
      if (r < r_floor) {
        pot.U(i, j) = nan;
        pot.mask(i, j) = false;
        continue;
      }
      const double lap =
          (pot.R(wrap(i + 1, g.n1), j) - 2.0 * r + pot.R(wrap(i - 1, g.n1), j)) * inv_d1 +
          (pot.R(i, wrap(j + 1, g.n2)) - 2.0 * r + pot.R(i, wrap(j - 1, g.n2))) * inv_d2;
      pot.U(i, j) = -lap / r;
      pot.mask(i, j) = true;
    }
  }
  return pot;
}

PotentialField quantum_potential(const WaveField& psi) {
  const double peak = psi.values.cwiseAbs().maxCoeff();
  if (!(peak > 0)) throw NumericalError("quantum potential: zero wave field");
  return quantum_potential(psi, 1e-6 * peak);
}

namespace {

ForceField gradient_force(const Grid2D& g, const Eigen::MatrixXd& field, const MaskGrid* mask) {
  ForceField f;
  f.grid = g;
  f.g1.resize(g.n1, g.n2);
  f.g2.resize(g.n1, g.n2);
  f.mask.resize(g.n1, g.n2);
  const double inv_2d1 = 1.0 / (2.0 * g.dq1());
  const double inv_2d2 = 1.0 / (2.0 * g.dq2());
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (int i = 0; i < g.n1; ++i) {
    const int ip = wrap(i + 1, g.n1), im = wrap(i - 1, g.n1);
    for (int j = 0; j < g.n2; ++j) {
      const int jp = wrap(j + 1, g.n2), jm = wrap(j - 1, g.n2);
      const bool ok = !mask || ((*mask)(i, j) && (*mask)(ip, j) && (*mask)(im, j) &&
                                (*mask)(i, jp) && (*mask)(i, jm));
      f.mask(i, j) = ok;
      if (!ok) {
        f.g1(i, j) = nan;
        f.g2(i, j) = nan;
        continue;
      }
      f.g1(i, j) = -(field(ip, j) - field(im, j)) * inv_2d1;
      f.g2(i, j) = -(field(i, jp) - field(i, jm)) * inv_2d2;
    }
  }
  return f;
}

}  // namespace

ForceField mental_force(const PotentialField& pot) {
  check_grid(pot.grid);
  if (pot.U.rows() != pot.grid.n1 || pot.U.cols() != pot.grid.n2)
    throw std::invalid_argument("mental force: wave potential not computed");
  return gradient_force(pot.grid, pot.U, &pot.mask);
}

ForceField hard_force(const PotentialField& pot) {
  check_grid(pot.grid);
  if (pot.V.rows() != pot.grid.n1 || pot.V.cols() != pot.grid.n2)
    throw std::invalid_argument("hard force: potential not sampled on the grid");
  return gradient_force(pot.grid, pot.V, nullptr);
}

ForceField add_forces(const ForceField& a, const ForceField& b) {
  if (!a.grid.same_as(b.grid)) throw std::invalid_argument("add forces: grids do not match");
  ForceField out = a;
  out.g1 += b.g1;
  out.g2 += b.g2;
  out.mask = (a.mask.array() && b.mask.array()).matrix();
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (int i = 0; i < out.mask.rows(); ++i)
    for (int j = 0; j < out.mask.cols(); ++j)
      if (!out.mask(i, j)) {
        out.g1(i, j) = nan;
        out.g2(i, j) = nan;
      }
  return out;
}

namespace {

struct ForceSample {
  double f1 = 0.0;
  double f2 = 0.0;
};

ForceSample sample_force(const ForceField& f, double q1, double q2) {
  const Grid2D& g = f.grid;
  if (q1 < g.q1_min || q1 > g.q1_max || q2 < g.q2_min || q2 > g.q2_max)
    throw ConfigError("portfolio path leaves the grid");
  const double u = (q1 - g.q1_min) / g.dq1();
  const double v = (q2 - g.q2_min) / g.dq2();
  int i0 = std::min(static_cast<int>(u), g.n1 - 1);
  int j0 = std::min(static_cast<int>(v), g.n2 - 1);
  const double fu = u - i0, fv = v - j0;
  const int i1 = wrap(i0 + 1, g.n1), j1 = wrap(j0 + 1, g.n2);
  if (!f.mask(i0, j0) || !f.mask(i1, j0) || !f.mask(i0, j1) || !f.mask(i1, j1))
    throw NumericalError("portfolio path crosses a masked force node");
  auto blend = [&](const Eigen::MatrixXd& m) {
    return (1 - fu) * (1 - fv) * m(i0, j0) + fu * (1 - fv) * m(i1, j0) +
           (1 - fu) * fv * m(i0, j1) + fu * fv * m(i1, j1);
  };
  return {blend(f.g1), blend(f.g2)};
}

}  // namespace

std::vector<PortfolioPoint> integrate_portfolio(std::array<double, 2> pi0,
                                                const std::vector<ForceField>& forces,
                                                const std::vector<std::array<double, 2>>& q_path,
                                                const std::vector<double>& t_grid) {
  if (t_grid.empty()) throw std::invalid_argument("portfolio: empty time grid");
  const size_t n = t_grid.size();
  if (forces.empty() || (forces.size() != 1 && forces.size() != n))
    throw std::invalid_argument("portfolio: need one force field or one per time sample");
  if (q_path.empty() || (q_path.size() != 1 && q_path.size() != n))
    throw std::invalid_argument("portfolio: need one configuration or one per time sample");
  for (size_t i = 1; i < n; ++i)
    if (!(t_grid[i] > t_grid[i - 1]))
      throw std::invalid_argument("portfolio: time grid must increase");
  for (const ForceField& f : forces)
    if (!f.grid.same_as(forces[0].grid))
      throw std::invalid_argument("portfolio: force fields on different grids");

  auto field = [&](size_t i) -> const ForceField& {
    return forces[forces.size() == 1 ? 0 : i];
  };
  auto config = [&](size_t i) { return q_path[q_path.size() == 1 ? 0 : i]; };

  std::vector<PortfolioPoint> out;
  out.reserve(n);
  double p1 = pi0[0], p2 = pi0[1];
  out.push_back({p1, p2, config(0)[0], config(0)[1], t_grid[0]});
  for (size_t i = 0; i + 1 < n; ++i) {
    const double h = t_grid[i + 1] - t_grid[i];
    const auto qa = config(i), qb = config(i + 1);
    const double qm1 = 0.5 * (qa[0] + qb[0]), qm2 = 0.5 * (qa[1] + qb[1]);
    const ForceSample k1 = sample_force(field(i), qa[0], qa[1]);
    const ForceSample k4 = sample_force(field(i + 1), qb[0], qb[1]);
    // Bilinear sampling is linear in the field, so averaging two samples
    // equals sampling the time-averaged field.
    const ForceSample ma = sample_force(field(i), qm1, qm2);
    const ForceSample mb = sample_force(field(i + 1), qm1, qm2);
    const double m1 = 0.5 * (ma.f1 + mb.f1), m2 = 0.5 * (ma.f2 + mb.f2);
    p1 += h / 6.0 * (k1.f1 + 4.0 * m1 + k4.f1);
    p2 += h / 6.0 * (k1.f2 + 4.0 * m2 + k4.f2);
    out.push_back({p1, p2, qb[0], qb[1], t_grid[i + 1]});
  }
  return out;
}

}  // namespace qmarket
