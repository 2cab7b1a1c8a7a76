#pragma once

// Preparation stage: a two-coordinate pilot wave evolved unitarily on a
// periodic grid, the potential the wave amplitude induces, the forces it
// exerts, and the classical portfolio response along a configuration path.

#include <array>
#include <vector>

#include <Eigen/Dense>

#include "qmarket/types.hpp"

namespace qmarket {

// Rectangular periodic lattice; the upper edge identifies with the lower.
struct Grid2D {
  int n1 = 0;
  int n2 = 0;
  double q1_min = 0.0;
  double q1_max = 0.0;
  double q2_min = 0.0;
  double q2_max = 0.0;

  double dq1() const { return (q1_max - q1_min) / n1; }
  double dq2() const { return (q2_max - q2_min) / n2; }
  double q1(int i) const { return q1_min + i * dq1(); }
  double q2(int j) const { return q2_min + j * dq2(); }
  bool same_as(const Grid2D& o) const {
    return n1 == o.n1 && n2 == o.n2 && q1_min == o.q1_min && q1_max == o.q1_max &&
           q2_min == o.q2_min && q2_max == o.q2_max;
  }
};

struct WaveField {
  Grid2D grid;
  Eigen::MatrixXcd values;  // indexed (i1, i2)
  double hbar = 1.0;
  double mass = 1.0;
};

using MaskGrid = Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>;

struct PotentialField {
  Grid2D grid;
  Eigen::MatrixXd V;  // hard potential; zero unless assigned
  Eigen::MatrixXd U;  // wave-induced potential, NaN where masked
  Eigen::MatrixXd R;  // wave amplitude
  MaskGrid mask;      // true where U is usable
};

double total_probability(const WaveField& psi);
void normalize(WaveField& psi);

WaveField gaussian_packet(const Grid2D& grid, double sigma, double center1, double center2,
                          double hbar = 1.0, double mass = 1.0);

// Zero hard potential on the given grid.
PotentialField free_potential(const Grid2D& grid);

// One Strang-split step with periodic boundaries; norm-preserving by
// construction.  Negative dt undoes a forward step.
WaveField schrodinger_step(const WaveField& psi, const PotentialField& pot, double dt);

// n_steps of the same splitting with the phase factors built once.
WaveField evolve(const WaveField& psi, const PotentialField& pot, double dt, int n_steps);

// U = -(sum of centered second differences of R)/R.  Nodes with amplitude
// below the floor are masked instead of divided through.
PotentialField quantum_potential(const WaveField& psi, double r_floor);
// Same with the floor at 1e-6 of the amplitude peak.
PotentialField quantum_potential(const WaveField& psi);

struct ForceField {
  Grid2D grid;
  Eigen::MatrixXd g1, g2;
  MaskGrid mask;
};

// Negative centered gradient of U; masked nodes poison their stencil
// neighbours.
ForceField mental_force(const PotentialField& pot);
// Negative centered gradient of the hard potential; never masked.
ForceField hard_force(const PotentialField& pot);
ForceField add_forces(const ForceField& a, const ForceField& b);

struct PortfolioPoint {
  double pi1 = 0.0;
  double pi2 = 0.0;
  double q1 = 0.0;
  double q2 = 0.0;
  double t = 0.0;
};

// Integrates dpi_j/dt = force_j along a configuration path.  forces holds one
// field per time sample or a single shared field, q_path likewise.  Forces
// are bilinear in space and linear in time between samples; the quadrature
// per step is fourth order.
std::vector<PortfolioPoint> integrate_portfolio(std::array<double, 2> pi0,
                                                const std::vector<ForceField>& forces,
                                                const std::vector<std::array<double, 2>>& q_path,
                                                const std::vector<double>& t_grid);

}  // namespace qmarket
