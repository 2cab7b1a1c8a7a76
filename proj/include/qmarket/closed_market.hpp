#pragma once
// Closed market: each trader is three coupled modes (shares, cash, LoI) with
// linear Heisenberg dynamics, so everything reduces to a 3x3 propagator
// V(t) = exp(-i T t) applied to diagonal initial correlations.
#include <Eigen/Dense>
#include <vector>

#include "qmarket/types.hpp"

namespace qmarket {

// Mode-coupling matrix of the trader Hamiltonian; row/column order (s, c, i).
Eigen::Matrix3d coupling_matrix(const TraderParams& p);

// V(t) = exp(-i T t) via the symmetric eigendecomposition of T, factored once.
class TraderPropagator {
 public:
  explicit TraderPropagator(const Eigen::Matrix3d& T);
  // Unitarity is enforced: ||V V^dag - I||_max <= 1e-10 or NumericalError.
  Eigen::Matrix3cd at(double t) const;

 private:
  Eigen::Matrix3d vecs_;
  Eigen::Vector3d vals_;
};

Eigen::Matrix3cd propagator(const Eigen::Matrix3d& T, double t);

// <n_a>(t) = sum_b |V_ab(t)|^2 n_b(0); exact for number-state (diagonal)
// initial correlations.
Eigen::Vector3d occupations(const Eigen::Matrix3cd& V, const MarketInit& init);

TimeSeries portfolio_series(const TraderParams& p, const MarketInit& init,
                            const std::vector<double>& t_grid);

// Peak-to-peak spread of a sampled series.
double peak_to_peak(const std::vector<double>& y);

// Angular frequency of the largest-magnitude nonzero DFT bin, assuming uniform
// sampling with spacing dt. Ties resolve to the lowest bin.
double dominant_frequency(const std::vector<double>& y, double dt);

}  // namespace qmarket
