#pragma once
// Single-particle machinery for finitely many linearly coupled bosonic modes.
// Occupation expectations follow from rows of W(t) = exp(-i h t) when the
// initial mode correlations are diagonal: <n_a>(t) = sum_b |W_ab|^2 n_b(0).
#include <Eigen/Dense>
#include <vector>

#include "qmarket/types.hpp"

namespace qmarket {

// Dense path: W(t) from the full symmetric eigendecomposition of h.
class SpectralPropagator {
 public:
  explicit SpectralPropagator(const Eigen::MatrixXd& h);
  int size() const { return static_cast<int>(vals_.size()); }
  const Eigen::VectorXd& eigenvalues() const { return vals_; }
  // Column b of W(t); equals row b because h is symmetric.
  Eigen::VectorXcd column(int b, double t) const;
  // sum_b |W_ab(t)|^2 n0_b
  double occupation(int a, const Eigen::VectorXd& n0, double t) const;

 private:
  Eigen::MatrixXd vecs_;
  Eigen::VectorXd vals_;
};

// Structured path: eigendecomposition of the symmetric arrowhead matrix
//   [ a0  w^T ]
//   [ w   D   ],  D = diag(d), d strictly increasing, w elementwise nonzero.
// Secular roots are refined in a pole-anchored offset variable so that
// sigma_m - d_j stays accurate even for strongly off-resonant band modes;
// eigenvector components then follow in closed form. O(n^2) overall, which is
// what makes band sizes in the thousands affordable where a dense solve is not.
class ArrowheadSpectrum {
 public:
  ArrowheadSpectrum(double a0, const Eigen::VectorXd& d, const Eigen::VectorXd& w);
  int size() const { return static_cast<int>(sigma_.size()); }  // n + 1
  const Eigen::VectorXd& eigenvalues() const { return sigma_; }
  double shoulder_weight(int m) const { return c2_[m]; }  // squared shoulder component
  // (exp(-i A t)) e_shoulder: entry 0 is the shoulder amplitude, entries
  // 1..n the band amplitudes.
  Eigen::VectorXcd shoulder_column(double t) const;

 private:
  double secular(int anchor, double off, double* deriv) const;
  double solve_offset(int anchor, double lo, double hi) const;

  double a0_;
  Eigen::VectorXd d_, w_;
  Eigen::VectorXd sigma_;            // ascending eigenvalues
  std::vector<int> anchor_;          // band index the offset is measured from
  Eigen::VectorXd off_;              // sigma - d[anchor], exact parametrization
  Eigen::VectorXd c2_;               // squared shoulder components, sums to 1
};

}  // namespace qmarket
