#pragma once
// Brute-force reference dynamics on a fixed-total-quanta sector of a small
// bosonic mode register. Exact diagonalization, no time stepping; used to
// cross-check the closed-form mode propagators.
#include <Eigen/Dense>
#include <map>
#include <vector>

#include "qmarket/types.hpp"

namespace qmarket {

// All occupation tuples of n_modes modes with a fixed total. Enumeration is
// deterministic: (total,0,...,0) first, then descending lexicographic order,
// ending at (0,...,0,total). The single-quantum sector therefore lists the
// one-quantum-in-mode-a states in plain mode order.
class SectorBasis {
 public:
  SectorBasis(int n_modes, int total);
  int n_modes() const { return n_modes_; }
  int total() const { return total_; }
  int size() const { return static_cast<int>(states_.size()); }
  const Eigen::VectorXi& state(int idx) const { return states_.at(idx); }
  // Throws std::out_of_range for tuples outside the sector.
  int index_of(const Eigen::VectorXi& occ) const;

 private:
  int n_modes_, total_;
  std::vector<Eigen::VectorXi> states_;
  std::map<std::vector<int>, int> index_;
};

// Matrix of a^dag_to a_from on the sector. Amplitude between |n> and the
// shifted tuple is sqrt((n_to + 1) * n_from). from == to is rejected: the
// number operator is not a hop.
Eigen::MatrixXd hop_matrix(const SectorBasis& basis, int from, int to);

// Dense Hermitian matrix of the three-mode trader Hamiltonian
//   H = w_s n_s + w_c n_c + W n_i + lambda ((s^ + c^) i + i^ (s + c))
// on the sector. Modes are ordered (shares, cash, loi).
Eigen::MatrixXcd sector_hamiltonian(const SectorBasis& basis, const TraderParams& p);

// Exact sector evolution by full eigendecomposition of H.
class SectorEvolution {
 public:
  SectorEvolution(const SectorBasis& basis, const Eigen::MatrixXcd& H);
  // <n_a>(t) per mode, starting from the number state occ0.
  Eigen::VectorXd occupations(const Eigen::VectorXi& occ0, double t) const;

 private:
  const SectorBasis& basis_;
  Eigen::MatrixXcd vecs_;
  Eigen::VectorXd vals_;
  Eigen::MatrixXd mode_occ_;  // size x n_modes, occupation of each basis state
};

}  // namespace qmarket
