#include "qmarket/fock.hpp"

#include <cmath>
#include <stdexcept>

#include "qmarket/errors.hpp"

namespace qmarket {

SectorBasis::SectorBasis(int n_modes, int total) : n_modes_(n_modes), total_(total) {
  if (n_modes < 1) throw std::invalid_argument("sector basis: need at least one mode");
  if (total < 0) throw std::invalid_argument("sector basis: negative total");
  Eigen::VectorXi occ = Eigen::VectorXi::Zero(n_modes);
  occ(0) = total;
  // Successor in descending lexicographic order: move one quantum from the
  // rightmost non-terminal position one slot to the right, then flush the
  // remainder back up behind it.
  while (true) {
    states_.push_back(occ);
    std::vector<int> key(occ.data(), occ.data() + n_modes);
    index_.emplace(std::move(key), static_cast<int>(states_.size()) - 1);
    int p = -1;
    for (int j = n_modes - 2; j >= 0; --j)
      if (occ(j) > 0) { p = j; break; }
    if (p < 0) break;
    const int tail = occ.tail(n_modes - 1 - p).sum();
    occ(p) -= 1;
    occ.tail(n_modes - 1 - p).setZero();
    occ(p + 1) = tail + 1;
  }
}

int SectorBasis::index_of(const Eigen::VectorXi& occ) const {
  std::vector<int> key(occ.data(), occ.data() + occ.size());
  auto it = index_.find(key);
  if (it == index_.end())
    throw std::out_of_range("sector basis: tuple is not in this sector");
  return it->second;
}

Eigen::MatrixXd hop_matrix(const SectorBasis& basis, int from, int to) {
  const int n = basis.n_modes();
  if (from < 0 || from >= n || to < 0 || to >= n)
    throw std::invalid_argument("hop_matrix: mode index out of range");
  if (from == to)
    throw std::invalid_argument("hop_matrix: from == to is a number operator, not a hop");
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(basis.size(), basis.size());
  for (int idx = 0; idx < basis.size(); ++idx) {
    const Eigen::VectorXi& occ = basis.state(idx);
    if (occ(from) == 0) continue;
    Eigen::VectorXi dst = occ;
    dst(from) -= 1;
    dst(to) += 1;
    const double amp = std::sqrt(static_cast<double>(occ(to) + 1) *
                                 static_cast<double>(occ(from)));
    m(basis.index_of(dst), idx) = amp;
  }
  return m;
}

Eigen::MatrixXcd sector_hamiltonian(const SectorBasis& basis, const TraderParams& p) {
  if (basis.n_modes() != 3)
    throw std::invalid_argument("sector_hamiltonian: trader register has three modes");
  const int n = basis.size();
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(n, n);
  for (int idx = 0; idx < n; ++idx) {
    const Eigen::VectorXi& occ = basis.state(idx);
    h(idx, idx) = p.omega_s * occ(0) + p.omega_c * occ(1) + p.Omega * occ(2);
  }
  const Eigen::MatrixXd up = hop_matrix(basis, 2, 0) + hop_matrix(basis, 2, 1);
  h += p.lambda_inf * (up + up.transpose());
  Eigen::MatrixXcd H = h.cast<Complex>();
  if ((H - H.adjoint()).cwiseAbs().maxCoeff() >= 1e-12)
    throw NumericalError("sector_hamiltonian: assembled matrix is not Hermitian");
  return H;
}

SectorEvolution::SectorEvolution(const SectorBasis& basis, const Eigen::MatrixXcd& H)
    : basis_(basis) {
  if (H.rows() != basis.size() || H.cols() != basis.size())
    throw std::invalid_argument("sector evolution: matrix does not match basis");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(H);
  if (es.info() != Eigen::Success)
    throw NumericalError("sector evolution: eigendecomposition failed");
  vecs_ = es.eigenvectors();
  vals_ = es.eigenvalues();
  const double resid =
      (H * vecs_ - vecs_ * vals_.asDiagonal().toDenseMatrix().cast<Complex>())
          .cwiseAbs()
          .maxCoeff();
  if (resid > 1e-8)
    throw NumericalError("sector evolution: eigendecomposition residual " +
                         std::to_string(resid));
  mode_occ_.resize(basis.size(), basis.n_modes());
  for (int idx = 0; idx < basis.size(); ++idx)
    mode_occ_.row(idx) = basis.state(idx).cast<double>().transpose();
}

Eigen::VectorXd SectorEvolution::occupations(const Eigen::VectorXi& occ0, double t) const {
  const int idx0 = basis_.index_of(occ0);
  Eigen::VectorXcd amp = vecs_.row(idx0).adjoint();  // <m|psi0>
  for (int m = 0; m < amp.size(); ++m)
    amp(m) *= std::exp(Complex(0.0, -vals_(m) * t));
  const Eigen::VectorXcd psi = vecs_ * amp;
  const double norm2 = psi.squaredNorm();
  if (std::abs(norm2 - 1.0) > 1e-10)
    throw NumericalError("sector evolution: norm drifted to " + std::to_string(norm2));
  return mode_occ_.transpose() * psi.cwiseAbs2();
}

}  // namespace qmarket
