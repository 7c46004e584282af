#include "eigenshift/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "eigenshift/errors.hpp"

namespace eigenshift {

SymMatrix::SymMatrix(const Eigen::MatrixXd& M) {
  if (M.rows() == 0 || M.cols() == 0)
    throw DimensionError("SymMatrix needs dimension >= 1");
  if (M.rows() != M.cols())
    throw DimensionError("SymMatrix needs a square input");
  m_ = 0.5 * (M + M.transpose());
}

Spectrum decompose_symmetric(const SymMatrix& A) {
  if (!A.mat().allFinite())
    throw InvalidMatrix("matrix has non-finite entries");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(A.mat());
  if (solver.info() != Eigen::Success)
    throw InvalidMatrix("eigensolver failed to converge");

  const Eigen::Index n = A.dim();
  // Solver order is ascending; we want descending with ties keeping the
  // solver's ascending index (stable).
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(n));
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](Eigen::Index a, Eigen::Index b) {
    return solver.eigenvalues()[a] > solver.eigenvalues()[b];
  });

  Spectrum s;
  s.source_dim = n;
  s.eigenvalues.resize(n);
  s.eigenvectors.resize(n, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    s.eigenvalues[k] = solver.eigenvalues()[idx[static_cast<std::size_t>(k)]];
    s.eigenvectors.col(k) =
        solver.eigenvectors().col(idx[static_cast<std::size_t>(k)]);
  }
  return s;
}

Projector spectral_projector(const Spectrum& spec, const std::vector<int>& S) {
  const Eigen::Index n = spec.source_dim;
  if (S.empty()) throw InvalidSelection("selection is empty");
  std::vector<int> sorted = S;
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t k = 0; k < sorted.size(); ++k) {
    if (sorted[k] < 0 || sorted[k] >= n)
      throw InvalidSelection("selection index out of range");
    if (k > 0 && sorted[k] == sorted[k - 1])
      throw InvalidSelection("selection has duplicate indices");
  }
  Projector P;
  P.rank = static_cast<Eigen::Index>(S.size());
  P.matrix = Eigen::MatrixXd::Zero(n, n);
  for (int i : sorted)
    P.matrix.noalias() +=
        spec.eigenvectors.col(i) * spec.eigenvectors.col(i).transpose();
  return P;
}

double subspace_distance(const Projector& P, const Projector& Q) {
  if (P.matrix.rows() != Q.matrix.rows() ||
      P.matrix.cols() != Q.matrix.cols())
    throw DimensionError("projector dimensions differ");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(
      P.matrix - Q.matrix, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success)
    throw InvalidMatrix("eigensolver failed on projector difference");
  const double lo = solver.eigenvalues().minCoeff();
  const double hi = solver.eigenvalues().maxCoeff();
  return std::max(std::abs(lo), std::abs(hi));
}

std::vector<int> singular_order(const Eigen::VectorXd& eigenvalues) {
  std::vector<int> idx(static_cast<std::size_t>(eigenvalues.size()));
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](int a, int b) {
    const double aa = std::abs(eigenvalues[a]);
    const double ab = std::abs(eigenvalues[b]);
    if (aa != ab) return aa > ab;
    if (eigenvalues[a] != eigenvalues[b]) return eigenvalues[a] > eigenvalues[b];
    return a < b;
  });
  return idx;
}

SymMatrix symmetrize_additive(const Eigen::MatrixXd& A) {
  const Eigen::Index m = A.rows();
  const Eigen::Index n = A.cols();
  if (m == 0 || n == 0) throw DimensionError("empty matrix");
  Eigen::MatrixXd S = Eigen::MatrixXd::Zero(m + n, m + n);
  S.topRightCorner(m, n) = A;
  S.bottomLeftCorner(n, m) = A.transpose();
  return SymMatrix(S);
}

double operator_norm(const Eigen::MatrixXd& M) {
  if (M.rows() == 0 || M.cols() == 0) return 0.0;
  const double scale = M.cwiseAbs().maxCoeff();
  if (scale == 0.0) return 0.0;

  Eigen::MatrixXd G;
  if (M.rows() <= M.cols())
    G.noalias() = M * M.transpose();
  else
    G.noalias() = M.transpose() * M;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(G,
                                                        Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success)
    throw InvalidMatrix("eigensolver failed on Gram matrix");
  const double top = std::max(0.0, solver.eigenvalues().maxCoeff());
  const double s = std::sqrt(top);
  return (s < 1e-12 * scale) ? 0.0 : s;
}

double orthonormality_defect(const Eigen::MatrixXd& U) {
  const Eigen::Index k = U.cols();
  Eigen::MatrixXd D = U.transpose() * U - Eigen::MatrixXd::Identity(k, k);
  return D.cwiseAbs().maxCoeff();
}

double eigen_residual(const SymMatrix& A, const Spectrum& s) {
  Eigen::MatrixXd R = A.mat() * s.eigenvectors -
                      s.eigenvectors * s.eigenvalues.asDiagonal();
  return R.cwiseAbs().maxCoeff();
}

Eigen::MatrixXd reconstruct(const Spectrum& s) {
  return s.eigenvectors * s.eigenvalues.asDiagonal() *
         s.eigenvectors.transpose();
}

}  // namespace eigenshift
