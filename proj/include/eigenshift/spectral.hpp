#pragma once

#include <Eigen/Dense>
#include <vector>

namespace eigenshift {

// Symmetric matrix wrapper. Construction symmetrizes as (M + M^T)/2 so
// downstream code can rely on exact symmetry.
class SymMatrix {
 public:
  explicit SymMatrix(const Eigen::MatrixXd& M);
  const Eigen::MatrixXd& mat() const { return m_; }
  Eigen::Index dim() const { return m_.rows(); }

 private:
  Eigen::MatrixXd m_;
};

// Eigendecomposition with eigenvalues sorted descending; eigenvector
// columns follow the same order. Exactly equal eigenvalues keep the
// solver's ascending output order, so ties are handled deterministically.
struct Spectrum {
  Eigen::VectorXd eigenvalues;
  Eigen::MatrixXd eigenvectors;
  Eigen::Index source_dim = 0;
};

struct Projector {
  Eigen::MatrixXd matrix;
  Eigen::Index rank = 0;
};

// Throws InvalidMatrix on non-finite entries or solver failure.
Spectrum decompose_symmetric(const SymMatrix& A);

// P = sum_{i in S} u_i u_i^T, rank |S|. Indices are 0-based into the
// descending eigenvalue order. Empty, duplicate, or out-of-range
// selections throw InvalidSelection.
Projector spectral_projector(const Spectrum& spec, const std::vector<int>& S);

// Operator-norm distance ||P - Q||_2 between projectors of equal dimension.
double subspace_distance(const Projector& P, const Projector& Q);

// Permutation of 0..n-1 ordering values by |λ| descending. Exact magnitude
// ties put the positive value first, then the smaller index.
std::vector<int> singular_order(const Eigen::VectorXd& eigenvalues);

// [[0, A], [A^T, 0]]. Its spectrum is ±(singular values of A) padded with
// zeros, which is how rectangular problems reach the symmetric machinery.
SymMatrix symmetrize_additive(const Eigen::MatrixXd& A);

// 2-norm via an eigensolve of the smaller Gram matrix. Values below
// 1e-12 * (largest |entry|) snap to zero: at that level the Gram
// eigensolve is pure roundoff, not signal.
double operator_norm(const Eigen::MatrixXd& M);

// Verification helpers kept outside the hot path; tests and the harness
// assert the decomposition contract with these.
double orthonormality_defect(const Eigen::MatrixXd& U);        // ||U^T U - I||_max
double eigen_residual(const SymMatrix& A, const Spectrum& s);  // ||A U - U Λ||_max
Eigen::MatrixXd reconstruct(const Spectrum& s);                // U Λ U^T

}  // namespace eigenshift
