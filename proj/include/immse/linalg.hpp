#pragma once

#include <complex>
#include <optional>

#include <Eigen/Dense>

namespace immse {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Dense symmetric matrix. Only the upper triangle of the input is read;
/// the lower triangle is mirrored from it, so symmetry holds by construction.
class SymMatrix {
 public:
  SymMatrix() = default;
  explicit SymMatrix(Eigen::Index n) : m_(Matrix::Zero(n, n)) {}

  /// Mirrors the upper triangle of `upper`. Throws on non-square or
  /// non-finite input.
  static SymMatrix from_upper(const Matrix& upper);
  /// (M + Mᵀ)/2.
  static SymMatrix symmetrized(const Matrix& m);
  static SymMatrix identity(Eigen::Index n);
  static SymMatrix zero(Eigen::Index n) { return SymMatrix(n); }

  Eigen::Index dim() const { return m_.rows(); }
  double operator()(Eigen::Index i, Eigen::Index j) const { return m_(i, j); }
  const Matrix& matrix() const { return m_; }
  double trace() const { return m_.trace(); }
  double norm() const { return m_.norm(); }

 private:
  Matrix m_;
};

struct SymEigen {
  Vector values;   // ascending
  Matrix vectors;  // columns orthonormal, matching `values`
};

/// Cyclic Jacobi eigensolver. Eigenvalues are returned in ascending order and
/// each eigenvector is signed so that its largest-magnitude entry is
/// positive, which makes the output deterministic.
SymEigen sym_eig(const SymMatrix& m);

double min_eigenvalue(const SymMatrix& m);

/// Symmetric PSD square root. Eigenvalues below zero but within
/// max(psd_tol, 1e-12·λ_max) are clipped; anything more negative is an error.
SymMatrix psd_sqrt(const SymMatrix& m, double psd_tol);

/// Solves F X + X Fᵀ + W = 0 through the n²×n² Kronecker system.
SymMatrix solve_lyapunov(const Matrix& f, const SymMatrix& w);

/// Lower Cholesky factor, or nullopt if M is not numerically positive
/// definite.
std::optional<Matrix> chol(const SymMatrix& m);

/// Eigenvalues of a general real square matrix.
Eigen::VectorXcd eigenvalues(const Matrix& m);

/// Largest real part over the spectrum.
double spectral_abscissa(const Matrix& m);

/// Number of singular values above rel_tol · σ_max.
Eigen::Index numerical_rank(const Matrix& m, double rel_tol);
Eigen::Index numerical_rank(const Eigen::MatrixXcd& m, double rel_tol);

}  // namespace immse
