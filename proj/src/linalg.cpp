#include "immse/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "immse/error.hpp"

namespace immse {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kInvalidArgument: return "invalid argument";
    case ErrorKind::kIo: return "i/o error";
    case ErrorKind::kParse: return "parse error";
    case ErrorKind::kValidation: return "validation error";
    case ErrorKind::kNotPsd: return "not positive semidefinite";
    case ErrorKind::kDegenerate: return "degenerate spectrum";
    case ErrorKind::kInfeasible: return "infeasible";
    case ErrorKind::kNotConverged: return "not converged";
    case ErrorKind::kDiverged: return "diverged";
    case ErrorKind::kConsistency: return "consistency check failed";
  }
  return "unknown";
}

SymMatrix SymMatrix::from_upper(const Matrix& upper) {
  if (upper.rows() != upper.cols()) {
    throw Error(ErrorKind::kInvalidArgument, "symmetric matrix must be square");
  }
  if (!upper.allFinite()) {
    throw Error(ErrorKind::kInvalidArgument, "symmetric matrix has non-finite entries");
  }
  SymMatrix s;
  s.m_ = upper.triangularView<Eigen::Upper>();
  s.m_.triangularView<Eigen::StrictlyLower>() = s.m_.transpose();
  return s;
}

SymMatrix SymMatrix::symmetrized(const Matrix& m) {
  if (m.rows() != m.cols()) {
    throw Error(ErrorKind::kInvalidArgument, "symmetric matrix must be square");
  }
  return from_upper(0.5 * (m + m.transpose()));
}

SymMatrix SymMatrix::identity(Eigen::Index n) {
  return from_upper(Matrix::Identity(n, n));
}

SymEigen sym_eig(const SymMatrix& m) {
  const Eigen::Index n = m.dim();
  Matrix a = m.matrix();
  Matrix v = Matrix::Identity(n, n);
  const double scale = a.norm();
  const double target = 1e-12 * scale;
  constexpr int kMaxSweeps = 100;

  auto off_norm = [&] {
    double s = 0.0;
    for (Eigen::Index j = 0; j < n; ++j)
      for (Eigen::Index i = 0; i < n; ++i)
        if (i != j) s += a(i, j) * a(i, j);
    return std::sqrt(s);
  };

  int sweep = 0;
  while (off_norm() > target) {
    if (++sweep > kMaxSweeps) {
      throw Error(ErrorKind::kNotConverged, "Jacobi eigensolver did not converge");
    }
    for (Eigen::Index p = 0; p < n - 1; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        // Symmetric Schur decomposition of the (p, q) 2×2 block.
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(1.0 + theta * theta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = t * c;
        for (Eigen::Index k = 0; k < n; ++k) {
          const double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        a(p, q) = a(q, p) = 0.0;
        for (Eigen::Index k = 0; k < n; ++k) {
          const double vkp = v(k, p), vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index i, Eigen::Index j) { return a(i, i) < a(j, j); });

  SymEigen out{Vector(n), Matrix(n, n)};
  for (Eigen::Index k = 0; k < n; ++k) {
    const Eigen::Index src = order[static_cast<std::size_t>(k)];
    out.values(k) = a(src, src);
    Vector col = v.col(src);
    Eigen::Index big = 0;
    col.cwiseAbs().maxCoeff(&big);
    if (col(big) < 0.0) col = -col;
    out.vectors.col(k) = col;
  }
  return out;
}

double min_eigenvalue(const SymMatrix& m) {
  if (m.dim() == 0) return 0.0;
  return sym_eig(m).values(0);
}

SymMatrix psd_sqrt(const SymMatrix& m, double psd_tol) {
  const SymEigen e = sym_eig(m);
  const Eigen::Index n = m.dim();
  if (n == 0) return m;
  const double lmin = e.values(0);
  const double lmax = e.values(n - 1);
  const double clip = std::max(psd_tol, 1e-12 * std::max(lmax, 0.0));
  if (lmin < -clip) {
    std::ostringstream msg;
    msg << "matrix is not PSD: lambda_min = " << lmin;
    throw Error(ErrorKind::kNotPsd, msg.str());
  }
  Vector roots = e.values.cwiseMax(0.0).cwiseSqrt();
  return SymMatrix::symmetrized(e.vectors * roots.asDiagonal() *
                                e.vectors.transpose());
}

SymMatrix solve_lyapunov(const Matrix& f, const SymMatrix& w) {
  const Eigen::Index n = f.rows();
  if (f.cols() != n || w.dim() != n) {
    throw Error(ErrorKind::kInvalidArgument, "solve_lyapunov: dimension mismatch");
  }
  // The Kronecker operator I⊗F + F⊗I has eigenvalues λ_i + λ_j.
  const Eigen::VectorXcd lambda = eigenvalues(f);
  const double scale = std::max(1.0, f.norm());
  double closest = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      closest = std::min(closest, std::abs(lambda(i) + lambda(j)));
  if (closest <= 1e-13 * scale) {
    std::ostringstream msg;
    msg << "Lyapunov operator is singular: min |lambda_i + lambda_j| = " << closest;
    throw Error(ErrorKind::kDegenerate, msg.str());
  }

  const Eigen::Index nn = n * n;
  Matrix kron = Matrix::Zero(nn, nn);
  // Column-major vec: vec(F X) = (I⊗F) vec X, vec(X Fᵀ) = (F⊗I) vec X.
  for (Eigen::Index blk = 0; blk < n; ++blk)
    kron.block(blk * n, blk * n, n, n) += f;
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      kron.block(i * n, j * n, n, n).diagonal().array() += f(i, j);

  Vector rhs = -Eigen::Map<const Vector>(w.matrix().data(), nn);
  Eigen::PartialPivLU<Matrix> lu(kron);
  Vector x = lu.solve(rhs);
  Matrix xm = Eigen::Map<Matrix>(x.data(), n, n);
  if (!xm.allFinite()) {
    throw Error(ErrorKind::kDegenerate, "Lyapunov solve produced non-finite values");
  }
  return SymMatrix::symmetrized(xm);
}

std::optional<Matrix> chol(const SymMatrix& m) {
  Eigen::LLT<Matrix> llt(m.matrix());
  if (llt.info() != Eigen::Success) return std::nullopt;
  Matrix l = llt.matrixL();
  if (!l.allFinite() || (l.diagonal().array() <= 0.0).any()) return std::nullopt;
  return l;
}

Eigen::VectorXcd eigenvalues(const Matrix& m) {
  if (m.rows() == 0) return Eigen::VectorXcd();
  Eigen::EigenSolver<Matrix> es(m, /*computeEigenvectors=*/false);
  if (es.info() != Eigen::Success) {
    throw Error(ErrorKind::kNotConverged, "nonsymmetric eigensolver failed");
  }
  return es.eigenvalues();
}

double spectral_abscissa(const Matrix& m) {
  return eigenvalues(m).real().maxCoeff();
}

Eigen::Index numerical_rank(const Matrix& m, double rel_tol) {
  if (m.size() == 0) return 0;
  Eigen::JacobiSVD<Matrix> svd(m);
  const Vector& s = svd.singularValues();
  if (s(0) == 0.0) return 0;
  return (s.array() > rel_tol * s(0)).count();
}

Eigen::Index numerical_rank(const Eigen::MatrixXcd& m, double rel_tol) {
  if (m.size() == 0) return 0;
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(m);
  const Vector& s = svd.singularValues();
  if (s(0) == 0.0) return 0;
  return (s.array() > rel_tol * s(0)).count();
}

}  // namespace immse
