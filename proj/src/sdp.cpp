#include "immse/sdp.hpp"

#include <cmath>
#include <limits>
#include <optional>
#include <sstream>

#include "immse/error.hpp"
#include "immse/riccati.hpp"

namespace immse {

namespace {

constexpr double kMuShrink = 5.0;
constexpr double kCenteringTol = 1e-10;  // on λ²/2
constexpr double kMinStep = 1e-14;
constexpr int kMaxNewtonSteps = 5000;
constexpr double kRoundoffCenteringTol = 1e-4;

// Affine matrix function F(x) = F0 + Σ_i x_i F_i restricted to the variables
// that actually enter the block.
struct AffineBlock {
  Matrix constant;
  std::vector<std::pair<Eigen::Index, Matrix>> terms;

  Matrix eval(const Vector& x) const {
    Matrix f = constant;
    for (const auto& [i, fi] : terms) f.noalias() += x(i) * fi;
    return f;
  }
};

// Packing of the upper triangles of P (n×n) and Q (m×m) into one vector.
class Layout {
 public:
  Layout(Eigen::Index n, Eigen::Index m) : n_(n), m_(m) {}

  Eigen::Index size() const { return tri(n_) + tri(m_); }
  Eigen::Index p_index(Eigen::Index i, Eigen::Index j) const {
    return index(i, j, n_);
  }
  Eigen::Index q_index(Eigen::Index i, Eigen::Index j) const {
    return tri(n_) + index(i, j, m_);
  }

  Vector pack(const SymMatrix& p, const SymMatrix& q) const {
    Vector x(size());
    for (Eigen::Index j = 0; j < n_; ++j)
      for (Eigen::Index i = 0; i <= j; ++i) x(p_index(i, j)) = p(i, j);
    for (Eigen::Index j = 0; j < m_; ++j)
      for (Eigen::Index i = 0; i <= j; ++i) x(q_index(i, j)) = q(i, j);
    return x;
  }
  SymMatrix unpack_p(const Vector& x) const {
    Matrix p(n_, n_);
    for (Eigen::Index j = 0; j < n_; ++j)
      for (Eigen::Index i = 0; i <= j; ++i) p(i, j) = x(p_index(i, j));
    return SymMatrix::from_upper(p);
  }
  SymMatrix unpack_q(const Vector& x) const {
    Matrix q(m_, m_);
    for (Eigen::Index j = 0; j < m_; ++j)
      for (Eigen::Index i = 0; i <= j; ++i) q(i, j) = x(q_index(i, j));
    return SymMatrix::from_upper(q);
  }

 private:
  static Eigen::Index tri(Eigen::Index k) { return k * (k + 1) / 2; }
  // Column-major upper triangle, i <= j.
  static Eigen::Index index(Eigen::Index i, Eigen::Index j, Eigen::Index) {
    if (i > j) std::swap(i, j);
    return j * (j + 1) / 2 + i;
  }

  Eigen::Index n_, m_;
};

Matrix sym_basis(Eigen::Index k, Eigen::Index i, Eigen::Index j) {
  Matrix e = Matrix::Zero(k, k);
  e(i, j) = 1.0;
  e(j, i) = 1.0;
  return e;
}

std::vector<AffineBlock> assemble(const SdpProblem& problem, const Layout& layout) {
  const Matrix& a = problem.model().A();
  const Matrix& b = problem.model().B();
  const Eigen::Index n = a.rows();
  const Eigen::Index m = b.cols();

  AffineBlock lyap{problem.model().noise().matrix(), {}};
  AffineBlock schur{Matrix::Zero(m + n, m + n), {}};
  schur.constant.bottomLeftCorner(n, m) = b;
  schur.constant.topRightCorner(m, n) = b.transpose();
  AffineBlock slack{Matrix::Constant(1, 1, problem.distortion()), {}};

  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i <= j; ++i) {
      const Eigen::Index v = layout.p_index(i, j);
      const Matrix e = sym_basis(n, i, j);
      const Matrix ae = a * e;
      lyap.terms.emplace_back(v, ae + ae.transpose());
      Matrix s = Matrix::Zero(m + n, m + n);
      s.bottomRightCorner(n, n) = e;
      schur.terms.emplace_back(v, std::move(s));
      if (i == j) slack.terms.emplace_back(v, Matrix::Constant(1, 1, -1.0));
    }
  }
  for (Eigen::Index j = 0; j < m; ++j) {
    for (Eigen::Index i = 0; i <= j; ++i) {
      Matrix s = Matrix::Zero(m + n, m + n);
      s.topLeftCorner(m, m) = sym_basis(m, i, j);
      schur.terms.emplace_back(layout.q_index(i, j), std::move(s));
    }
  }
  return {std::move(lyap), std::move(schur), std::move(slack)};
}

// log det F for every block, or nullopt if any block is not positive
// definite.
std::optional<double> log_det_sum(const std::vector<AffineBlock>& blocks,
                                  const Vector& x) {
  double total = 0.0;
  for (const auto& blk : blocks) {
    Eigen::LLT<Matrix> llt(blk.eval(x));
    if (llt.info() != Eigen::Success) return std::nullopt;
    const Vector d = llt.matrixLLT().diagonal();
    if ((d.array() <= 0.0).any() || !d.allFinite()) return std::nullopt;
    total += 2.0 * d.array().log().sum();
  }
  return total;
}

}  // namespace

SdpProblem::SdpProblem(SystemModel model, double distortion)
    : model_(std::move(model)), distortion_(distortion) {
  if (!(std::isfinite(distortion) && distortion > 0.0)) {
    std::ostringstream msg;
    msg << "distortion budget D must be positive (got " << distortion << ")";
    throw Error(ErrorKind::kInvalidArgument, msg.str());
  }
}

SymMatrix SdpProblem::lyapunov_block(const SymMatrix& p) const {
  const Matrix ap = model_.A() * p.matrix();
  return SymMatrix::symmetrized(ap + ap.transpose() + model_.noise().matrix());
}

SymMatrix SdpProblem::schur_block(const SymMatrix& p, const SymMatrix& q) const {
  const Eigen::Index n = model_.n(), m = model_.m();
  Matrix s(m + n, m + n);
  s.topLeftCorner(m, m) = q.matrix();
  s.topRightCorner(m, n) = model_.B().transpose();
  s.bottomLeftCorner(n, m) = model_.B();
  s.bottomRightCorner(n, n) = p.matrix();
  return SymMatrix::from_upper(s);
}

double SdpProblem::trace_slack(const SymMatrix& p) const {
  return distortion_ - p.trace();
}

Eigen::Index SdpProblem::constraint_rows() const {
  return model_.n() + (model_.m() + model_.n()) + 1;
}

SdpProblem build_sdp(const SystemModel& model, double distortion) {
  return SdpProblem(model, distortion);
}

FeasibleStart find_feasible_start(const SdpProblem& problem,
                                  const Tolerances& tol) {
  const SystemModel& model = problem.model();
  const Eigen::Index n = model.n();
  const double shift = std::max(0.0, spectral_abscissa(model.A())) + 1.0;
  double last_trace = std::numeric_limits<double>::infinity();
  for (double gamma = 1.0; gamma <= std::ldexp(1.0, 60); gamma *= 2.0) {
    const SensorGain gain{gamma * Matrix::Identity(n, n)};
    // A − X0 γ² I = A − shift·I is Hurwitz, so Newton–Kleinman converges.
    const SymMatrix seed =
        SymMatrix::from_upper((shift / (gamma * gamma)) * Matrix::Identity(n, n));
    const AreSolution are = newton_kleinman(model, gain, seed, tol);
    last_trace = are.P.trace();
    if (last_trace >= problem.distortion()) continue;
    if (!chol(problem.lyapunov_block(are.P))) continue;
    const auto l = chol(are.P);
    if (!l) continue;
    const Matrix pinv_b = are.P.matrix().llt().solve(model.B());
    FeasibleStart start{
        are.P,
        SymMatrix::symmetrized(model.B().transpose() * pinv_b +
                               Matrix::Identity(model.m(), model.m())),
        gamma};
    return start;
  }
  std::ostringstream msg;
  msg << "no strictly feasible point found for D = " << problem.distortion()
      << " (smallest Tr(P) reached " << last_trace << ")";
  throw Error(ErrorKind::kInfeasible, msg.str());
}

SdpSolution solve(const SdpProblem& problem, const Tolerances& tol) {
  tol.validate();
  const SystemModel& model = problem.model();
  const Layout layout(model.n(), model.m());
  const std::vector<AffineBlock> blocks = assemble(problem, layout);
  const Eigen::Index nv = layout.size();
  const double rows = static_cast<double>(problem.constraint_rows());
  const double trace_a = model.A().trace();

  Vector c = Vector::Zero(nv);
  for (Eigen::Index i = 0; i < model.m(); ++i) c(layout.q_index(i, i)) = 0.5;

  const FeasibleStart start = find_feasible_start(problem, tol);
  Vector x = layout.pack(start.P, start.Q);

  SdpSolution sol;
  double t = 1.0;
  int newton_total = 0;

  for (;;) {
    int steps_this_t = 0;
    double prev_decrement = std::numeric_limits<double>::infinity();
    int plateau = 0;
    Vector g, dx;
    double decrement = 0.0;
    for (;;) {
      // Gradient and Hessian of t·cᵀx − Σ log det F_k(x).
      g = t * c;
      Matrix h = Matrix::Zero(nv, nv);
      for (std::size_t k = 0; k < blocks.size(); ++k) {
        const AffineBlock& blk = blocks[k];
        const Matrix f = blk.eval(x);
        Eigen::LLT<Matrix> llt(f);
        if (llt.info() != Eigen::Success) {
          throw Error(ErrorKind::kNotConverged, "SDP iterate left the interior");
        }
        const Matrix gi = llt.solve(Matrix::Identity(f.rows(), f.cols()));
        std::vector<Matrix> scaled;
        scaled.reserve(blk.terms.size());
        for (const auto& [i, fi] : blk.terms) {
          g(i) -= (gi.cwiseProduct(fi)).sum();
          scaled.push_back(gi * fi * gi);
        }
        for (std::size_t r = 0; r < blk.terms.size(); ++r) {
          const Eigen::Index i = blk.terms[r].first;
          for (std::size_t s = r; s < blk.terms.size(); ++s) {
            const Eigen::Index j = blk.terms[s].first;
            const double v = scaled[r].cwiseProduct(blk.terms[s].second).sum();
            h(i, j) += v;
            if (r != s) h(j, i) += v;
          }
        }
      }
      Eigen::LDLT<Matrix> ldlt(h);
      dx = ldlt.solve(-g);
      decrement = -g.dot(dx);
      if (!std::isfinite(decrement)) {
        throw Error(ErrorKind::kNotConverged, "SDP Newton system is singular");
      }
      if (decrement / 2.0 <= kCenteringTol) break;
      // Near the end of the path the decrement bottoms out at the rounding
      // level of t·c − ∇log det; once full steps stop reducing it and it is
      // already small, the iterate is as centered as double precision allows.
      if (decrement > 0.5 * prev_decrement && decrement / 2.0 <= kRoundoffCenteringTol) {
        if (++plateau >= 2) break;
      } else {
        plateau = 0;
      }
      prev_decrement = decrement;

      // Damped Newton step for a self-concordant barrier; backtrack only to
      // stay strictly inside every block.
      const double lambda = std::sqrt(decrement);
      double step = lambda > 0.25 ? 1.0 / (1.0 + lambda) : 1.0;
      for (;;) {
        const Vector trial = x + step * dx;
        if (log_det_sum(blocks, trial)) {
          x = trial;
          break;
        }
        step *= 0.5;
        if (step < kMinStep) {
          std::ostringstream msg;
          msg << "SDP Newton step stalled at barrier weight " << 1.0 / t
              << " (decrement " << decrement << ")";
          throw Error(ErrorKind::kNotConverged, msg.str());
        }
      }
      ++steps_this_t;
      if (++newton_total > kMaxNewtonSteps) {
        throw Error(ErrorKind::kNotConverged, "SDP exceeded the Newton step budget");
      }
    }

    // Newton-corrected dual Z_k = (F_k⁻¹ − F_k⁻¹ ΔF_k F_k⁻¹) / t with ΔF_k the
    // linear part of the last Newton step: Tr(F_ki Z_k) summed over blocks
    // is exactly c_i, and Z_k ⪰ 0 while the decrement is below 1. Then
    // Tr(F Z) = rows/t − cᵀdx − λ²/t, which gives the bound without
    // cancellation between O(1) terms built from nearly singular F_k.
    const double dual = trace_a + c.dot(x) - (rows / t - c.dot(dx) - decrement / t);
    const double primal = trace_a + c.dot(x);
    sol.history.push_back({1.0 / t, primal, dual, steps_this_t});
    if (rows / t <= tol.gap_tol) {
      sol.objective = primal;
      sol.dual_objective = dual;
      sol.duality_gap = rows / t;
      break;
    }
    t *= kMuShrink;
  }

  sol.P = layout.unpack_p(x);
  sol.Q = layout.unpack_q(x);
  sol.iterations = newton_total;
  sol.lmi_residuals = {min_eigenvalue(problem.lyapunov_block(sol.P)),
                       min_eigenvalue(problem.schur_block(sol.P, sol.Q)),
                       problem.trace_slack(sol.P)};
  const double pmin = min_eigenvalue(sol.P);
  if (pmin <= tol.psd_tol) {
    std::ostringstream msg;
    msg << "optimal P is numerically singular: lambda_min = " << pmin;
    throw Error(ErrorKind::kConsistency, msg.str());
  }
  return sol;
}

}  // namespace immse
