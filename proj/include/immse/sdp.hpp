#pragma once

#include <array>
#include <vector>

#include "immse/model.hpp"

namespace immse {

/// Trade-off program at distortion budget D:
///
///   minimize    Tr(A) + ½ Tr(Q)
///   subject to  A P + P Aᵀ + B Bᵀ ⪰ 0
///               [Q  Bᵀ; B  P] ⪰ 0
///               Tr(P) ≤ D
///
/// The decision variables are the upper triangles of P (n×n) and Q (m×m).
class SdpProblem {
 public:
  SdpProblem(SystemModel model, double distortion);

  const SystemModel& model() const { return model_; }
  double distortion() const { return distortion_; }

  /// A P + P Aᵀ + B Bᵀ.
  SymMatrix lyapunov_block(const SymMatrix& p) const;
  /// [Q Bᵀ; B P].
  SymMatrix schur_block(const SymMatrix& p, const SymMatrix& q) const;
  /// D − Tr(P).
  double trace_slack(const SymMatrix& p) const;

  /// Total number of constraint rows: n + (m + n) + 1.
  Eigen::Index constraint_rows() const;

 private:
  SystemModel model_;
  double distortion_;
};

SdpProblem build_sdp(const SystemModel& model, double distortion);

struct FeasibleStart {
  SymMatrix P;
  SymMatrix Q;
  double gamma = 1.0;  // C = γ I produced P
};

/// Phase I: P is the stabilizing ARE solution for C = γ I with γ doubled
/// from 1 until Tr(P) < D, and Q = Bᵀ P⁻¹ B + I.
FeasibleStart find_feasible_start(const SdpProblem& problem,
                                  const Tolerances& tol = {});

struct SdpIterate {
  double barrier_weight;  // μ
  double primal;          // ½ Tr(Q) + Tr(A)
  double dual;            // lower bound from the barrier's dual matrices
  int newton_steps;
};

struct SdpSolution {
  SymMatrix P;
  SymMatrix Q;
  double objective = 0.0;     // Tr(A) + ½ Tr(Q), nats per unit time
  double dual_objective = 0.0;
  double duality_gap = 0.0;   // constraint rows · μ at termination
  /// Minimum eigenvalue of each constraint block (lyapunov, schur, trace).
  std::array<double, 3> lmi_residuals{};
  int iterations = 0;         // total Newton steps
  std::vector<SdpIterate> history;
};

SdpSolution solve(const SdpProblem& problem, const Tolerances& tol = {});

}  // namespace immse
