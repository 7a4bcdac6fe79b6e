#pragma once

#include <optional>
#include <vector>

#include "immse/model.hpp"

namespace immse {

/// Samples of the filter Riccati ODE
///   dP/dt = A P + P Aᵀ − P Cᵀ C P + B Bᵀ,  P(0) = 0.
struct RiccatiTrajectory {
  std::vector<double> times;
  std::vector<SymMatrix> values;
  bool converged = false;
  std::optional<SymMatrix> limit;
};

struct RdeOptions {
  /// Step size; 0 picks 1e-3 / max(1, ‖A‖_F, √(‖CᵀC‖_F ‖BBᵀ‖_F)).
  double dt = 0.0;
  /// Horizon; 0 picks 200 / (decay rate of the slowest closed-loop mode),
  /// re-estimated while integrating, capped at 1e4.
  double t_max = 0.0;
  /// Keep every k-th step (the first and last steps are always kept).
  std::size_t record_stride = 1;
  /// Stop as soon as ‖dP/dt‖_F ≤ converge_tol · (1 + ‖P‖_F).
  bool stop_on_convergence = true;
  /// 0 means Tolerances::residual_tol.
  double converge_tol = 0.0;
  /// Hard cap on the number of steps (0 = none); reaching it ends the
  /// integration with converged = false.
  std::size_t max_steps = 0;
};

/// Right-hand side of the Riccati ODE at P.
SymMatrix riccati_rhs(const SystemModel& model, const SymMatrix& gram,
                      const SymMatrix& p);

/// Classical RK4 with symmetrization after each step. Throws kDiverged if
/// ‖P‖_F exceeds 1e12.
RiccatiTrajectory integrate_rde(const SystemModel& model,
                                const SensorGain& gain,
                                const RdeOptions& options = {},
                                const Tolerances& tol = {});

struct AreSolution {
  SymMatrix P;
  double residual = 0.0;  // ‖A P + P Aᵀ − P CᵀC P + BBᵀ‖_F
  Eigen::VectorXcd closed_loop_spectrum;  // eig(A − P CᵀC)
  int newton_iterations = 0;
};

/// Frobenius norm of the algebraic Riccati residual.
double are_residual(const SystemModel& model, const SensorGain& gain,
                    const SymMatrix& p);

/// Newton–Kleinman iteration X ← lyap(A − X S, X S X + BBᵀ) with S = CᵀC from
/// a seed X0 for which A − X0 S is Hurwitz.
AreSolution newton_kleinman(const SystemModel& model, const SensorGain& gain,
                            const SymMatrix& seed, const Tolerances& tol,
                            int max_iterations = 50);

/// Stabilizing positive definite solution of the filter ARE. Seeds from the
/// Riccati ODE and polishes with Newton–Kleinman. Requires (A, C)
/// detectable.
AreSolution solve_care(const SystemModel& model, const SensorGain& gain,
                       const Tolerances& tol = {});

struct Rates {
  double info_rate = 0.0;  // ½ Tr(C P Cᵀ), nats per unit time
  double mmse_rate = 0.0;  // Tr(P)
};

Rates rates_from_P(const SymMatrix& p, const SensorGain& gain);

}  // namespace immse
