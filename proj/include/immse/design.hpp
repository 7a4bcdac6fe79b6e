#pragma once

#include <optional>
#include <string>
#include <vector>

#include "immse/model.hpp"
#include "immse/sdp.hpp"

namespace immse {

/// One point (D, R(D)) of the trade-off curve with the sensor achieving it.
struct TradeoffPoint {
  double D = 0.0;
  double R = 0.0;          // nats per unit time
  SymMatrix P;             // optimal stationary error covariance
  SymMatrix Q;
  SensorGain C;
  double are_residual = 0.0;   // ARE residual of (P, C)
  bool detectable = false;
  double gap = 0.0;
  // Independent route through the algebraic Riccati equation.
  SymMatrix P_care;
  double care_residual = 0.0;
  double care_info_rate = 0.0;  // ½ Tr(C P_care Cᵀ)
  int sdp_iterations = 0;
};

struct TradeoffCurve {
  std::vector<TradeoffPoint> points;  // ascending D
};

/// C = (P⁻¹ (A P + P Aᵀ + B Bᵀ) P⁻¹)^{1/2}, the symmetric PSD root. The
/// result solves A P + P Aᵀ − P CᵀC P + B Bᵀ = 0 and (A, C) is detectable.
SensorGain recover_gain(const SystemModel& model, const SymMatrix& p,
                        const Tolerances& tol = {});

/// Tolerance used when comparing the SDP and ARE routes.
inline constexpr double kCrossCheckTol = 1e-5;

TradeoffPoint design_sensor(const SystemModel& model, double distortion,
                            const Tolerances& tol = {});

/// Solves every grid point (ascending, positive). `threads` > 1 evaluates
/// points concurrently; output order always follows the grid.
TradeoffCurve sweep_curve(const SystemModel& model,
                          const std::vector<double>& grid,
                          const Tolerances& tol = {}, unsigned threads = 1);

/// Nonincreasing and convex within `slack`; returns the first violation.
std::optional<std::string> check_curve_shape(const TradeoffCurve& curve,
                                             double slack);

}  // namespace immse
