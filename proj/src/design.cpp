#include "immse/design.hpp"

#include <cmath>
#include <exception>
#include <sstream>

#include "immse/error.hpp"
#include "immse/riccati.hpp"
#include "parallel.hpp"

namespace immse {

SensorGain recover_gain(const SystemModel& model, const SymMatrix& p,
                        const Tolerances& tol) {
  const Eigen::Index n = model.n();
  if (p.dim() != n) {
    throw Error(ErrorKind::kInvalidArgument, "recover_gain: P must be n×n");
  }
  const double pmin = min_eigenvalue(p);
  if (pmin <= tol.psd_tol) {
    std::ostringstream msg;
    msg << "recover_gain: P is numerically singular (lambda_min = " << pmin << ")";
    throw Error(ErrorKind::kNotPsd, msg.str());
  }
  const Matrix ap = model.A() * p.matrix();
  const SymMatrix lyap =
      SymMatrix::symmetrized(ap + ap.transpose() + model.noise().matrix());
  const double lmin = min_eigenvalue(lyap);
  if (lmin < -tol.psd_tol) {
    std::ostringstream msg;
    msg << "recover_gain: A P + P A' + B B' is not PSD (lambda_min = " << lmin << ")";
    throw Error(ErrorKind::kNotPsd, msg.str());
  }

  const Eigen::LLT<Matrix> llt(p.matrix());
  const Matrix pinv = llt.solve(Matrix::Identity(n, n));
  const SymMatrix m = SymMatrix::symmetrized(pinv * lyap.matrix() * pinv);
  SensorGain gain{psd_sqrt(m, tol.psd_tol).matrix()};

  const double residual = are_residual(model, gain, p);
  const double limit = tol.residual_tol * (1.0 + model.noise().norm());
  if (residual > limit) {
    std::ostringstream msg;
    msg << "recover_gain: ARE residual " << residual << " exceeds " << limit
        << " (lambda_min(P) = " << pmin << ", lambda_min(APA) = " << lmin << ")";
    throw Error(ErrorKind::kConsistency, msg.str());
  }
  if (!check_detectable(model, gain, tol.eig_tol)) {
    throw Error(ErrorKind::kConsistency,
                "recover_gain: recovered (A, C) is not detectable");
  }
  return gain;
}

TradeoffPoint design_sensor(const SystemModel& model, double distortion,
                            const Tolerances& tol) {
  const SdpProblem problem = build_sdp(model, distortion);
  const SdpSolution sol = solve(problem, tol);

  TradeoffPoint pt;
  pt.D = distortion;
  pt.R = sol.objective;
  pt.P = sol.P;
  pt.Q = sol.Q;
  pt.gap = sol.duality_gap;
  pt.sdp_iterations = sol.iterations;
  pt.C = recover_gain(model, sol.P, tol);
  pt.are_residual = are_residual(model, pt.C, sol.P);
  pt.detectable = check_detectable(model, pt.C, tol.eig_tol);

  const AreSolution care = solve_care(model, pt.C, tol);
  pt.P_care = care.P;
  pt.care_residual = care.residual;
  pt.care_info_rate = rates_from_P(care.P, pt.C).info_rate;

  std::ostringstream bad;
  if (pt.R < -tol.gap_tol) bad << "R = " << pt.R << " is negative; ";
  if (pt.P.trace() > distortion + tol.psd_tol) {
    bad << "Tr(P) = " << pt.P.trace() << " exceeds D; ";
  }
  if (std::abs(care.P.trace() - pt.P.trace()) > kCrossCheckTol) {
    bad << "Tr(P_care) = " << care.P.trace() << " vs Tr(P_sdp) = " << pt.P.trace()
        << "; ";
  }
  if (std::abs(pt.care_info_rate - pt.R) > kCrossCheckTol) {
    bad << "1/2 Tr(C P_care C') = " << pt.care_info_rate << " vs R = " << pt.R
        << "; ";
  }
  if (bad.tellp() > 0) {
    std::ostringstream msg;
    msg << "design_sensor cross-check failed at D = " << distortion << ": "
        << bad.str();
    throw Error(ErrorKind::kConsistency, msg.str());
  }
  return pt;
}

std::optional<std::string> check_curve_shape(const TradeoffCurve& curve,
                                             double slack) {
  const auto& pts = curve.points;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    if (pts[i + 1].R > pts[i].R + slack) {
      std::ostringstream msg;
      msg << "R increases between D = " << pts[i].D << " and D = " << pts[i + 1].D;
      return msg.str();
    }
  }
  for (std::size_t i = 1; i + 1 < pts.size(); ++i) {
    const double d0 = pts[i - 1].D, d1 = pts[i].D, d2 = pts[i + 1].D;
    const double chord =
        ((d2 - d1) * pts[i - 1].R + (d1 - d0) * pts[i + 1].R) / (d2 - d0);
    if (pts[i].R > chord + slack) {
      std::ostringstream msg;
      msg << "R is not convex at D = " << d1 << " (R = " << pts[i].R
          << ", chord = " << chord << ")";
      return msg.str();
    }
  }
  return std::nullopt;
}

TradeoffCurve sweep_curve(const SystemModel& model,
                          const std::vector<double>& grid,
                          const Tolerances& tol, unsigned threads) {
  if (grid.empty()) {
    throw Error(ErrorKind::kInvalidArgument, "sweep_curve: distortion grid is empty");
  }
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!(std::isfinite(grid[i]) && grid[i] > 0.0)) {
      std::ostringstream msg;
      msg << "sweep_curve: D = " << grid[i] << " must be positive";
      throw Error(ErrorKind::kInvalidArgument, msg.str());
    }
    if (i > 0 && !(grid[i] > grid[i - 1])) {
      throw Error(ErrorKind::kInvalidArgument,
                  "sweep_curve: distortion grid must be strictly ascending");
    }
  }

  std::vector<std::optional<TradeoffPoint>> results(grid.size());
  std::vector<std::exception_ptr> errors(grid.size());
  detail::for_each_index(grid.size(), threads, [&](std::uint64_t i) {
    try {
      results[i] = design_sensor(model, grid[i], tol);
    } catch (...) {
      errors[i] = std::current_exception();
    }
  });

  TradeoffCurve curve;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (errors[i]) {
      try {
        std::rethrow_exception(errors[i]);
      } catch (const Error& e) {
        std::ostringstream msg;
        msg << "D = " << grid[i] << ": " << e.what();
        throw Error(e.kind(), msg.str());
      }
    }
    curve.points.push_back(std::move(*results[i]));
  }
  if (auto bad = check_curve_shape(curve, 10.0 * tol.gap_tol)) {
    throw Error(ErrorKind::kConsistency, "trade-off curve shape: " + *bad);
  }
  return curve;
}

}  // namespace immse
