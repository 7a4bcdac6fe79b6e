#include "immse/riccati.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "immse/error.hpp"

namespace immse {

namespace {

constexpr double kBlowUp = 1e12;
constexpr double kMaxHorizon = 1e4;
constexpr double kSeedTol = 1e-6;
constexpr std::size_t kSeedMaxSteps = 2'000'000;

double default_dt(const SystemModel& model, const SymMatrix& gram) {
  const double scale = std::max({1.0, model.A().norm(),
                                 std::sqrt(gram.norm() * model.noise().norm())});
  return 1e-3 / scale;
}

}  // namespace

SymMatrix riccati_rhs(const SystemModel& model, const SymMatrix& gram,
                      const SymMatrix& p) {
  const Matrix& a = model.A();
  const Matrix ap = a * p.matrix();
  const Matrix& pm = p.matrix();
  return SymMatrix::symmetrized(ap + ap.transpose() -
                                pm * gram.matrix() * pm +
                                model.noise().matrix());
}

RiccatiTrajectory integrate_rde(const SystemModel& model,
                                const SensorGain& gain,
                                const RdeOptions& options,
                                const Tolerances& tol) {
  const Eigen::Index n = model.n();
  if (gain.C.cols() != n) {
    throw Error(ErrorKind::kInvalidArgument, "integrate_rde: C must have n columns");
  }
  const SymMatrix gram = gain.gram();
  const double dt = options.dt > 0.0 ? options.dt : default_dt(model, gram);
  const bool adaptive_horizon = options.t_max <= 0.0;
  double t_max = adaptive_horizon ? kMaxHorizon : options.t_max;
  if (!adaptive_horizon && t_max < dt) {
    throw Error(ErrorKind::kInvalidArgument, "integrate_rde: t_max must be >= dt");
  }
  const double conv_tol =
      options.converge_tol > 0.0 ? options.converge_tol : tol.residual_tol;
  const std::size_t stride = std::max<std::size_t>(1, options.record_stride);
  // Re-estimate the horizon from the closed-loop spectrum once per time unit.
  const std::size_t window =
      std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(1.0 / dt)));

  RiccatiTrajectory traj;
  SymMatrix p = SymMatrix::zero(n);
  traj.times.push_back(0.0);
  traj.values.push_back(p);

  auto total_steps = [&] {
    return static_cast<std::size_t>(std::max(1.0, std::round(t_max / dt)));
  };

  std::size_t k = 0;
  bool recorded_last = true;
  while (k < total_steps()) {
    const SymMatrix k1 = riccati_rhs(model, gram, p);
    if (k1.norm() <= conv_tol * (1.0 + p.norm())) {
      traj.converged = true;
      if (options.stop_on_convergence) break;
    }
    if (options.max_steps != 0 && k >= options.max_steps) break;

    const Matrix& pm = p.matrix();
    const SymMatrix k2 = riccati_rhs(
        model, gram, SymMatrix::symmetrized(pm + 0.5 * dt * k1.matrix()));
    const SymMatrix k3 = riccati_rhs(
        model, gram, SymMatrix::symmetrized(pm + 0.5 * dt * k2.matrix()));
    const SymMatrix k4 =
        riccati_rhs(model, gram, SymMatrix::symmetrized(pm + dt * k3.matrix()));
    const Matrix next = pm + (dt / 6.0) * (k1.matrix() + 2.0 * k2.matrix() +
                                           2.0 * k3.matrix() + k4.matrix());
    if (!next.allFinite() || next.norm() > kBlowUp) {
      std::ostringstream msg;
      msg << "Riccati trajectory blew up (|P|_F > 1e12) at t = " << (k + 1) * dt;
      throw Error(ErrorKind::kDiverged, msg.str());
    }
    p = SymMatrix::symmetrized(next);
    ++k;

    recorded_last = false;
    if (k % stride == 0) {
      traj.times.push_back(static_cast<double>(k) * dt);
      traj.values.push_back(p);
      recorded_last = true;
    }
    if (adaptive_horizon && k % window == 0) {
      const double decay =
          -spectral_abscissa(model.A() - p.matrix() * gram.matrix());
      if (decay > 0.0) t_max = std::min(kMaxHorizon, std::max(200.0 / decay, dt * k));
    }
  }
  if (!recorded_last) {
    traj.times.push_back(static_cast<double>(k) * dt);
    traj.values.push_back(p);
  }
  if (!traj.converged) {
    const SymMatrix rhs = riccati_rhs(model, gram, p);
    traj.converged = rhs.norm() <= conv_tol * (1.0 + p.norm());
  }
  if (traj.converged) traj.limit = p;
  return traj;
}

double are_residual(const SystemModel& model, const SensorGain& gain,
                    const SymMatrix& p) {
  return riccati_rhs(model, gain.gram(), p).norm();
}

AreSolution newton_kleinman(const SystemModel& model, const SensorGain& gain,
                            const SymMatrix& seed, const Tolerances& tol,
                            int max_iterations) {
  const SymMatrix gram = gain.gram();
  const Matrix& s = gram.matrix();
  const double accept = tol.residual_tol * (1.0 + model.noise().norm());

  SymMatrix x = seed;
  SymMatrix best = seed;
  double best_res = are_residual(model, gain, seed);
  double prev_res = best_res;
  int it = 0;
  int stalled = 0;
  while (it < max_iterations && best_res > 1e-3 * accept) {
    ++it;
    const Matrix& xm = x.matrix();
    const Matrix closed = model.A() - xm * s;
    const SymMatrix w =
        SymMatrix::symmetrized(xm * s * xm + model.noise().matrix());
    x = solve_lyapunov(closed, w);
    const double res = are_residual(model, gain, x);
    if (res < best_res) {
      best = x;
      best_res = res;
    }
    // Quadratic convergence has ended once the residual stops halving.
    stalled = res > 0.5 * prev_res ? stalled + 1 : 0;
    if (stalled >= 3 && best_res <= accept) break;
    prev_res = res;
  }

  AreSolution out;
  out.P = best;
  out.residual = best_res;
  out.newton_iterations = it;
  out.closed_loop_spectrum = eigenvalues(model.A() - best.matrix() * s);
  if (best_res > accept) {
    std::ostringstream msg;
    msg << "Newton-Kleinman did not reach the ARE residual target: residual "
        << best_res << " > " << accept << " after " << it << " iterations";
    throw Error(ErrorKind::kNotConverged, msg.str());
  }
  if (out.closed_loop_spectrum.real().maxCoeff() >= tol.eig_tol) {
    std::ostringstream msg;
    msg << "ARE solution is not stabilizing: max Re(eig(A - P C'C)) = "
        << out.closed_loop_spectrum.real().maxCoeff();
    throw Error(ErrorKind::kNotConverged, msg.str());
  }
  return out;
}

AreSolution solve_care(const SystemModel& model, const SensorGain& gain,
                       const Tolerances& tol) {
  const Eigen::Index n = model.n();
  if (gain.C.cols() != n) {
    throw Error(ErrorKind::kInvalidArgument, "solve_care: C must have n columns");
  }
  if (!check_detectable(model, gain, tol.eig_tol)) {
    throw Error(ErrorKind::kValidation,
                "solve_care: (A, C) is not detectable; no stabilizing solution");
  }
  RdeOptions seed_opts;
  seed_opts.record_stride = std::numeric_limits<std::size_t>::max();
  seed_opts.converge_tol = std::max(kSeedTol, tol.residual_tol);
  seed_opts.max_steps = kSeedMaxSteps;
  const RiccatiTrajectory traj = integrate_rde(model, gain, seed_opts, tol);
  const SymMatrix& seed = traj.values.back();
  const double abscissa =
      spectral_abscissa(model.A() - seed.matrix() * gain.gram().matrix());
  if (abscissa >= 0.0) {
    std::ostringstream msg;
    msg << "Riccati ODE seed is not stabilizing after t = " << traj.times.back()
        << " (max Re = " << abscissa << ")";
    throw Error(ErrorKind::kNotConverged, msg.str());
  }
  return newton_kleinman(model, gain, seed, tol);
}

Rates rates_from_P(const SymMatrix& p, const SensorGain& gain) {
  Rates r;
  r.mmse_rate = p.trace();
  r.info_rate = 0.5 * (gain.C * p.matrix() * gain.C.transpose()).trace();
  return r;
}

}  // namespace immse
