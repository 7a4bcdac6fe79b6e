#include "immse/validate.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "immse/error.hpp"
#include "immse/riccati.hpp"
#include "parallel.hpp"

namespace immse {

namespace {

constexpr double kErrorBlowUp = 1e9;

struct TrialStats {
  double mmse = 0.0;    // time-average over the post-burn-in window
  double info = 0.0;
  double duncan = 0.0;  // ½ ∫₀ᵀ ‖C e‖² dt, whole horizon
};

Estimate summarize(const std::vector<double>& v) {
  Estimate e;
  const double n = static_cast<double>(v.size());
  for (double x : v) e.mean += x;
  e.mean /= n;
  if (v.size() > 1) {
    double ss = 0.0;
    for (double x : v) ss += (x - e.mean) * (x - e.mean);
    e.stderr_ = std::sqrt(ss / (n - 1.0) / n);
  }
  return e;
}

struct FilterGrid {
  std::vector<SymMatrix> p;  // P_k at t_k = k·dt, k = 0..N
};

FilterGrid riccati_on_grid(const SystemModel& model, const SensorGain& gain,
                           const SimConfig& cfg) {
  RdeOptions opts;
  opts.dt = cfg.dt;
  opts.t_max = static_cast<double>(cfg.steps()) * cfg.dt;
  opts.record_stride = 1;
  opts.stop_on_convergence = false;
  try {
    RiccatiTrajectory traj = integrate_rde(model, gain, opts);
    return {std::move(traj.values)};
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::kDiverged) {
      throw Error(ErrorKind::kDiverged,
                  std::string("simulation diverged: ") + e.what());
    }
    throw;
  }
}

struct Run {
  std::vector<TrialStats> stats;
  std::vector<SamplePath> paths;
};

Run run_trials(const SystemModel& model, const SensorGain& gain,
               const SimConfig& cfg, std::size_t keep_paths) {
  cfg.validate();
  const Eigen::Index n = model.n();
  if (gain.C.cols() != n) {
    throw Error(ErrorKind::kInvalidArgument, "simulate: C must have n columns");
  }
  const FilterGrid grid = riccati_on_grid(model, gain, cfg);
  const std::size_t steps = cfg.steps();
  const double dt = cfg.dt;
  const double sqdt = std::sqrt(dt);
  const std::size_t burn = static_cast<std::size_t>(
      std::ceil(cfg.burn_in_fraction * static_cast<double>(steps)));

  std::vector<Matrix> kalman(steps);
  for (std::size_t k = 0; k < steps; ++k) {
    kalman[k] = grid.p[k].matrix() * gain.C.transpose();
  }

  const Matrix& a = model.A();
  const Matrix& b = model.B();
  const Matrix& c = gain.C;
  const Eigen::Index p_dim = c.rows();

  Run run;
  run.stats.resize(cfg.trials);
  const std::size_t kept = std::min<std::size_t>(keep_paths, cfg.trials);
  run.paths.resize(kept);

  detail::for_each_index(cfg.trials, cfg.threads, [&](std::uint64_t trial) {
    TrialRng rng(cfg.seed, trial);
    Vector x = Vector::Zero(n), xhat = Vector::Zero(n), y = Vector::Zero(p_dim);
    Vector e = Vector::Zero(n);
    Vector w(b.cols()), v(p_dim);
    SamplePath* path = trial < kept ? &run.paths[trial] : nullptr;
    double sum_e = 0.0, sum_ce = 0.0, duncan = 0.0;
    for (std::size_t k = 0; k < steps; ++k) {
      if (path) {
        path->t.push_back(static_cast<double>(k) * dt);
        path->x.push_back(x);
        path->xhat.push_back(xhat);
        path->y.push_back(y);
      }
      const double ce = 0.5 * (c * e).squaredNorm();
      duncan += ce * dt;
      if (k >= burn) {
        sum_e += e.squaredNorm();
        sum_ce += ce;
      }
      rng.fill_normal(w);
      rng.fill_normal(v);
      // The error obeys the same Euler step as x - xhat; propagating it
      // directly keeps full precision when an unstable x grows large.
      const Vector bw = sqdt * (b * w);
      const Vector kv = kalman[k] * (sqdt * v);
      e += (a * e - kalman[k] * (c * e)) * dt + bw - kv;
      if (path) {
        const Vector dy = c * x * dt + sqdt * v;
        const Vector innovation = dy - c * xhat * dt;
        x += a * x * dt + bw;
        xhat += a * xhat * dt + kalman[k] * innovation;
        y += dy;
      }
      if (!(e.norm() <= kErrorBlowUp)) {
        std::ostringstream msg;
        msg << "simulation diverged: estimation error norm exceeded 1e9 at t = "
            << static_cast<double>(k + 1) * dt << " (trial " << trial << ")";
        throw Error(ErrorKind::kDiverged, msg.str());
      }
    }
    if (path) {
      path->t.push_back(static_cast<double>(steps) * dt);
      path->x.push_back(x);
      path->xhat.push_back(xhat);
      path->y.push_back(y);
    }
    const double window = static_cast<double>(steps - burn);
    run.stats[trial] = {sum_e / window, sum_ce / window, duncan};
  });
  return run;
}

}  // namespace

void SimConfig::validate() const {
  std::ostringstream bad;
  if (!(std::isfinite(dt) && dt > 0.0)) bad << "dt must be positive; ";
  if (!(std::isfinite(horizon) && horizon >= 10.0 * dt)) {
    bad << "horizon must be at least 10 dt; ";
  }
  if (trials < 1) bad << "trials must be >= 1; ";
  if (!(burn_in_fraction >= 0.0 && burn_in_fraction < 1.0)) {
    bad << "burn_in_fraction must lie in [0, 1); ";
  }
  if (bad.tellp() > 0) {
    throw Error(ErrorKind::kValidation, "sim config: " + bad.str());
  }
}

std::size_t SimConfig::steps() const {
  return static_cast<std::size_t>(std::llround(horizon / dt));
}

TrialRng::TrialRng(std::uint64_t seed, std::uint64_t trial) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed),
                    static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(trial),
                    static_cast<std::uint32_t>(trial >> 32)};
  engine_.seed(seq);
}

double TrialRng::normal() { return normal_(engine_); }

void TrialRng::fill_normal(Vector& v) {
  for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = normal_(engine_);
}

SimResult simulate(const SystemModel& model, const SensorGain& gain,
                   const SimConfig& cfg, std::size_t keep_paths) {
  Run run = run_trials(model, gain, cfg, keep_paths);
  std::vector<double> mmse, info;
  for (const auto& s : run.stats) {
    mmse.push_back(s.mmse);
    info.push_back(s.info);
  }
  SimResult out;
  out.mmse_rate = summarize(mmse);
  out.info_rate = summarize(info);
  out.paths = std::move(run.paths);
  return out;
}

DuncanReport duncan_check(const SystemModel& model, const SensorGain& gain,
                          const SimConfig& cfg) {
  SimConfig transient = cfg;
  transient.burn_in_fraction = 0.0;
  const Run run = run_trials(model, gain, transient, 0);
  std::vector<double> integrals;
  for (const auto& s : run.stats) integrals.push_back(s.duncan);
  const Estimate mc = summarize(integrals);

  // Same left-point rule on the same grid as the Monte Carlo integrand.
  const FilterGrid grid = riccati_on_grid(model, gain, transient);
  double deterministic = 0.0;
  const std::size_t steps = transient.steps();
  for (std::size_t k = 0; k < steps; ++k) {
    deterministic +=
        0.5 * (gain.C * grid.p[k].matrix() * gain.C.transpose()).trace() * cfg.dt;
  }

  DuncanReport r;
  r.mc_integral = mc.mean;
  r.mc_stderr = mc.stderr_;
  r.riccati_integral = deterministic;
  r.difference = std::abs(mc.mean - deterministic);
  const double horizon = static_cast<double>(steps) * cfg.dt;
  r.allowance = 3.0 * mc.stderr_ + 10.0 * cfg.dt * std::max(horizon, deterministic);
  r.pass = r.difference <= r.allowance;
  return r;
}

std::vector<std::filesystem::path> dump_paths(const SimResult& result,
                                              const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  std::vector<std::filesystem::path> written;
  for (std::size_t j = 0; j < result.paths.size(); ++j) {
    const SamplePath& path = result.paths[j];
    const auto file = dir / ("trial_" + std::to_string(j) + ".csv");
    std::ofstream out(file);
    if (!out) {
      throw Error(ErrorKind::kIo, "cannot write " + file.string());
    }
    out << std::setprecision(17);
    const Eigen::Index n = path.x.empty() ? 0 : path.x.front().size();
    const Eigen::Index p = path.y.empty() ? 0 : path.y.front().size();
    out << "t";
    for (Eigen::Index i = 1; i <= n; ++i) out << ",x_" << i;
    for (Eigen::Index i = 1; i <= n; ++i) out << ",xhat_" << i;
    for (Eigen::Index i = 1; i <= p; ++i) out << ",y_" << i;
    out << '\n';
    for (std::size_t k = 0; k < path.t.size(); ++k) {
      out << path.t[k];
      for (Eigen::Index i = 0; i < n; ++i) out << ',' << path.x[k](i);
      for (Eigen::Index i = 0; i < n; ++i) out << ',' << path.xhat[k](i);
      for (Eigen::Index i = 0; i < p; ++i) out << ',' << path.y[k](i);
      out << '\n';
    }
    written.push_back(file);
  }
  return written;
}

}  // namespace immse
