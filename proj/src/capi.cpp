#include "immse/immse.h"

#include <cmath>
#include <algorithm>
#include <memory>
#include <new>
#include <string>

#include "immse/config.hpp"
#include "immse/design.hpp"
#include "immse/error.hpp"
#include "immse/riccati.hpp"
#include "immse/validate.hpp"
#include "immse/zdsc.hpp"

struct immse_problem {
  immse::ProblemConfig config;
};

struct immse_point {
  immse::TradeoffPoint point;
};

struct immse_curve {
  std::vector<immse_point> points;
};

namespace {

thread_local std::string g_last_error;

immse_status status_of(immse::ErrorKind kind) {
  using immse::ErrorKind;
  switch (kind) {
    case ErrorKind::kInvalidArgument: return IMMSE_E_INVALID_ARGUMENT;
    case ErrorKind::kIo: return IMMSE_E_IO;
    case ErrorKind::kParse: return IMMSE_E_PARSE;
    case ErrorKind::kValidation: return IMMSE_E_VALIDATION;
    case ErrorKind::kNotPsd: return IMMSE_E_NOT_PSD;
    case ErrorKind::kDegenerate: return IMMSE_E_DEGENERATE;
    case ErrorKind::kInfeasible: return IMMSE_E_INFEASIBLE;
    case ErrorKind::kNotConverged: return IMMSE_E_NOT_CONVERGED;
    case ErrorKind::kDiverged: return IMMSE_E_DIVERGED;
    case ErrorKind::kConsistency: return IMMSE_E_CONSISTENCY;
  }
  return IMMSE_E_INTERNAL;
}

// Runs `fn`, translating exceptions into a status and the thread's last
// error message.
template <typename Fn>
immse_status guarded(Fn&& fn) noexcept {
  try {
    fn();
    g_last_error.clear();
    return IMMSE_OK;
  } catch (const immse::Error& e) {
    g_last_error = e.what();
    return status_of(e.kind());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return IMMSE_E_INTERNAL;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return IMMSE_E_INTERNAL;
  } catch (...) {
    g_last_error = "unknown failure";
    return IMMSE_E_INTERNAL;
  }
}

void require(bool ok, const char* what) {
  if (!ok) throw immse::Error(immse::ErrorKind::kInvalidArgument, what);
}

immse::Matrix from_row_major(const double* data, std::size_t rows, std::size_t cols) {
  using RowMajor =
      Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  return Eigen::Map<const RowMajor>(data, static_cast<Eigen::Index>(rows),
                                    static_cast<Eigen::Index>(cols));
}

void to_row_major(const immse::Matrix& m, double* out) {
  using RowMajor =
      Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  Eigen::Map<RowMajor>(out, m.rows(), m.cols()) = m;
}

immse::Tolerances to_cpp(const immse_tolerances& t) {
  return {t.eig_tol, t.psd_tol, t.gap_tol, t.residual_tol};
}

immse_tolerances to_c(const immse::Tolerances& t) {
  return {t.eig_tol, t.psd_tol, t.gap_tol, t.residual_tol};
}

immse::SimConfig to_cpp(const immse_sim_config& c) {
  immse::SimConfig s;
  s.dt = c.dt;
  s.horizon = c.horizon;
  s.trials = c.trials;
  s.seed = c.seed;
  s.burn_in_fraction = c.burn_in_fraction;
  s.threads = c.threads == 0 ? 1 : c.threads;
  return s;
}

const immse::SystemModel& model_of(const immse_problem* p) {
  require(p != nullptr, "problem handle is null");
  return *p->config.model;
}

immse::SensorGain gain_of(const immse_problem* p, const double* c) {
  require(c != nullptr, "C is null");
  const auto n = static_cast<std::size_t>(model_of(p).n());
  return {from_row_major(c, n, n)};
}

}  // namespace

extern "C" {

const char* immse_version(void) { return IMMSE_VERSION; }

const char* immse_status_name(immse_status status) {
  switch (status) {
    case IMMSE_OK: return "ok";
    case IMMSE_E_INVALID_ARGUMENT: return "invalid argument";
    case IMMSE_E_IO: return "i/o error";
    case IMMSE_E_PARSE: return "parse error";
    case IMMSE_E_VALIDATION: return "validation error";
    case IMMSE_E_NOT_PSD: return "not positive semidefinite";
    case IMMSE_E_DEGENERATE: return "degenerate spectrum";
    case IMMSE_E_INFEASIBLE: return "infeasible";
    case IMMSE_E_NOT_CONVERGED: return "not converged";
    case IMMSE_E_DIVERGED: return "diverged";
    case IMMSE_E_CONSISTENCY: return "consistency check failed";
    case IMMSE_E_INTERNAL: return "internal error";
  }
  return "unknown status";
}

const char* immse_last_error(void) { return g_last_error.c_str(); }

immse_tolerances immse_default_tolerances(void) { return to_c(immse::Tolerances{}); }

immse_status immse_problem_load_file(const char* path, immse_problem** out) {
  return guarded([&] {
    require(path && out, "null argument");
    *out = new immse_problem{immse::load_problem(path)};
  });
}

immse_status immse_problem_load_json(const char* text, size_t len,
                                     immse_problem** out) {
  return guarded([&] {
    require(text && out, "null argument");
    *out = new immse_problem{immse::parse_problem(std::string(text, len))};
  });
}

immse_status immse_problem_create(size_t n, size_t m, const double* A,
                                  const double* B, const immse_tolerances* tol,
                                  immse_problem** out) {
  return guarded([&] {
    require(A && B && out, "null argument");
    require(n > 0 && m > 0, "dimensions must be positive");
    immse::ProblemConfig cfg;
    if (tol) cfg.tolerances = to_cpp(*tol);
    cfg.tolerances.validate();
    cfg.A = from_row_major(A, n, n);
    cfg.B = from_row_major(B, n, m);
    cfg.model.emplace(cfg.A, cfg.B, cfg.tolerances);
    *out = new immse_problem{std::move(cfg)};
  });
}

void immse_problem_destroy(immse_problem* problem) { delete problem; }

size_t immse_problem_dim(const immse_problem* p) {
  return static_cast<size_t>(p->config.A.rows());
}

size_t immse_problem_noise_dim(const immse_problem* p) {
  return static_cast<size_t>(p->config.B.cols());
}

uint64_t immse_problem_config_hash(const immse_problem* p) { return p->config.hash; }

immse_tolerances immse_problem_tolerances(const immse_problem* p) {
  return to_c(p->config.tolerances);
}

void immse_problem_copy_A(const immse_problem* p, double* out) {
  to_row_major(p->config.A, out);
}

void immse_problem_copy_B(const immse_problem* p, double* out) {
  to_row_major(p->config.B, out);
}

size_t immse_problem_distortion_count(const immse_problem* p) {
  return p->config.distortions.size();
}

int immse_problem_distortion_is_grid(const immse_problem* p) {
  return p->config.distortion_is_grid ? 1 : 0;
}

void immse_problem_distortions(const immse_problem* p, double* out) {
  std::copy(p->config.distortions.begin(), p->config.distortions.end(), out);
}

int immse_problem_sim_config(const immse_problem* p, immse_sim_config* out) {
  if (!p->config.sim) return 0;
  const immse::SimConfig& s = *p->config.sim;
  *out = {s.dt, s.horizon, s.trials, s.seed, s.burn_in_fraction, s.threads};
  return 1;
}

int immse_problem_has_zdsc(const immse_problem* p) {
  return p->config.zdsc.has_value() ? 1 : 0;
}

size_t immse_problem_zdsc_count(const immse_problem* p) {
  return p->config.zdsc ? p->config.zdsc->settings().size() : 0;
}

immse_status immse_problem_zdsc_setting(const immse_problem* p, size_t index,
                                        double* tau, double* delta_out) {
  return guarded([&] {
    require(p && tau && delta_out, "null argument");
    require(p->config.zdsc.has_value(), "problem has no zdsc block");
    const auto settings = p->config.zdsc->settings();
    require(index < settings.size(), "zdsc setting index out of range");
    *tau = settings[index].tau;
    const immse::Vector& d = settings[index].delta;
    std::copy(d.data(), d.data() + d.size(), delta_out);
  });
}

double immse_problem_zdsc_horizon(const immse_problem* p) {
  return p->config.zdsc ? p->config.zdsc->horizon : 0.0;
}

uint64_t immse_problem_zdsc_trials(const immse_problem* p) {
  return p->config.zdsc ? p->config.zdsc->trials : 0;
}

immse_status immse_check_detectable(const immse_problem* p, const double* C,
                                    int* out) {
  return guarded([&] {
    require(out != nullptr, "null argument");
    *out = immse::check_detectable(model_of(p), gain_of(p, C),
                                   p->config.tolerances.eig_tol)
               ? 1
               : 0;
  });
}

immse_status immse_design_sensor(const immse_problem* p, double D,
                                 immse_point** out) {
  return guarded([&] {
    require(out != nullptr, "null argument");
    *out = new immse_point{
        immse::design_sensor(model_of(p), D, p->config.tolerances)};
  });
}

void immse_point_destroy(immse_point* point) { delete point; }

immse_point_summary immse_point_get_summary(const immse_point* point) {
  const immse::TradeoffPoint& t = point->point;
  immse_point_summary s;
  s.D = t.D;
  s.R = t.R;
  s.trace_P = t.P.trace();
  s.gap = t.gap;
  s.are_residual = t.are_residual;
  s.detectable = t.detectable ? 1 : 0;
  s.trace_P_care = t.P_care.trace();
  s.care_residual = t.care_residual;
  s.care_info_rate = t.care_info_rate;
  s.sdp_iterations = t.sdp_iterations;
  return s;
}

void immse_point_copy_P(const immse_point* point, double* out) {
  to_row_major(point->point.P.matrix(), out);
}

void immse_point_copy_C(const immse_point* point, double* out) {
  to_row_major(point->point.C.C, out);
}

void immse_point_copy_Q(const immse_point* point, double* out) {
  to_row_major(point->point.Q.matrix(), out);
}

immse_status immse_sweep_curve(const immse_problem* p, const double* grid,
                               size_t count, unsigned threads, immse_curve** out) {
  return guarded([&] {
    require(grid && out, "null argument");
    immse::TradeoffCurve curve = immse::sweep_curve(
        model_of(p), std::vector<double>(grid, grid + count),
        p->config.tolerances, threads);
    auto result = std::make_unique<immse_curve>();
    for (auto& pt : curve.points) result->points.push_back({std::move(pt)});
    *out = result.release();
  });
}

void immse_curve_destroy(immse_curve* curve) { delete curve; }

size_t immse_curve_size(const immse_curve* curve) { return curve->points.size(); }

const immse_point* immse_curve_point(const immse_curve* curve, size_t index) {
  if (index >= curve->points.size()) return nullptr;
  return &curve->points[index];
}

immse_status immse_solve_care(const immse_problem* p, const double* C,
                              double* P_out, immse_care_result* out) {
  return guarded([&] {
    require(P_out && out, "null argument");
    const immse::AreSolution sol =
        immse::solve_care(model_of(p), gain_of(p, C), p->config.tolerances);
    to_row_major(sol.P.matrix(), P_out);
    out->residual = sol.residual;
    out->max_closed_loop_real = sol.closed_loop_spectrum.real().maxCoeff();
    out->newton_iterations = sol.newton_iterations;
  });
}

immse_status immse_simulate(const immse_problem* p, const double* C,
                            const immse_sim_config* cfg, immse_sim_result* out) {
  return guarded([&] {
    require(cfg && out, "null argument");
    const immse::SimResult r = immse::simulate(model_of(p), gain_of(p, C), to_cpp(*cfg));
    out->mmse_rate = {r.mmse_rate.mean, r.mmse_rate.stderr_};
    out->info_rate = {r.info_rate.mean, r.info_rate.stderr_};
  });
}

immse_status immse_duncan_check(const immse_problem* p, const double* C,
                                const immse_sim_config* cfg,
                                immse_duncan_report* out) {
  return guarded([&] {
    require(cfg && out, "null argument");
    const immse::DuncanReport r =
        immse::duncan_check(model_of(p), gain_of(p, C), to_cpp(*cfg));
    *out = {r.mc_integral, r.mc_stderr, r.riccati_integral,
            r.difference,  r.allowance, r.pass ? 1 : 0};
  });
}

immse_status immse_dump_paths(const immse_problem* p, const double* C,
                              const immse_sim_config* cfg, size_t trials_to_dump,
                              const char* dir) {
  return guarded([&] {
    require(cfg && dir, "null argument");
    const immse::SimResult r =
        immse::simulate(model_of(p), gain_of(p, C), to_cpp(*cfg), trials_to_dump);
    immse::dump_paths(r, dir);
  });
}

immse_status immse_zdsc_measure(const immse_problem* p, double tau,
                                const double* delta, double horizon,
                                const immse_sim_config* cfg,
                                immse_zdsc_result* out) {
  return guarded([&] {
    require(delta && cfg && out, "null argument");
    require(std::isfinite(tau) && tau > 0.0, "tau must be positive");
    require(std::isfinite(horizon) && horizon > 0.0, "horizon must be positive");
    const immse::SystemModel& model = model_of(p);
    immse::ZdscScheme scheme;
    scheme.tau = tau;
    scheme.delta = Eigen::Map<const immse::Vector>(delta, model.n());
    scheme.K = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::floor(horizon / tau + 1e-9)));
    scheme.seed = cfg->seed;
    const immse::ZdscResult r = immse::decode_and_measure(model, scheme, to_cpp(*cfg));
    *out = {r.rate_hat, r.distortion_hat, r.distortion_stderr, r.K};
  });
}

}  // extern "C"
