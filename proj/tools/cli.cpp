#include "cli.hpp"

#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "immse/immse.h"

namespace immse_cli {

namespace {

using ProblemPtr = std::unique_ptr<immse_problem, decltype(&immse_problem_destroy)>;
using PointPtr = std::unique_ptr<immse_point, decltype(&immse_point_destroy)>;
using CurvePtr = std::unique_ptr<immse_curve, decltype(&immse_curve_destroy)>;

struct Failure {
  int code;
  std::string message;
};

int exit_code(immse_status s) {
  switch (s) {
    case IMMSE_OK: return kOk;
    case IMMSE_E_IO: return kIoError;
    case IMMSE_E_PARSE:
    case IMMSE_E_VALIDATION:
    case IMMSE_E_INVALID_ARGUMENT: return kInputError;
    case IMMSE_E_INTERNAL: return kInternalError;
    default: return kNumericError;
  }
}

void check(immse_status s, const std::string& context) {
  if (s != IMMSE_OK) {
    throw Failure{exit_code(s), context + ": " + immse_status_name(s) + ": " +
                                    immse_last_error()};
  }
}

std::string fmt(double v) {
  std::ostringstream s;
  s << std::setprecision(17) << v;
  return s.str();
}

std::string joined(const std::vector<double>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ',';
    out += fmt(values[i]);
  }
  return out;
}

std::string hex(std::uint64_t v) {
  std::ostringstream s;
  s << "0x" << std::hex << std::setw(16) << std::setfill('0') << v;
  return s.str();
}

std::string timestamp() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream s;
  s << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return s.str();
}

ProblemPtr load(const std::string& path) {
  immse_problem* raw = nullptr;
  check(immse_problem_load_file(path.c_str(), &raw), "loading " + path);
  return ProblemPtr(raw, &immse_problem_destroy);
}

std::vector<double> parse_gain(const std::string& text, std::size_t n) {
  std::vector<double> values;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      values.push_back(std::stod(item, &used));
      if (item.find_first_not_of(" \t", used) != std::string::npos) throw 0;
    } catch (...) {
      throw Failure{kInputError, "--gain-override: cannot parse \"" + item + "\""};
    }
  }
  if (values.size() == 1 && n > 1) {
    std::vector<double> diag(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) diag[i * n + i] = values[0];
    return diag;
  }
  if (values.size() != n * n) {
    throw Failure{kInputError, "--gain-override needs " + std::to_string(n * n) +
                                   " row-major entries (or one value for c*I)"};
  }
  return values;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Failure{kIoError, "cannot write " + path};
  return f;
}

// Header lines shared by every CSV. Only the "# run" line varies between
// reruns on identical input.
void write_preamble(std::ostream& os, const std::string& command,
                    const std::string& config, const immse_problem* p,
                    double wall_ms) {
  os << "# immse " << immse_version() << ' ' << command << " config=" << config
     << " hash=" << hex(immse_problem_config_hash(p)) << '\n';
  os << "# run " << timestamp() << " wall_ms=" << std::fixed << std::setprecision(1)
     << wall_ms << std::defaultfloat << '\n';
}

struct Options {
  std::string config;
  std::string out;
  std::string report;
  std::optional<std::uint64_t> seed;
  unsigned threads = 1;
  std::optional<double> D;
  std::string gain_override;
  std::string dump_paths;
  std::size_t dump_trials = 1;
  bool gnuplot_stub = false;
};

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

void write_report(const Options& opt, const std::string& command,
                  const immse_problem* p, double wall_ms, nlohmann::json points) {
  if (opt.report.empty()) return;
  nlohmann::json doc = {
      {"tool", "immse"},
      {"version", immse_version()},
      {"command", command},
      {"config", opt.config},
      {"config_hash", hex(immse_problem_config_hash(p))},
      {"wall_ms", wall_ms},
      {"points", std::move(points)},
  };
  open_out(opt.report) << doc.dump(2) << '\n';
}

std::vector<double> point_gain(const immse_point* pt, std::size_t n) {
  std::vector<double> c(n * n);
  immse_point_copy_C(pt, c.data());
  return c;
}

int cmd_rd_curve(const Options& opt, std::ostream& out) {
  const auto t0 = Clock::now();
  ProblemPtr problem = load(opt.config);
  const std::size_t n = immse_problem_dim(problem.get());
  if (immse_problem_distortion_count(problem.get()) == 0) {
    throw Failure{kInputError, "config has no distortion grid"};
  }
  std::vector<double> grid(immse_problem_distortion_count(problem.get()));
  immse_problem_distortions(problem.get(), grid.data());

  immse_curve* raw = nullptr;
  check(immse_sweep_curve(problem.get(), grid.data(), grid.size(), opt.threads, &raw),
        "rd-curve");
  CurvePtr curve(raw, &immse_curve_destroy);

  std::ostringstream csv;
  csv << "D,R_nats_per_time,trace_P,gap,are_residual,detectable,C_row_major\n";
  nlohmann::json points = nlohmann::json::array();
  for (std::size_t i = 0; i < immse_curve_size(curve.get()); ++i) {
    const immse_point* pt = immse_curve_point(curve.get(), i);
    const immse_point_summary s = immse_point_get_summary(pt);
    const std::vector<double> c = point_gain(pt, n);
    csv << fmt(s.D) << ',' << fmt(s.R) << ',' << fmt(s.trace_P) << ','
        << fmt(s.gap) << ',' << fmt(s.are_residual) << ',' << s.detectable
        << ",\"" << joined(c) << "\"\n";
    points.push_back({{"D", s.D}, {"R", s.R}, {"trace_P", s.trace_P},
                      {"gap", s.gap}, {"are_residual", s.are_residual},
                      {"detectable", s.detectable == 1}, {"C", c}});
  }
  const double wall = ms_since(t0);

  std::ostringstream text;
  write_preamble(text, "rd-curve", opt.config, problem.get(), wall);
  text << csv.str();
  if (opt.out.empty()) {
    out << text.str();
  } else {
    open_out(opt.out) << text.str();
    if (opt.gnuplot_stub) {
      open_out(opt.out + ".gp")
          << "set datafile separator ','\n"
             "set xlabel 'D (MMSE budget)'\n"
             "set ylabel 'R(D) [nats/time]'\n"
             "plot '" << opt.out << "' using 1:2 with linespoints title 'R(D)'\n";
    }
  }
  write_report(opt, "rd-curve", problem.get(), wall, std::move(points));
  return kOk;
}

immse_sim_config sim_config(const Options& opt, const immse_problem* p) {
  immse_sim_config cfg{};
  if (!immse_problem_sim_config(p, &cfg)) {
    throw Failure{kInputError, "config has no sim block"};
  }
  if (opt.seed) cfg.seed = *opt.seed;
  cfg.threads = opt.threads;
  return cfg;
}

int cmd_validate(const Options& opt, std::ostream& out) {
  const auto t0 = Clock::now();
  ProblemPtr problem = load(opt.config);
  const std::size_t n = immse_problem_dim(problem.get());
  immse_sim_config cfg = sim_config(opt, problem.get());
  nlohmann::json points = nlohmann::json::array();

  std::vector<double> gain;
  double info_target = 0.0, mmse_target = 0.0;
  if (!opt.gain_override.empty()) {
    gain = parse_gain(opt.gain_override, n);
    out << "gain override C = [" << joined(gain) << "]\n";
  } else {
    double d = 0.0;
    if (opt.D) {
      d = *opt.D;
    } else if (immse_problem_distortion_count(problem.get()) == 1 &&
               !immse_problem_distortion_is_grid(problem.get())) {
      immse_problem_distortions(problem.get(), &d);
    } else {
      throw Failure{kInputError, "validate needs --D or distortion.value in the config"};
    }
    immse_point* raw = nullptr;
    check(immse_design_sensor(problem.get(), d, &raw), "design");
    PointPtr pt(raw, &immse_point_destroy);
    const immse_point_summary s = immse_point_get_summary(pt.get());
    gain = point_gain(pt.get(), n);
    out << "design D=" << fmt(s.D) << " R=" << fmt(s.R) << " trace_P=" << fmt(s.trace_P)
        << " gap=" << fmt(s.gap) << " are_residual=" << fmt(s.are_residual)
        << " C=[" << joined(gain) << "]\n";
    points.push_back({{"D", s.D}, {"R", s.R}, {"trace_P", s.trace_P}, {"C", gain}});
  }

  // Stationary targets from the ARE at this gain; the design point's R and
  // Tr(P) agree with these to the cross-check tolerance.
  std::vector<double> p_care(n * n);
  immse_care_result care{};
  const immse_status care_status =
      immse_solve_care(problem.get(), gain.data(), p_care.data(), &care);
  const bool have_targets = care_status == IMMSE_OK;
  if (have_targets) {
    for (std::size_t i = 0; i < n; ++i) mmse_target += p_care[i * n + i];
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        for (std::size_t k = 0; k < n; ++k)
          info_target += 0.5 * gain[i * n + j] * p_care[j * n + k] * gain[i * n + k];
  }

  bool all_pass = true;
  int failure_code = kOk;
  auto fail = [&](const std::string& what, immse_status s) {
    out << "FAIL " << what << ": " << immse_status_name(s) << ": " << immse_last_error()
        << '\n';
    all_pass = false;
    if (failure_code == kOk) failure_code = exit_code(s);
  };

  immse_duncan_report dr{};
  const immse_status ds = immse_duncan_check(problem.get(), gain.data(), &cfg, &dr);
  if (ds == IMMSE_OK) {
    out << (dr.pass ? "PASS" : "FAIL") << " duncan: mc=" << fmt(dr.mc_integral)
        << " stderr=" << fmt(dr.mc_stderr) << " riccati=" << fmt(dr.riccati_integral)
        << " diff=" << fmt(dr.difference) << " tol=" << fmt(dr.allowance) << '\n';
    all_pass = all_pass && dr.pass;
  } else {
    fail("duncan", ds);
  }

  immse_sim_result sr{};
  const immse_status ss = immse_simulate(problem.get(), gain.data(), &cfg, &sr);
  if (ss != IMMSE_OK) {
    fail("simulation", ss);
  } else if (!have_targets) {
    fail("stationary targets", care_status);
  } else {
    auto stationary = [&](const char* name, immse_estimate est, double target) {
      const double tol = 3.0 * est.stderr_ + 10.0 * cfg.dt * std::abs(target);
      const bool pass = std::abs(est.mean - target) <= tol;
      out << (pass ? "PASS" : "FAIL") << ' ' << name << ": estimate=" << fmt(est.mean)
          << " stderr=" << fmt(est.stderr_) << " target=" << fmt(target)
          << " tol=" << fmt(tol) << '\n';
      all_pass = all_pass && pass;
    };
    stationary("mmse_rate", sr.mmse_rate, mmse_target);
    stationary("info_rate", sr.info_rate, info_target);
  }

  if (!opt.dump_paths.empty()) {
    check(immse_dump_paths(problem.get(), gain.data(), &cfg, opt.dump_trials,
                           opt.dump_paths.c_str()),
          "dump paths");
  }
  write_report(opt, "validate", problem.get(), ms_since(t0), std::move(points));
  if (all_pass) return kOk;
  return failure_code == kOk ? kCheckFailed : failure_code;
}

int cmd_zdsc(const Options& opt, std::ostream& out) {
  const auto t0 = Clock::now();
  ProblemPtr problem = load(opt.config);
  if (!immse_problem_has_zdsc(problem.get())) {
    throw Failure{kInputError, "config has no zdsc block"};
  }
  const std::size_t n = immse_problem_dim(problem.get());
  immse_sim_config cfg{};
  if (!immse_problem_sim_config(problem.get(), &cfg)) {
    cfg.dt = 1e-3;
    cfg.seed = 1;
  }
  if (opt.seed) cfg.seed = *opt.seed;
  cfg.trials = immse_problem_zdsc_trials(problem.get());
  cfg.threads = opt.threads;
  const double horizon = immse_problem_zdsc_horizon(problem.get());

  std::ostringstream csv;
  csv << "# gap = rate - R(distortion); unverified bound direction\n";
  csv << "tau";
  for (std::size_t i = 1; i <= n; ++i) csv << ",delta_" << i;
  csv << ",rate_nats_per_time,distortion,R_of_distortion,gap\n";
  nlohmann::json points = nlohmann::json::array();
  for (std::size_t k = 0; k < immse_problem_zdsc_count(problem.get()); ++k) {
    double tau = 0.0;
    std::vector<double> delta(n);
    check(immse_problem_zdsc_setting(problem.get(), k, &tau, delta.data()), "zdsc");
    immse_zdsc_result r{};
    check(immse_zdsc_measure(problem.get(), tau, delta.data(), horizon, &cfg, &r),
          "zdsc setting " + std::to_string(k));
    immse_point* raw = nullptr;
    check(immse_design_sensor(problem.get(), r.distortion_hat, &raw),
          "R(distortion) for zdsc setting " + std::to_string(k));
    PointPtr pt(raw, &immse_point_destroy);
    const double rd = immse_point_get_summary(pt.get()).R;
    csv << fmt(tau);
    for (double d : delta) csv << ',' << fmt(d);
    csv << ',' << fmt(r.rate_hat) << ',' << fmt(r.distortion_hat) << ',' << fmt(rd)
        << ',' << fmt(r.rate_hat - rd) << '\n';
    points.push_back({{"tau", tau}, {"delta", delta}, {"rate", r.rate_hat},
                      {"distortion", r.distortion_hat},
                      {"distortion_stderr", r.distortion_stderr},
                      {"R_of_distortion", rd}, {"K", r.K}});
  }
  const double wall = ms_since(t0);
  std::ostringstream text;
  write_preamble(text, "zdsc", opt.config, problem.get(), wall);
  text << csv.str();
  if (opt.out.empty()) {
    out << text.str();
  } else {
    open_out(opt.out) << text.str();
  }
  write_report(opt, "zdsc", problem.get(), wall, std::move(points));
  return kOk;
}

int cmd_care(const Options& opt, std::ostream& out) {
  const auto t0 = Clock::now();
  ProblemPtr problem = load(opt.config);
  const std::size_t n = immse_problem_dim(problem.get());
  if (opt.gain_override.empty()) {
    throw Failure{kInputError, "care needs --gain-override"};
  }
  const std::vector<double> gain = parse_gain(opt.gain_override, n);
  std::vector<double> p(n * n);
  immse_care_result r{};
  check(immse_solve_care(problem.get(), gain.data(), p.data(), &r), "care");
  double trace = 0.0;
  for (std::size_t i = 0; i < n; ++i) trace += p[i * n + i];

  std::ostringstream text;
  write_preamble(text, "care", opt.config, problem.get(), ms_since(t0));
  text << "residual,max_closed_loop_real,newton_iterations,trace_P,P_row_major\n"
       << fmt(r.residual) << ',' << fmt(r.max_closed_loop_real) << ','
       << r.newton_iterations << ',' << fmt(trace) << ",\"" << joined(p) << "\"\n";
  if (opt.out.empty()) {
    out << text.str();
  } else {
    open_out(opt.out) << text.str();
  }
  return kOk;
}

}  // namespace

int run(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"I-MMSE trade-off curves, sensor design and validation"};
  app.require_subcommand(1);
  app.fallthrough();
  Options opt;
  std::uint64_t seed = 0;
  auto* seed_opt = app.add_option("--seed", seed, "Override the config's seed");
  app.add_option("--threads", opt.threads, "Worker threads")
      ->check(CLI::PositiveNumber);
  app.add_option("--report", opt.report, "Also write a JSON run report");
  app.set_version_flag("--version", std::string(immse_version()));

  auto* rd = app.add_subcommand("rd-curve", "Sweep R(D) over the distortion grid");
  rd->add_option("config", opt.config)->required();
  rd->add_option("--out", opt.out, "CSV output path (default: stdout)");
  rd->add_flag("--gnuplot-stub", opt.gnuplot_stub, "Write <out>.gp next to the CSV");

  auto* val = app.add_subcommand("validate", "Design at D and run the Monte Carlo checks");
  val->add_option("config", opt.config)->required();
  auto* d_opt = val->add_option("--D", opt.D, "Distortion budget");
  val->add_option("--gain-override", opt.gain_override,
                  "Row-major C (or one value for c*I) instead of designing")
      ->excludes(d_opt);
  val->add_option("--dump-paths", opt.dump_paths, "Directory for per-trial path CSVs");
  val->add_option("--dump-trials", opt.dump_trials, "Number of trials to dump");

  auto* zd = app.add_subcommand("zdsc", "Zero-delay source coding experiment");
  zd->add_option("config", opt.config)->required();
  zd->add_option("--out", opt.out, "CSV output path (default: stdout)");

  auto* care = app.add_subcommand("care", "Solve the filter ARE for a given C");
  care->add_option("config", opt.config)->required();
  care->add_option("--gain-override", opt.gain_override, "Row-major C")->required();
  care->add_option("--out", opt.out, "CSV output path (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kInputError;
  }
  if (*seed_opt) opt.seed = seed;

  try {
    if (*rd) return cmd_rd_curve(opt, out);
    if (*val) return cmd_validate(opt, out);
    if (*zd) return cmd_zdsc(opt, out);
    if (*care) return cmd_care(opt, out);
  } catch (const Failure& f) {
    err << "immse: " << f.message << '\n';
    return f.code;
  } catch (const std::exception& e) {
    err << "immse: " << e.what() << '\n';
    return kInternalError;
  }
  return kInternalError;
}

}  // namespace immse_cli
