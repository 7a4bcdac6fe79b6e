// Acceptance suite: one PASS/FAIL line per criterion.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"
#include "immse/design.hpp"
#include "immse/riccati.hpp"
#include "immse/validate.hpp"
#include "immse/zdsc.hpp"
#include "support.hpp"

using namespace immse;

namespace {

using Clock = std::chrono::steady_clock;

struct Verdict {
  bool pass = false;
  std::string detail;
};

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

template <typename... Args>
std::string fmt(const char* pattern, Args... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, pattern, args...);
  return buf;
}

SystemModel scalar(double a, double b) {
  return SystemModel(Matrix::Constant(1, 1, a), Matrix::Constant(1, 1, b));
}

SystemModel two_state() {
  Matrix a(2, 2), b(2, 2);
  a << 0.5, 1.0, 0.0, -2.0;
  b << 1.0, 0.0, 0.3, 1.0;
  return SystemModel(a, b);
}

Verdict scalar_oracle() {
  const auto t0 = Clock::now();
  std::mt19937_64 g(2024);
  std::uniform_real_distribution<double> ua(-3, 3), ub(0.1, 3), ud(0.05, 5);
  double worst = 0.0;
  int done = 0;
  while (done < 200) {
    const double a = ua(g), b = ub(g), d = ud(g);
    if (a == 0.0) continue;
    ++done;
    try {
      const TradeoffPoint pt = design_sensor(scalar(a, b), d);
      worst = std::max(worst, std::abs(pt.R - testing::scalar_rate(a, b, d)));
    } catch (const std::exception& e) {
      return {false, fmt("a=%g b=%g D=%g: %s", a, b, d, e.what())};
    }
  }
  const double secs = seconds_since(t0);
  return {worst <= 1e-6 && secs <= 30.0,
          fmt("200 cases, max |R_sdp - R_analytic| = %.3g (limit 1e-6), %.1f s (limit 30 s)",
              worst, secs)};
}

Verdict sdp_are_consistency() {
  const auto t0 = Clock::now();
  std::mt19937_64 g(11);
  std::uniform_real_distribution<double> ud(0.1, 2.0);
  std::uniform_int_distribution<int> un(1, 5);
  double worst_res = 0.0, worst_tr = 0.0;
  int instances = 0, undetectable = 0;
  while (instances < 100) {
    const int n = un(g);
    const Matrix a = testing::random_matrix(g, n, n);
    const Matrix b = testing::random_matrix(g, n, n);
    if (!check_controllable(a, b).controllable) continue;
    ++instances;
    const double d = ud(g) * n;
    try {
      const SystemModel m(a, b);
      const TradeoffPoint pt = design_sensor(m, d);
      worst_res = std::max(worst_res, pt.are_residual);
      worst_tr = std::max(worst_tr, std::abs(pt.P_care.trace() - pt.P.trace()));
      if (!check_detectable(m, pt.C)) ++undetectable;
    } catch (const std::exception& e) {
      return {false, fmt("n=%d D=%g: %s", n, d, e.what())};
    }
  }
  const double secs = seconds_since(t0);
  return {worst_res <= 1e-7 && worst_tr <= 1e-5 && undetectable == 0 && secs <= 120.0,
          fmt("100 instances, max ARE residual %.3g (1e-7), max |dTr| %.3g (1e-5), "
              "%d undetectable, %.1f s (120 s)",
              worst_res, worst_tr, undetectable, secs)};
}

Verdict curve_shape() {
  const Tolerances tol;
  const double slack = 10.0 * tol.gap_tol;
  std::mt19937_64 g(5);
  int curves = 0;
  for (int trial = 0; trial < 6; ++trial) {
    const int n = 1 + trial % 3;
    const SystemModel m = trial == 0 ? two_state()
                                     : SystemModel(testing::random_matrix(g, n, n),
                                                   testing::random_matrix(g, n, n));
    std::vector<double> grid;
    for (double d = 0.1; d < 8.0; d *= 1.6) grid.push_back(d * static_cast<double>(m.n()));
    const TradeoffCurve curve = sweep_curve(m, grid, tol);
    if (auto bad = check_curve_shape(curve, slack)) return {false, *bad};
    ++curves;
  }
  // Saturation beyond the open-loop MMSE for Hurwitz A.
  double worst = -INFINITY;
  for (int k = 0; k < 5; ++k) {
    const int n = 1 + k % 3;
    Matrix a = testing::random_matrix(g, n, n);
    a -= (spectral_abscissa(a) + 0.3) * Matrix::Identity(n, n);
    const SystemModel m(a, testing::random_matrix(g, n, n));
    const double open_loop = solve_lyapunov(a, m.noise()).trace();
    for (double scale : {1.0, 1.3, 4.0}) {
      worst = std::max(worst, design_sensor(m, scale * open_loop).R);
    }
  }
  return {worst <= tol.gap_tol,
          fmt("%d curves nonincreasing and convex within %.0e; saturated max R = %.3g (<= %.0e)",
              curves, slack, worst, tol.gap_tol)};
}

Verdict duncan() {
  const auto t0 = Clock::now();
  SimConfig cfg;
  cfg.dt = 1e-3;
  cfg.horizon = 20.0;
  cfg.trials = 64;
  const DuncanReport one =
      duncan_check(scalar(-1, 1), {Matrix::Constant(1, 1, 2.0 * std::sqrt(2.0))}, cfg);
  const SystemModel m2 = two_state();
  const DuncanReport two = duncan_check(m2, design_sensor(m2, 1.0).C, cfg);
  const double secs = seconds_since(t0);
  return {one.pass && two.pass && secs <= 60.0,
          fmt("scalar |diff| %.3g <= %.3g; n=2 |diff| %.3g <= %.3g; %.1f s (60 s)",
              one.difference, one.allowance, two.difference, two.allowance, secs)};
}

Verdict stationary_rates() {
  const TradeoffPoint pt = design_sensor(scalar(-1, 1), 0.25);
  SimConfig cfg;
  cfg.dt = 1e-3;
  cfg.horizon = 20.0;
  cfg.trials = 64;
  const SimResult r = simulate(scalar(-1, 1), pt.C, cfg);
  const double zm = (r.mmse_rate.mean - 0.25) / r.mmse_rate.stderr_;
  const double zi = (r.info_rate.mean - 1.0) / r.info_rate.stderr_;
  return {std::abs(zm) <= 3.0 && std::abs(zi) <= 3.0,
          fmt("mmse %.4f +- %.4f (z=%.2f), info %.4f +- %.4f (z=%.2f)", r.mmse_rate.mean,
              r.mmse_rate.stderr_, zm, r.info_rate.mean, r.info_rate.stderr_, zi)};
}

Verdict integrator_order() {
  const SystemModel m = scalar(-1, 1);
  const SensorGain c{Matrix::Constant(1, 1, 2.0 * std::sqrt(2.0))};
  RdeOptions opt;
  opt.dt = 1e-3;
  opt.converge_tol = 1e-13;
  const auto coarse = integrate_rde(m, c, opt);
  opt.dt = 5e-4;
  const auto fine = integrate_rde(m, c, opt);
  if (!coarse.limit || !fine.limit) return {false, "integration did not converge"};
  const double diff = (coarse.limit->matrix() - fine.limit->matrix()).norm();
  return {diff <= 1e-8, fmt("||P(dt) - P(dt/2)||_F = %.3g (1e-8)", diff)};
}

struct CliRun {
  int code;
  std::string out;
};

CliRun cli(std::vector<std::string> args) {
  args.insert(args.begin(), "immse");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  std::ostringstream out, err;
  const int code = immse_cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str()};
}

std::string strip_run_line(const std::string& csv) {
  std::string kept;
  std::istringstream in(csv);
  std::string line;
  while (std::getline(in, line)) {
    if (line.rfind("# run ", 0) != 0) kept += line + '\n';
  }
  return kept;
}

const std::string kData = IMMSE_TEST_DATA;

Verdict zdsc_harness() {
  ZdscScheme s;
  s.delta = Vector::Constant(2, 2.0);
  Vector x(2);
  x << 0.7, -0.3;
  const bool floor_ok = encode({x}, s)[0] == Codeword{1, -1} &&
                        encode({Vector::Zero(2)}, s)[0] == Codeword{0, 0};
  bool entropy_ok = true;
  for (int c = 1; c <= 6; ++c) {
    std::vector<Codeword> symbols;
    for (int k = 0; k < 3 * c; ++k) symbols.push_back({k % c});
    entropy_ok = entropy_ok && std::abs(plugin_entropy(symbols) - std::log(c)) <= 1e-14;
  }
  const CliRun run = cli({"zdsc", kData + "/scalar.json"});
  std::istringstream in(run.out);
  std::string line, row;
  while (std::getline(in, line)) {
    if (!line.empty() && line[0] != '#') row = line;
  }
  std::vector<double> cols;
  std::istringstream cells(row);
  std::string cell;
  while (std::getline(cells, cell, ',')) cols.push_back(std::atof(cell.c_str()));
  const bool report_ok = run.code == 0 && cols.size() == 6 && std::isfinite(cols[4]) &&
                         cols[2] > 0.0 && cols[3] > 0.0;
  if (!report_ok) return {false, "zdsc report was not produced"};
  return {floor_ok && entropy_ok,
          fmt("floor %s, entropy %s; rate %.4g at distortion %.4g vs R(distortion) %.4g "
              "(direction reported only)",
              floor_ok ? "exact" : "WRONG", entropy_ok ? "exact" : "WRONG", cols[2], cols[3],
              cols[4])};
}

Verdict determinism() {
  const std::vector<std::vector<std::string>> commands{
      {"rd-curve", kData + "/twostate.json"},
      {"zdsc", kData + "/ladder.json"},
      {"validate", kData + "/scalar_validate.json"}};
  for (const auto& args : commands) {
    const CliRun a = cli(args), b = cli(args);
    auto threaded = args;
    threaded.insert(threaded.end(), {"--threads", "3"});
    const CliRun c = cli(threaded);
    if (a.code != 0 || strip_run_line(a.out) != strip_run_line(b.out) ||
        strip_run_line(a.out) != strip_run_line(c.out)) {
      return {false, args[0] + " output differs between identical runs"};
    }
  }
  return {true, "rd-curve, zdsc and validate reproduce byte-identical output (1 and 3 threads)"};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Verdict()>>> criteria{
      {"scalar oracle", scalar_oracle},
      {"SDP/ARE consistency", sdp_are_consistency},
      {"curve shape", curve_shape},
      {"Duncan identity", duncan},
      {"stationary rates", stationary_rates},
      {"integrator order", integrator_order},
      {"ZDSC harness", zdsc_harness},
      {"determinism", determinism},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Verdict v;
    try {
      v = criteria[i].second();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    failures += v.pass ? 0 : 1;
    std::printf("%s %zu %s: %s\n", v.pass ? "PASS" : "FAIL", i + 1, criteria[i].first,
                v.detail.c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
