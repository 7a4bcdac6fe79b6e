#include <doctest.h>

#include <random>

#include "immse/design.hpp"
#include "immse/error.hpp"
#include "immse/riccati.hpp"
#include "support.hpp"

using namespace immse;

namespace {

SystemModel scalar(double a, double b) {
  return SystemModel(Matrix::Constant(1, 1, a), Matrix::Constant(1, 1, b));
}

SystemModel two_state() {
  Matrix a(2, 2), b(2, 2);
  a << 0.5, 1.0, 0.0, -2.0;
  b << 1.0, 0.0, 0.3, 1.0;
  return SystemModel(a, b);
}

}  // namespace

TEST_CASE("canonical design point") {
  const TradeoffPoint pt = design_sensor(scalar(-1, 1), 0.25);
  CHECK(pt.R == doctest::Approx(1.0).epsilon(1e-7));
  CHECK(pt.P.trace() == doctest::Approx(0.25).epsilon(1e-7));
  CHECK(std::abs(pt.C.C(0, 0)) == doctest::Approx(2.0 * std::sqrt(2.0)).epsilon(1e-6));
  CHECK(pt.detectable);
  CHECK(pt.are_residual <= 1e-7);
  CHECK(pt.care_info_rate == doctest::Approx(pt.R).epsilon(1e-6));
}

TEST_CASE("scalar formula on random instances") {
  std::mt19937_64 g(99);
  std::uniform_real_distribution<double> ua(-3, 3), ub(0.1, 3), ud(0.05, 5);
  for (int i = 0; i < 40; ++i) {
    const double a = ua(g), b = ub(g), d = ud(g);
    if (a == 0.0) continue;
    const TradeoffPoint pt = design_sensor(scalar(a, b), d);
    CHECK(std::abs(pt.R - testing::scalar_rate(a, b, d)) <= 1e-6);
  }
}

TEST_CASE("gain recovery round trip") {
  std::mt19937_64 g(12);
  for (int trial = 0; trial < 15; ++trial) {
    const int n = 1 + trial % 4;
    const SystemModel m(testing::random_matrix(g, n, n), testing::random_matrix(g, n, n));
    const SensorGain c{testing::random_matrix(g, n, n)};
    const AreSolution care = solve_care(m, c);
    const SensorGain back = recover_gain(m, care.P);
    // Only CᵀC is identifiable from P.
    CHECK((back.gram().matrix() - c.gram().matrix()).norm() <=
          1e-6 * (1.0 + c.gram().norm()));
    CHECK(are_residual(m, back, care.P) <= 1e-7 * (1.0 + m.noise().norm()));
  }
}

TEST_CASE("recover_gain rejects an infeasible covariance") {
  // For a = -1, b = 1 the open-loop variance is 1/2; a larger P makes
  // A P + P Aᵀ + BBᵀ negative.
  const SymMatrix p = SymMatrix::from_upper(Matrix::Constant(1, 1, 2.0));
  CHECK_THROWS_AS(recover_gain(scalar(-1, 1), p), Error);
}

TEST_CASE("stable saturation gives zero rate and zero gain") {
  Matrix a(2, 2), b = Matrix::Identity(2, 2);
  a << -1, 0.5, 0, -2;
  const SystemModel m(a, b);
  const SymMatrix open_loop = solve_lyapunov(a, m.noise());
  for (double scale : {1.0, 1.5, 10.0}) {
    const TradeoffPoint pt = design_sensor(m, scale * open_loop.trace());
    CHECK(pt.R <= Tolerances{}.gap_tol);
    CHECK(pt.C.C.norm() <= 1e-3);
  }
}

TEST_CASE("curve is nonincreasing and convex") {
  const std::vector<double> grid{0.2, 0.3, 0.5, 0.8, 1.2, 2.0, 3.5, 6.0};
  const TradeoffCurve curve = sweep_curve(two_state(), grid);
  REQUIRE(curve.points.size() == grid.size());
  const double slack = 10.0 * Tolerances{}.gap_tol;
  CHECK_FALSE(check_curve_shape(curve, slack).has_value());
  for (std::size_t i = 1; i < grid.size(); ++i) {
    CHECK(curve.points[i].R <= curve.points[i - 1].R + slack);
  }
}

TEST_CASE("shape check catches a bad curve") {
  TradeoffCurve c;
  for (auto [d, r] : {std::pair{1.0, 2.0}, {2.0, 0.5}, {3.0, 0.4}, {4.0, 0.9}}) {
    TradeoffPoint p;
    p.D = d;
    p.R = r;
    c.points.push_back(p);
  }
  CHECK(check_curve_shape(c, 1e-7).has_value());
  c.points[2].R = 0.45;  // monotone but above the chord at D = 3
  c.points[3].R = 0.3;
  CHECK(check_curve_shape(c, 1e-7).has_value());
}

TEST_CASE("sweep_curve validates the grid") {
  CHECK_THROWS_AS(sweep_curve(scalar(-1, 1), {}), Error);
  CHECK_THROWS_AS(sweep_curve(scalar(-1, 1), {0.5, 0.25}), Error);
  CHECK_THROWS_AS(sweep_curve(scalar(-1, 1), {-0.1, 0.25}), Error);
}

TEST_CASE("orthogonal change of coordinates leaves R unchanged") {
  std::mt19937_64 g(41);
  for (int n = 2; n <= 4; ++n) {
    const Matrix a = testing::random_matrix(g, n, n);
    const Matrix b = testing::random_matrix(g, n, n);
    const Matrix u = testing::random_orthogonal(g, n);
    const double d = 0.6 * n;
    const TradeoffPoint p1 = design_sensor(SystemModel(a, b), d);
    const TradeoffPoint p2 =
        design_sensor(SystemModel(u * a * u.transpose(), u * b), d);
    CHECK(p1.R == doctest::Approx(p2.R).epsilon(1e-6));
  }
}

TEST_CASE("threaded sweep matches the serial sweep") {
  const std::vector<double> grid{0.3, 0.6, 1.0, 2.0};
  const TradeoffCurve serial = sweep_curve(two_state(), grid, {}, 1);
  const TradeoffCurve threaded = sweep_curve(two_state(), grid, {}, 3);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    CHECK(serial.points[i].R == threaded.points[i].R);
    CHECK(serial.points[i].C.C == threaded.points[i].C.C);
  }
}
