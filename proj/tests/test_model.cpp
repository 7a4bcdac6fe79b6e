#include <doctest.h>

#include <random>

#include "immse/error.hpp"
#include "immse/model.hpp"
#include "support.hpp"

using namespace immse;

TEST_CASE("scalar model is controllable") {
  const SystemModel m(Matrix::Constant(1, 1, -1.0), Matrix::Constant(1, 1, 1.0));
  CHECK(m.n() == 1);
  CHECK(m.m() == 1);
  CHECK(m.noise()(0, 0) == 1.0);
  CHECK(check_controllable(m).controllable);
}

TEST_CASE("rectangular noise input") {
  Matrix a(2, 2), b(2, 1);
  a << 0, 1, -1, -1;
  b << 0, 1;
  const SystemModel m(a, b);
  CHECK(m.m() == 1);
  CHECK(check_controllable(m).rank == 2);
}

TEST_CASE("uncontrollable pair is rejected with a reason") {
  Matrix a = Matrix::Zero(2, 2), b(2, 1);
  a.diagonal() << -1, -2;
  b << 1, 0;
  const auto rep = check_controllable(a, b);
  CHECK_FALSE(rep.controllable);
  CHECK(rep.rank == 1);
  CHECK(rep.dim == 2);
  CHECK_FALSE(model_violations(a, b, 1e-9).empty());
  try {
    SystemModel m(a, b);
    FAIL("accepted an uncontrollable pair");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kValidation);
  }
}

TEST_CASE("dimension mismatch and non-finite entries") {
  CHECK_THROWS_AS(SystemModel(Matrix::Identity(2, 2), Matrix::Identity(3, 3)), Error);
  CHECK_THROWS_AS(SystemModel(Matrix::Zero(2, 3), Matrix::Identity(2, 2)), Error);
  Matrix a = -Matrix::Identity(2, 2);
  a(0, 1) = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(SystemModel(a, Matrix::Identity(2, 2)), Error);
}

TEST_CASE("detectability via PBH") {
  Matrix a = Matrix::Zero(2, 2);
  a.diagonal() << 1, -1;
  Matrix c(1, 2);
  c << 0, 1;
  CHECK_FALSE(check_detectable(a, c));
  c << 1, 0;
  CHECK(check_detectable(a, c));
  CHECK(check_detectable(-Matrix::Identity(2, 2), Matrix::Zero(2, 2)));
  CHECK_FALSE(check_detectable(Matrix::Constant(1, 1, 1.0), Matrix::Zero(1, 1)));
}

TEST_CASE("marginal modes count as unstable") {
  Matrix a(2, 2);
  a << 0, 1, -1, 0;  // ±i
  CHECK_FALSE(check_detectable(a, Matrix::Zero(1, 2)));
  Matrix c(1, 2);
  c << 1, 0;
  CHECK(check_detectable(a, c));
}

TEST_CASE("similarity invariance of controllability and detectability") {
  std::mt19937_64 g(21);
  for (int trial = 0; trial < 30; ++trial) {
    const int n = 1 + trial % 4;
    const Matrix a = testing::random_matrix(g, n, n);
    Matrix b = testing::random_matrix(g, n, 1);
    if (trial % 3 == 0) b.setZero();
    Matrix c = testing::random_matrix(g, 1, n);
    if (trial % 2 == 0) c.setZero();
    const Matrix t = testing::random_matrix(g, n, n) + 3.0 * Matrix::Identity(n, n);
    const Matrix ti = t.inverse();
    CHECK(check_controllable(a, b).controllable ==
          check_controllable(t * a * ti, t * b).controllable);
    CHECK(check_detectable(a, c) == check_detectable(t * a * ti, c * ti));
  }
}

TEST_CASE("detectability duality on anti-stable A") {
  std::mt19937_64 g(34);
  for (int trial = 0; trial < 30; ++trial) {
    const int n = 1 + trial % 4;
    Matrix a = testing::random_matrix(g, n, n);
    // Shift so every eigenvalue has positive real part; then detectable
    // (A, C) is the same as controllable (Aᵀ, Cᵀ).
    const double lowest = -spectral_abscissa(-a);
    a += (1.0 - lowest) * Matrix::Identity(n, n);
    Matrix c = testing::random_matrix(g, 1 + trial % 2, n);
    if (trial % 5 == 0) c.col(0).setZero();
    CHECK(check_detectable(a, c) ==
          check_controllable(Matrix(a.transpose()), Matrix(c.transpose())).controllable);
  }
}

TEST_CASE("tolerances validate") {
  Tolerances t;
  CHECK_NOTHROW(t.validate());
  t.gap_tol = 0.0;
  CHECK_THROWS_AS(t.validate(), Error);
  t = {};
  t.psd_tol = std::nan("");
  CHECK_THROWS_AS(t.validate(), Error);
}
