#include <doctest.h>

#include "immse/config.hpp"
#include "immse/error.hpp"

using namespace immse;

namespace {

ErrorKind kind_of(const std::string& text) {
  try {
    parse_problem(text);
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("document was accepted: " << text);
  return ErrorKind::kInvalidArgument;
}

const char* kScalar = R"({
  "A": [[-1]], "B": [[1]],
  "distortion": {"grid": [0.1, 0.25, 0.5, 1.0]},
  "sim": {"dt": 0.001, "horizon": 20, "trials": 64, "seed": 7, "burn_in": 0.25},
  "zdsc": {"tau": [0.05, 0.1], "delta": [8, 16], "horizon": 10, "trials": 100}
})";

}  // namespace

TEST_CASE("full document") {
  const ProblemConfig p = parse_problem(kScalar);
  REQUIRE(p.model.has_value());
  CHECK(p.model->n() == 1);
  CHECK(p.distortion_is_grid);
  CHECK(p.distortions == std::vector<double>{0.1, 0.25, 0.5, 1.0});
  REQUIRE(p.sim.has_value());
  CHECK(p.sim->trials == 64);
  CHECK(p.sim->seed == 7);
  CHECK(p.sim->burn_in_fraction == 0.25);
  REQUIRE(p.zdsc.has_value());
  const auto settings = p.zdsc->settings();
  REQUIRE(settings.size() == 4);
  CHECK(settings[0].tau == 0.05);
  CHECK(settings[1].delta(0) == 16.0);
  CHECK(settings[2].tau == 0.1);
}

TEST_CASE("hash depends only on the bytes") {
  CHECK(parse_problem(kScalar).hash == parse_problem(kScalar).hash);
  CHECK(parse_problem(kScalar).hash != parse_problem(std::string(kScalar) + " ").hash);
  CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
  CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
}

TEST_CASE("per-coordinate delta and single distortion") {
  const ProblemConfig p = parse_problem(R"({
    "A": [[-1, 0], [0, -2]], "B": [[1, 0], [0, 1]],
    "distortion": {"value": 0.4},
    "zdsc": {"tau": 0.1, "delta": [[2, 3], 5], "horizon": 1, "trials": 4}
  })");
  CHECK_FALSE(p.distortion_is_grid);
  CHECK(p.distortions == std::vector<double>{0.4});
  const auto s = p.zdsc->settings();
  REQUIRE(s.size() == 2);
  CHECK(s[0].delta(1) == 3.0);
  CHECK(s[1].delta(0) == 5.0);
  CHECK(s[1].delta(1) == 5.0);
}

TEST_CASE("tolerance overrides") {
  const ProblemConfig p = parse_problem(
      R"({"A": [[-1]], "B": [[1]], "distortion": {"value": 1}, "tolerances": {"gap_tol": 1e-10}})");
  CHECK(p.tolerances.gap_tol == 1e-10);
  CHECK(p.tolerances.psd_tol == Tolerances{}.psd_tol);
}

TEST_CASE("malformed and invalid documents") {
  CHECK(kind_of("{") == ErrorKind::kParse);
  CHECK(kind_of("[1, 2]") == ErrorKind::kParse);
  CHECK(kind_of(R"({"A": [[-1]], "B": [[1]], "distortion": {"grid": [-0.1, 1]}})") ==
        ErrorKind::kValidation);
  CHECK(kind_of(R"({"A": [[-1]], "B": [[1]], "distortion": {"grid": [1, 0.5]}})") ==
        ErrorKind::kValidation);
  CHECK(kind_of(R"({"A": [[-1]], "B": [[1]], "distortion": {"value": 1}, "extra": 1})") ==
        ErrorKind::kValidation);
  CHECK(kind_of(R"({"A": [[-1, 0]], "B": [[1]], "distortion": {"value": 1}})") ==
        ErrorKind::kValidation);
  CHECK(kind_of(R"({"A": [[-1, 0], [0, -1]], "B": [[1], [0]], "distortion": {"value": 1}})") ==
        ErrorKind::kValidation);
}

TEST_CASE("distortion block is optional") {
  const ProblemConfig p = parse_problem(R"({"A": [[-1]], "B": [[1]]})");
  CHECK(p.distortions.empty());
  CHECK_FALSE(p.sim.has_value());
  CHECK_FALSE(p.zdsc.has_value());
}

TEST_CASE("missing file") {
  try {
    load_problem("/nonexistent/problem.json");
    FAIL("loaded a missing file");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kIo);
  }
}
