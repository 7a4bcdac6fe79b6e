#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"

namespace fs = std::filesystem;

namespace {

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "immse");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  std::ostringstream out, err;
  const int code = immse_cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string data(const std::string& name) { return std::string(IMMSE_TEST_DATA) + "/" + name; }

fs::path scratch() {
  const fs::path dir = fs::temp_directory_path() / "immse_cli_test";
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> data_rows(const std::string& csv) {
  std::vector<std::string> rows;
  std::istringstream in(csv);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line[0] != '#') rows.push_back(line);
  }
  return rows;
}

std::string without_run_line(const std::string& csv) {
  std::string kept;
  std::istringstream in(csv);
  std::string line;
  while (std::getline(in, line)) {
    if (line.rfind("# run ", 0) != 0) kept += line + '\n';
  }
  return kept;
}

}  // namespace

TEST_CASE("rd-curve on the scalar grid") {
  const fs::path out = scratch() / "scalar.csv";
  const Outcome r = run_cli({"rd-curve", data("scalar.json"), "--out", out.string(), "--gnuplot-stub"});
  REQUIRE(r.code == immse_cli::kOk);
  const auto rows = data_rows(slurp(out));
  REQUIRE(rows.size() == 5);
  CHECK(rows[0] == "D,R_nats_per_time,trace_P,gap,are_residual,detectable,C_row_major");
  const double expect[] = {4.0, 1.0, 0.0, 0.0};
  for (int i = 0; i < 4; ++i) {
    std::istringstream row(rows[i + 1]);
    std::string d, rate;
    std::getline(row, d, ',');
    std::getline(row, rate, ',');
    CHECK(std::abs(std::stod(rate) - expect[i]) <= 1e-6);
  }
  CHECK(fs::exists(out.string() + ".gp"));
}

TEST_CASE("rd-curve output is byte-stable apart from the run line") {
  const fs::path a = scratch() / "a.csv", b = scratch() / "b.csv";
  REQUIRE(run_cli({"rd-curve", data("twostate.json"), "--out", a.string()}).code == 0);
  REQUIRE(run_cli({"rd-curve", data("twostate.json"), "--out", b.string(), "--threads", "2"}).code == 0);
  CHECK(without_run_line(slurp(a)) == without_run_line(slurp(b)));
}

TEST_CASE("exit codes") {
  CHECK(run_cli({"rd-curve", data("missing.json")}).code == immse_cli::kIoError);
  const Outcome neg = run_cli({"rd-curve", data("bad_grid.json")});
  CHECK(neg.code == immse_cli::kInputError);
  CHECK(neg.err.find("-0.1") != std::string::npos);
  CHECK(run_cli({"zdsc", data("scalar_validate.json")}).code == immse_cli::kInputError);
  CHECK(run_cli({"care", data("scalar.json")}).code == immse_cli::kInputError);
  CHECK(run_cli({"validate", data("scalar.json"), "--gain-override", "1,2"}).code ==
        immse_cli::kInputError);
  CHECK(run_cli({"bogus"}).code == immse_cli::kInputError);
  CHECK(run_cli({}).code == immse_cli::kInputError);
  CHECK(run_cli({"--help"}).code == immse_cli::kOk);
}

TEST_CASE("validate the canonical design") {
  const Outcome r = run_cli({"validate", data("scalar_validate.json")});
  CHECK(r.code == immse_cli::kOk);
  CHECK(r.out.find("PASS duncan") != std::string::npos);
  CHECK(r.out.find("PASS mmse_rate") != std::string::npos);
  CHECK(r.out.find("PASS info_rate") != std::string::npos);
  CHECK(r.out.find("FAIL") == std::string::npos);
}

TEST_CASE("validate reports divergence with no sensor on an unstable source") {
  const Outcome r = run_cli({"validate", data("unstable.json"), "--gain-override", "0"});
  CHECK(r.code == immse_cli::kNumericError);
  CHECK(r.out.find("diverged") != std::string::npos);
}

TEST_CASE("validate at saturation") {
  const Outcome r = run_cli({"validate", data("scalar_validate.json"), "--D", "100"});
  CHECK(r.code == immse_cli::kOk);
  CHECK(r.out.find("FAIL") == std::string::npos);
}

TEST_CASE("validate writes a report and path dumps") {
  const fs::path dir = scratch() / "paths";
  fs::remove_all(dir);
  const fs::path report = scratch() / "report.json";
  const Outcome r = run_cli({"validate", data("scalar_validate.json"), "--dump-paths",
                             dir.string(), "--dump-trials", "2", "--report", report.string()});
  CHECK(r.code == immse_cli::kOk);
  CHECK(fs::exists(dir / "trial_0.csv"));
  CHECK(fs::exists(dir / "trial_1.csv"));
  CHECK(slurp(report).find("\"config_hash\"") != std::string::npos);
}

TEST_CASE("care with an explicit gain") {
  const Outcome r = run_cli({"care", data("scalar.json"), "--gain-override", "2.8284271247461903"});
  REQUIRE(r.code == immse_cli::kOk);
  const auto rows = data_rows(r.out);
  REQUIRE(rows.size() == 2);
  CHECK(rows[1].find("0.2500000000") != std::string::npos);
}

TEST_CASE("zdsc one setting and a ladder") {
  const fs::path one = scratch() / "z1.csv";
  REQUIRE(run_cli({"zdsc", data("scalar.json"), "--out", one.string()}).code == 0);
  const std::string text = slurp(one);
  CHECK(text.find("unverified bound direction") != std::string::npos);
  auto rows = data_rows(text);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0] == "tau,delta_1,rate_nats_per_time,distortion,R_of_distortion,gap");

  const Outcome ladder = run_cli({"zdsc", data("ladder.json")});
  REQUIRE(ladder.code == 0);
  rows = data_rows(ladder.out);
  REQUIRE(rows.size() == 5);
  double prev = INFINITY;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    std::istringstream row(rows[i]);
    std::string cell;
    for (int col = 0; col < 4; ++col) std::getline(row, cell, ',');
    const double distortion = std::stod(cell);
    CHECK(distortion < prev);
    prev = distortion;
  }
}

TEST_CASE("seed override changes the zdsc numbers deterministically") {
  const Outcome a = run_cli({"zdsc", data("scalar.json"), "--seed", "99"});
  const Outcome b = run_cli({"zdsc", data("scalar.json"), "--seed", "99"});
  const Outcome c = run_cli({"zdsc", data("scalar.json")});
  REQUIRE(a.code == 0);
  CHECK(without_run_line(a.out) == without_run_line(b.out));
  CHECK(without_run_line(a.out) != without_run_line(c.out));
}
