#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <vector>

#include "immse/model.hpp"

namespace immse {

struct SimConfig {
  double dt = 1e-3;
  double horizon = 50.0;
  std::uint64_t trials = 64;
  std::uint64_t seed = 1;
  double burn_in_fraction = 0.5;
  unsigned threads = 1;

  /// horizon ≥ 10·dt, trials ≥ 1, burn-in in [0, 1).
  void validate() const;
  std::size_t steps() const;
};

struct Estimate {
  double mean = 0.0;
  double stderr_ = 0.0;
};

struct SamplePath {
  std::vector<double> t;
  std::vector<Vector> x, xhat, y;
};

struct SimResult {
  Estimate mmse_rate;  // time-average of ‖X − X̂‖²
  Estimate info_rate;  // ½ time-average of ‖C (X − X̂)‖²
  std::vector<SamplePath> paths;  // only when requested
};

/// Normal generator for one trial: a 64-bit Mersenne twister keyed by
/// (seed, trial) through seed_seq, so trials are disjoint and reproducible
/// regardless of which thread runs them.
class TrialRng {
 public:
  TrialRng(std::uint64_t seed, std::uint64_t trial);
  double normal();
  void fill_normal(Vector& v);

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

/// Euler–Maruyama co-simulation of the source, channel and Kalman–Bucy
/// filter (time-varying gain P_t Cᵀ with P₀ = 0). Deterministic given the
/// seed. `keep_paths` retains that many leading trials.
SimResult simulate(const SystemModel& model, const SensorGain& gain,
                   const SimConfig& cfg, std::size_t keep_paths = 0);

struct DuncanReport {
  double mc_integral = 0.0;     // ½ ∫ ‖C (X − X̂)‖² dt, trial mean
  double mc_stderr = 0.0;
  double riccati_integral = 0.0;  // ½ ∫ Tr(C P_t Cᵀ) dt
  double difference = 0.0;
  double allowance = 0.0;       // 3·stderr + discretization allowance
  bool pass = false;
};

DuncanReport duncan_check(const SystemModel& model, const SensorGain& gain,
                          const SimConfig& cfg);

/// Writes one CSV per retained trial (columns t, x_i, xhat_i, y_i) into
/// `dir` as trial_<k>.csv and returns the written paths.
std::vector<std::filesystem::path> dump_paths(const SimResult& result,
                                              const std::filesystem::path& dir);

}  // namespace immse
