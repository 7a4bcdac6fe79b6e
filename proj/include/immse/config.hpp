#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "immse/model.hpp"
#include "immse/validate.hpp"

namespace immse {

struct ZdscSetting {
  double tau = 0.0;
  Vector delta;
};

struct ZdscConfig {
  std::vector<double> taus;
  std::vector<Vector> deltas;  // each of length n
  double horizon = 0.0;
  std::uint64_t trials = 0;

  /// Cartesian product τ × Δ, τ-major.
  std::vector<ZdscSetting> settings() const;
};

/// Parsed and validated problem document.
struct ProblemConfig {
  Matrix A;
  Matrix B;
  std::optional<SystemModel> model;
  bool distortion_is_grid = false;
  std::vector<double> distortions;
  std::optional<SimConfig> sim;
  std::optional<ZdscConfig> zdsc;
  Tolerances tolerances;
  std::uint64_t hash = 0;  // FNV-1a of the document bytes
};

/// Parses a JSON problem document. Throws kParse on malformed text and
/// kValidation listing every violated invariant.
ProblemConfig parse_problem(const std::string& text);

/// Reads and parses a file; kIo if it cannot be read.
ProblemConfig load_problem(const std::filesystem::path& path);

std::uint64_t fnv1a64(std::string_view bytes);

}  // namespace immse
