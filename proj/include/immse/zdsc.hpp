#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "immse/model.hpp"
#include "immse/validate.hpp"

namespace immse {

/// Sample-and-quantize encoder: every τ time units each coordinate is
/// mapped to ⌊Δ_i x_i⌋. Δ_i is a gain, so quantizer cells are 1/Δ_i wide.
struct ZdscScheme {
  double tau = 0.1;
  Vector delta;
  std::size_t K = 1;  // number of transmitted samples
  std::uint64_t seed = 1;

  void validate() const;
};

using Codeword = std::vector<std::int64_t>;

/// Codewords m_1..m_K for the samples X_{kτ}, k = 1..K.
std::vector<Codeword> encode(const std::vector<Vector>& samples,
                             const ZdscScheme& scheme);

/// Plug-in entropy in nats of the empirical distribution of `symbols`.
double plugin_entropy(const std::vector<Codeword>& symbols);

/// Σ_k Ĥ(m_k) / (K τ) in nats per unit time. `by_trial[j][k]` is the k-th
/// codeword of trial j. Fewer than two trials yields 0 with a warning on
/// stderr.
double estimate_rate(const std::vector<std::vector<Codeword>>& by_trial,
                     double tau);

struct ZdscResult {
  double rate_hat = 0.0;        // nats per unit time
  double distortion_hat = 0.0;  // time-average ‖X − X̂‖²
  double distortion_stderr = 0.0;
  std::size_t K = 0;
  std::string decoder_kind;
};

inline constexpr const char* kMidpointKalmanDecoder =
    "kalman-midpoint-uniform-noise";

/// Runs the scheme over cfg.trials source paths on a fine grid of step
/// cfg.dt (rounded so that τ is a whole number of steps). The decoder is a
/// Kalman predictor between samples, corrected at each kτ with the
/// midpoint-dequantized sample ((m_k)_i + ½)/Δ_i treated as a Gaussian
/// measurement of variance 1/(12 Δ_i²).
ZdscResult decode_and_measure(const SystemModel& model,
                              const ZdscScheme& scheme, const SimConfig& cfg);

}  // namespace immse
