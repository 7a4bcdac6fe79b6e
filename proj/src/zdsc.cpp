#include "immse/zdsc.hpp"

#include <cmath>
#include <iostream>
#include <map>
#include <sstream>

#include "immse/error.hpp"
#include "parallel.hpp"

namespace immse {

namespace {

constexpr double kStateBlowUp = 1e9;

Codeword quantize(const Vector& x, const Vector& delta) {
  Codeword m(static_cast<std::size_t>(x.size()));
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    m[static_cast<std::size_t>(i)] =
        static_cast<std::int64_t>(std::floor(delta(i) * x(i)));
  }
  return m;
}

// Decoder quantities that do not depend on the data: the one-step mean
// transition and the Kalman gain applied at each sample time.
struct DecoderPlan {
  Matrix transition;            // 4th-order Taylor of exp(A h)
  std::vector<Matrix> gains;    // k = 1..K
};

SymMatrix lyapunov_rhs(const SystemModel& model, const Matrix& s) {
  const Matrix as = model.A() * s;
  return SymMatrix::symmetrized(as + as.transpose() + model.noise().matrix());
}

DecoderPlan plan_decoder(const SystemModel& model, const ZdscScheme& scheme,
                         std::size_t steps_per_sample, double h) {
  const Eigen::Index n = model.n();
  DecoderPlan plan;
  const Matrix ah = model.A() * h;
  Matrix term = Matrix::Identity(n, n);
  plan.transition = term;
  for (int j = 1; j <= 4; ++j) {
    term = term * ah / static_cast<double>(j);
    plan.transition += term;
  }

  const Matrix noise = (1.0 / (12.0 * scheme.delta.array().square())).matrix().asDiagonal();
  Matrix cov = Matrix::Zero(n, n);
  for (std::size_t k = 1; k <= scheme.K; ++k) {
    for (std::size_t j = 0; j < steps_per_sample; ++j) {
      const Matrix k1 = lyapunov_rhs(model, cov).matrix();
      const Matrix k2 = lyapunov_rhs(model, cov + 0.5 * h * k1).matrix();
      const Matrix k3 = lyapunov_rhs(model, cov + 0.5 * h * k2).matrix();
      const Matrix k4 = lyapunov_rhs(model, cov + h * k3).matrix();
      cov = SymMatrix::symmetrized(cov + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4))
                .matrix();
    }
    const Matrix gain = (cov + noise).llt().solve(cov).transpose();
    const Matrix ig = Matrix::Identity(n, n) - gain;
    cov = SymMatrix::symmetrized(ig * cov * ig.transpose() +
                                 gain * noise * gain.transpose())
              .matrix();
    plan.gains.push_back(gain);
  }
  return plan;
}

}  // namespace

void ZdscScheme::validate() const {
  std::ostringstream bad;
  if (!(std::isfinite(tau) && tau > 0.0)) bad << "tau must be positive; ";
  if (delta.size() == 0 || !delta.allFinite() || (delta.array() <= 0.0).any()) {
    bad << "every delta_i must be positive; ";
  }
  if (K < 1) bad << "K must be >= 1; ";
  if (bad.tellp() > 0) throw Error(ErrorKind::kValidation, "zdsc scheme: " + bad.str());
}

std::vector<Codeword> encode(const std::vector<Vector>& samples,
                             const ZdscScheme& scheme) {
  std::vector<Codeword> out;
  out.reserve(samples.size());
  for (const Vector& x : samples) {
    if (x.size() != scheme.delta.size()) {
      throw Error(ErrorKind::kInvalidArgument, "encode: sample dimension mismatch");
    }
    out.push_back(quantize(x, scheme.delta));
  }
  return out;
}

double plugin_entropy(const std::vector<Codeword>& symbols) {
  if (symbols.empty()) return 0.0;
  std::map<Codeword, std::size_t> counts;
  for (const auto& s : symbols) ++counts[s];
  const double total = static_cast<double>(symbols.size());
  double h = 0.0;
  for (const auto& [symbol, count] : counts) {
    const double p = static_cast<double>(count) / total;
    h -= p * std::log(p);
  }
  return h;
}

double estimate_rate(const std::vector<std::vector<Codeword>>& by_trial,
                     double tau) {
  if (by_trial.size() < 2) {
    std::cerr << "warning: entropy estimate from a single trial is degenerate; "
                 "reporting rate 0\n";
    return 0.0;
  }
  const std::size_t k_count = by_trial.front().size();
  if (k_count == 0) return 0.0;
  double total = 0.0;
  std::vector<Codeword> column(by_trial.size());
  for (std::size_t k = 0; k < k_count; ++k) {
    for (std::size_t j = 0; j < by_trial.size(); ++j) {
      if (by_trial[j].size() != k_count) {
        throw Error(ErrorKind::kInvalidArgument,
                    "estimate_rate: trials have different codeword counts");
      }
      column[j] = by_trial[j][k];
    }
    total += plugin_entropy(column);
  }
  return total / (static_cast<double>(k_count) * tau);
}

ZdscResult decode_and_measure(const SystemModel& model,
                              const ZdscScheme& scheme, const SimConfig& cfg) {
  scheme.validate();
  if (scheme.delta.size() != model.n()) {
    throw Error(ErrorKind::kInvalidArgument, "zdsc: delta must have n entries");
  }
  if (!(cfg.dt > 0.0) || cfg.trials < 1) {
    throw Error(ErrorKind::kValidation, "zdsc: dt must be positive and trials >= 1");
  }
  const Eigen::Index n = model.n();
  const std::size_t per = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::llround(scheme.tau / cfg.dt)));
  const double h = scheme.tau / static_cast<double>(per);
  const double sqh = std::sqrt(h);
  const std::size_t fine_steps = scheme.K * per;
  const DecoderPlan plan = plan_decoder(model, scheme, per, h);

  const Matrix& a = model.A();
  const Matrix& b = model.B();
  std::vector<std::vector<Codeword>> codewords(cfg.trials);
  std::vector<double> distortion(cfg.trials);

  detail::for_each_index(cfg.trials, cfg.threads, [&](std::uint64_t trial) {
    TrialRng rng(scheme.seed, trial);
    Vector x = Vector::Zero(n), xhat = Vector::Zero(n), w(b.cols());
    double err = 0.0;
    auto& words = codewords[trial];
    words.reserve(scheme.K);
    for (std::size_t j = 0; j <= fine_steps; ++j) {
      if (j > 0 && j % per == 0) {
        const Codeword m = quantize(x, scheme.delta);
        Vector z(n);
        for (Eigen::Index i = 0; i < n; ++i) {
          z(i) = (static_cast<double>(m[static_cast<std::size_t>(i)]) + 0.5) /
                 scheme.delta(i);
        }
        xhat += plan.gains[j / per - 1] * (z - xhat);
        words.push_back(m);
      }
      if (j == fine_steps) break;
      err += (x - xhat).squaredNorm();
      rng.fill_normal(w);
      x += a * x * h + sqh * (b * w);
      xhat = plan.transition * xhat;
      if (!(x.norm() <= kStateBlowUp)) {
        std::ostringstream msg;
        msg << "zdsc simulation diverged at t = " << static_cast<double>(j + 1) * h;
        throw Error(ErrorKind::kDiverged, msg.str());
      }
    }
    distortion[trial] = err / static_cast<double>(fine_steps);
  });

  ZdscResult r;
  r.K = scheme.K;
  r.decoder_kind = kMidpointKalmanDecoder;
  double mean = 0.0;
  for (double d : distortion) mean += d;
  mean /= static_cast<double>(cfg.trials);
  double ss = 0.0;
  for (double d : distortion) ss += (d - mean) * (d - mean);
  r.distortion_hat = mean;
  if (cfg.trials > 1) {
    const double t = static_cast<double>(cfg.trials);
    r.distortion_stderr = std::sqrt(ss / (t - 1.0) / t);
  }
  r.rate_hat = estimate_rate(codewords, scheme.tau);
  return r;
}

}  // namespace immse
