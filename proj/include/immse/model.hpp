#pragma once

#include <string>
#include <vector>

#include "immse/linalg.hpp"

namespace immse {

/// Numeric thresholds shared by every module.
struct Tolerances {
  double eig_tol = 1e-9;       // relative zero threshold for ranks/spectra
  double psd_tol = 1e-8;       // slack on minimum eigenvalues
  double gap_tol = 1e-8;       // SDP duality-gap target
  double residual_tol = 1e-7;  // Riccati residual target

  /// Throws kValidation unless every field is strictly positive and finite.
  void validate() const;
};

struct ControllabilityReport {
  bool controllable = false;
  Eigen::Index rank = 0;
  Eigen::Index dim = 0;
};

/// Source dX = A X dt + B dW. A is n×n; B is n×m (m need not equal n).
/// Construction checks shapes, finiteness and controllability of (A, B).
class SystemModel {
 public:
  SystemModel(Matrix a, Matrix b, const Tolerances& tol = {});

  const Matrix& A() const { return a_; }
  const Matrix& B() const { return b_; }
  /// B Bᵀ.
  const SymMatrix& noise() const { return bbt_; }
  Eigen::Index n() const { return a_.rows(); }
  Eigen::Index m() const { return b_.cols(); }

 private:
  Matrix a_;
  Matrix b_;
  SymMatrix bbt_;
};

/// Observation gain in dY = C X dt + dV.
struct SensorGain {
  Matrix C;

  /// Cᵀ C.
  SymMatrix gram() const { return SymMatrix::symmetrized(C.transpose() * C); }
};

ControllabilityReport check_controllable(const Matrix& a, const Matrix& b,
                                         double eig_tol = 1e-9);
ControllabilityReport check_controllable(const SystemModel& model,
                                         double eig_tol = 1e-9);

/// PBH test over every eigenvalue of A with Re(λ) ≥ −eig_tol.
bool check_detectable(const Matrix& a, const Matrix& c, double eig_tol = 1e-9);
bool check_detectable(const SystemModel& model, const SensorGain& gain,
                      double eig_tol = 1e-9);

/// Problems found when validating raw (A, B) data, empty when valid.
std::vector<std::string> model_violations(const Matrix& a, const Matrix& b,
                                          double eig_tol);

}  // namespace immse
