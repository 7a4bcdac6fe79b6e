#include "immse/model.hpp"

#include <cmath>
#include <sstream>

#include "immse/error.hpp"

namespace immse {

void Tolerances::validate() const {
  const std::pair<const char*, double> fields[] = {
      {"eig_tol", eig_tol},
      {"psd_tol", psd_tol},
      {"gap_tol", gap_tol},
      {"residual_tol", residual_tol}};
  std::ostringstream bad;
  for (const auto& [name, value] : fields) {
    if (!(std::isfinite(value) && value > 0.0)) {
      bad << (bad.tellp() > 0 ? "; " : "") << name << " must be positive (got "
          << value << ")";
    }
  }
  if (bad.tellp() > 0) throw Error(ErrorKind::kValidation, bad.str());
}

namespace {

// Columns of [B, AB, ..., A^{n-1}B] with A and B normalized so that powers
// of A do not under/overflow the relative rank threshold.
Matrix controllability_matrix(const Matrix& a, const Matrix& b) {
  const Eigen::Index n = a.rows();
  const Eigen::Index m = b.cols();
  const double a_scale = a.norm() > 0.0 ? a.norm() : 1.0;
  const double b_scale = b.norm() > 0.0 ? b.norm() : 1.0;
  const Matrix an = a / a_scale;
  Matrix block = b / b_scale;
  Matrix out(n, n * m);
  for (Eigen::Index k = 0; k < n; ++k) {
    out.middleCols(k * m, m) = block;
    block = an * block;
  }
  return out;
}

// Eigenvalues λ of A for which rank [A − λI, B] < n.
std::vector<std::complex<double>> uncontrollable_modes(const Matrix& a,
                                                       const Matrix& b,
                                                       double eig_tol) {
  const Eigen::Index n = a.rows();
  std::vector<std::complex<double>> modes;
  const Eigen::VectorXcd lambda = eigenvalues(a);
  for (Eigen::Index i = 0; i < lambda.size(); ++i) {
    Eigen::MatrixXcd pbh(n, n + b.cols());
    pbh.leftCols(n) = a.cast<std::complex<double>>() -
                      lambda(i) * Eigen::MatrixXcd::Identity(n, n);
    pbh.rightCols(b.cols()) = b.cast<std::complex<double>>();
    if (numerical_rank(pbh, eig_tol) < n) modes.push_back(lambda(i));
  }
  return modes;
}

}  // namespace

ControllabilityReport check_controllable(const Matrix& a, const Matrix& b,
                                         double eig_tol) {
  if (a.rows() != a.cols() || b.rows() != a.rows()) {
    throw Error(ErrorKind::kInvalidArgument,
                "check_controllable: A must be n×n and B must have n rows");
  }
  ControllabilityReport report;
  report.dim = a.rows();
  report.rank = numerical_rank(controllability_matrix(a, b), eig_tol);
  report.controllable = report.rank == report.dim;
  return report;
}

ControllabilityReport check_controllable(const SystemModel& model,
                                         double eig_tol) {
  return check_controllable(model.A(), model.B(), eig_tol);
}

bool check_detectable(const Matrix& a, const Matrix& c, double eig_tol) {
  const Eigen::Index n = a.rows();
  if (a.cols() != n || c.cols() != n) {
    throw Error(ErrorKind::kInvalidArgument,
                "check_detectable: A must be n×n and C must have n columns");
  }
  const Eigen::VectorXcd lambda = eigenvalues(a);
  for (Eigen::Index i = 0; i < lambda.size(); ++i) {
    if (lambda(i).real() < -eig_tol) continue;
    Eigen::MatrixXcd pbh(n + c.rows(), n);
    pbh.topRows(n) = a.cast<std::complex<double>>() -
                     lambda(i) * Eigen::MatrixXcd::Identity(n, n);
    pbh.bottomRows(c.rows()) = c.cast<std::complex<double>>();
    if (numerical_rank(pbh, eig_tol) < n) return false;
  }
  return true;
}

bool check_detectable(const SystemModel& model, const SensorGain& gain,
                      double eig_tol) {
  return check_detectable(model.A(), gain.C, eig_tol);
}

std::vector<std::string> model_violations(const Matrix& a, const Matrix& b,
                                          double eig_tol) {
  std::vector<std::string> out;
  if (a.rows() == 0) out.emplace_back("A must be non-empty (n >= 1)");
  if (a.rows() != a.cols()) {
    std::ostringstream msg;
    msg << "A must be square (got " << a.rows() << "x" << a.cols() << ")";
    out.push_back(msg.str());
  }
  if (b.rows() != a.rows()) {
    std::ostringstream msg;
    msg << "B must have " << a.rows() << " rows (got " << b.rows() << ")";
    out.push_back(msg.str());
  }
  if (b.cols() == 0) out.emplace_back("B must have at least one column");
  if (!a.allFinite()) out.emplace_back("A has non-finite entries");
  if (!b.allFinite()) out.emplace_back("B has non-finite entries");
  if (!out.empty()) return out;

  const ControllabilityReport report = check_controllable(a, b, eig_tol);
  if (!report.controllable) {
    std::ostringstream msg;
    msg << "(A, B) is not controllable: controllability matrix rank "
        << report.rank << " < " << report.dim;
    for (const auto& mode : uncontrollable_modes(a, b, eig_tol)) {
      msg << "; PBH test fails at eigenvalue " << mode.real();
      if (mode.imag() != 0.0) msg << (mode.imag() > 0 ? "+" : "") << mode.imag() << "i";
    }
    out.push_back(msg.str());
  }
  return out;
}

SystemModel::SystemModel(Matrix a, Matrix b, const Tolerances& tol)
    : a_(std::move(a)), b_(std::move(b)) {
  const auto problems = model_violations(a_, b_, tol.eig_tol);
  if (!problems.empty()) {
    std::ostringstream msg;
    for (std::size_t i = 0; i < problems.size(); ++i) {
      msg << (i ? "; " : "") << problems[i];
    }
    throw Error(ErrorKind::kValidation, msg.str());
  }
  bbt_ = SymMatrix::symmetrized(b_ * b_.transpose());
}

}  // namespace immse
