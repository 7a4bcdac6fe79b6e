#pragma once

#include <stdexcept>
#include <string>

namespace immse {

enum class ErrorKind {
  kInvalidArgument,  // dimension mismatch, bad preconditions
  kIo,
  kParse,
  kValidation,
  kNotPsd,
  kDegenerate,       // singular Kronecker/Lyapunov operator
  kInfeasible,
  kNotConverged,
  kDiverged,
  kConsistency,      // cross-check between independent routes failed
};

const char* to_string(ErrorKind kind);

/// Every failure raised by the library carries a kind so the C API can map
/// it onto a status code without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace immse
