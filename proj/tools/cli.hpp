#pragma once

#include <ostream>

namespace immse_cli {

// Exit codes shared by every command.
enum Exit : int {
  kOk = 0,
  kCheckFailed = 1,  // validate: at least one FAIL
  kIoError = 2,
  kInputError = 3,   // parse, validation, bad arguments
  kNumericError = 4, // solver, divergence, cross-check failures
  kInternalError = 5,
};

int run(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace immse_cli
