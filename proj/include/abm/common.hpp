#pragma once

#include <stdexcept>
#include <string>

namespace abm {

// Problems caused by user input: malformed files, bad flag values, data that
// violates a documented precondition. The CLI maps these to exit code 1.
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Broken internal invariants. Reaching one of these is a bug, not a usage
// error. The CLI maps these to exit code 2.
struct InternalError : std::logic_error {
  using std::logic_error::logic_error;
};

// Shortest decimal string that round-trips to the same double. Used for every
// number we write to CSV so that artifacts are byte-stable and lossless.
std::string format_double(double x);

}  // namespace abm
