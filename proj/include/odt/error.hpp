#ifndef ODT_ERROR_HPP
#define ODT_ERROR_HPP

#include <stdexcept>

namespace odt {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Invalid parameters, grid mismatches, violated preconditions.
struct ValidationError : Error {
  using Error::Error;
};

// Missing or unreadable files.
struct IoError : Error {
  using Error::Error;
};

// Malformed file contents: bad magic, truncated payload, kind mismatch.
struct FormatError : Error {
  using Error::Error;
};

// Non-finite intermediate inside the solver.
struct SolverAbort : Error {
  using Error::Error;
};

}  // namespace odt

#endif
