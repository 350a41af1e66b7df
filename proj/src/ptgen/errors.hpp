#ifndef PTGEN_ERRORS_HPP
#define PTGEN_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace ptgen {

// Error categories map 1:1 onto the C API status codes.

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace ptgen

#endif
