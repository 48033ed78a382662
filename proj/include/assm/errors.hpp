#pragma once

#include <stdexcept>
#include <string>

namespace assm {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad arguments, malformed input data, contract violations.  CLI exit code 2.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Non-finite values produced by a numeric routine.  CLI exit code 3.
class DivergenceError : public Error {
 public:
  explicit DivergenceError(const std::string& what, int epoch = -1)
      : Error(what), epoch_(epoch) {}
  // Epoch that diverged, or -1 when not applicable.
  int epoch() const { return epoch_; }

 private:
  int epoch_;
};

// Filesystem and format failures.  CLI exit code 4.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace assm
