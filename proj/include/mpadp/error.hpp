#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace mpadp {

// Base of every error raised by the library. The CLI maps the concrete
// subclasses onto process exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input: dimension mismatch, invalid probabilities, bad config.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// An iterative solver ran out of iterations. Carries the last iterate and
// the sup-norm residual after every sweep so callers can inspect progress.
class ConvergenceFailure : public Error {
 public:
  ConvergenceFailure(const std::string& what, std::vector<double> last_iterate,
                     std::vector<double> residual_trace)
      : Error(what),
        last_iterate_(std::move(last_iterate)),
        residual_trace_(std::move(residual_trace)) {}

  const std::vector<double>& last_iterate() const { return last_iterate_; }
  const std::vector<double>& residual_trace() const { return residual_trace_; }
  double last_residual() const {
    return residual_trace_.empty() ? 0.0 : residual_trace_.back();
  }

 private:
  std::vector<double> last_iterate_;
  std::vector<double> residual_trace_;
};

// A min-plus projection has no finite answer at some coordinate.
class ProjectionUndefined : public Error {
 public:
  using Error::Error;
};

// Linear-algebra failure (singular system, non-convergent power iteration).
class NumericError : public Error {
 public:
  using Error::Error;
};

// Least-squares basis without full column rank.
class RankDeficiency : public NumericError {
 public:
  using NumericError::NumericError;
};

// A proven inequality failed on concrete data. Signals a bug, not bad input.
class InvariantViolation : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace mpadp
