#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace laneirl {

// Bad inputs: malformed files, invalid geometry, unusable configuration.
// The CLI maps these to exit code 2.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidValueError : public InputError {
 public:
  using InputError::InputError;
};

class InvalidGeometryError : public InputError {
 public:
  using InputError::InputError;
};

class ConfigError : public InputError {
 public:
  using InputError::InputError;
};

class ParseError : public InputError {
 public:
  ParseError(const std::string& path, long row, const std::string& what)
      : InputError(path + ":" + std::to_string(row) + ": " + what),
        path_(path),
        row_(row) {}

  const std::string& path() const { return path_; }
  long row() const { return row_; }

 private:
  std::string path_;
  long row_;
};

class NotEnoughHistoryError : public InputError {
 public:
  using InputError::InputError;
};

class TraceGapError : public InputError {
 public:
  TraceGapError(int car, int step)
      : InputError("prediction trace has no prediction issued for car " +
                   std::to_string(car) + " covering step " + std::to_string(step)),
        car_(car),
        step_(step) {}

  int car() const { return car_; }
  int step() const { return step_; }

 private:
  int car_;
  int step_;
};

class InsufficientDataError : public InputError {
 public:
  using InputError::InputError;
};

// Numerical failures during optimization or likelihood evaluation.
// The CLI maps these to exit code 3.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class FeatureEvalError : public NumericalError {
 public:
  FeatureEvalError(const std::string& feature, int step)
      : NumericalError("feature '" + feature + "' is non-finite at step " +
                       std::to_string(step)),
        feature_(feature),
        step_(step) {}

  const std::string& feature() const { return feature_; }
  int step() const { return step_; }

 private:
  std::string feature_;
  int step_;
};

class NonPositiveDefiniteError : public NumericalError {
 public:
  explicit NonPositiveDefiniteError(std::vector<double> lambda_history)
      : NumericalError(describe(lambda_history)),
        lambda_history_(std::move(lambda_history)) {}

  const std::vector<double>& lambda_history() const { return lambda_history_; }

 private:
  static std::string describe(const std::vector<double>& history) {
    std::string msg = "-H is not positive definite after regularization attempts, lambda tried:";
    for (double l : history) msg += " " + std::to_string(l);
    return msg;
  }

  std::vector<double> lambda_history_;
};

class DivergenceError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

}  // namespace laneirl
