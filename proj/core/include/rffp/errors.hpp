#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace rffp {

// Base class for every error thrown by this library.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// A record that violates the fixed preamble layout (wrong length, empty
// label, non-finite samples).
class MalformedRecordError : public Error {
 public:
  using Error::Error;
};

// Signal on which an estimator has no defined answer, e.g. an all-zero
// correlation sum or a constant difference sequence.
class DegenerateSignalError : public Error {
 public:
  using Error::Error;
};

// Channel estimate too small to divide by at an active subcarrier.
class SingularChannelError : public Error {
 public:
  using Error::Error;
};

// I/Q gain imbalance requested on a symbol with zero quadrature energy.
class UndefinedImbalanceError : public Error {
 public:
  using Error::Error;
};

// Training input that cannot produce a usable model (single class, too few
// samples per class for the requested folds).
class DegenerateTrainingError : public Error {
 public:
  using Error::Error;
};

// Contract violation: bad sizes, bad parameter values.
class InvalidArgumentError : public Error {
 public:
  using Error::Error;
};

// File-level CSV problem: unreadable file, missing required column.
class CsvSchemaError : public Error {
 public:
  using Error::Error;
};

// Row-level CSV problem. Carries the 1-based data row index (the header does
// not count). Thrown only in strict mode; lenient readers report these as
// RowError values instead.
class CsvRowError : public Error {
 public:
  CsvRowError(std::size_t row, const std::string& msg)
      : Error("row " + std::to_string(row) + ": " + msg), row_(row) {}
  std::size_t row() const { return row_; }

 private:
  std::size_t row_;
};

// Failure of one pipeline stage on one record, annotated with the device
// label and the stage that failed.
class PipelineError : public Error {
 public:
  PipelineError(const std::string& device_label, const std::string& stage,
                const std::string& msg)
      : Error("device " + device_label + ", stage " + stage + ": " + msg),
        device_label_(device_label),
        stage_(stage) {}
  const std::string& device_label() const { return device_label_; }
  const std::string& stage() const { return stage_; }

 private:
  std::string device_label_;
  std::string stage_;
};

}  // namespace rffp
