#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace weakpairs {

/// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// |pi_plus - 0.5| < 1e-12 where an estimator divides by (pi_minus - pi_plus).
class PriorDegenerate : public Error {
 public:
  explicit PriorDegenerate(double pi_plus)
      : Error("class prior pi_plus=" + std::to_string(pi_plus) +
              " is degenerate for this estimator (requires pi_plus != 0.5)") {}
};

/// A class prior outside the open interval (0,1).
class PriorOutOfRange : public Error {
 public:
  explicit PriorOutOfRange(double pi_plus)
      : Error("class prior pi_plus=" + std::to_string(pi_plus) +
              " must lie strictly inside (0,1)") {}
};

class DimensionMismatch : public Error {
 public:
  DimensionMismatch(std::size_t expected, std::size_t got)
      : Error("dimension mismatch: expected " + std::to_string(expected) +
              ", got " + std::to_string(got)) {}
};

class EmptyDataset : public Error {
 public:
  EmptyDataset() : Error("operation requires a nonempty dataset") {}
};

/// Malformed field in a CSV file; positions are 1-based.
class ParseError : public Error {
 public:
  ParseError(std::size_t row, std::size_t column, const std::string& detail)
      : Error("parse error at row " + std::to_string(row) + ", column " +
              std::to_string(column) + ": " + detail),
        row(row),
        column(column) {}
  std::size_t row;
  std::size_t column;
};

/// Label outside both accepted encodings {-1,+1} and {0,1}.
class LabelDomainError : public Error {
 public:
  LabelDomainError(std::size_t row, const std::string& value)
      : Error("label '" + value + "' at row " + std::to_string(row) +
              " is outside the accepted encodings {-1,+1} and {0,1}") {}
};

/// Probe sample for the learned annotator contains a single class.
class DegenerateProbe : public Error {
 public:
  DegenerateProbe() : Error("probe dataset contains only one class") {}
};

/// A training batch produced a NaN/Inf risk; carries the 1-based epoch.
class NonFiniteRisk : public Error {
 public:
  explicit NonFiniteRisk(int epoch)
      : Error("non-finite training risk at epoch " + std::to_string(epoch)),
        epoch(epoch) {}
  int epoch;
};

/// Estimator specification invalid for the requested operation.
class InvalidSpec : public Error {
 public:
  explicit InvalidSpec(const std::string& what) : Error(what) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(what) {}
};

}  // namespace weakpairs
