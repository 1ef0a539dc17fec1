#pragma once

#include <stdexcept>
#include <string>

namespace epp {

// Error taxonomy. The three categories map 1:1 onto CLI exit codes:
// UsageError -> 1, DataError -> 2, NumericError -> 3.
class UsageError : public std::runtime_error {
 public:
  explicit UsageError(const std::string& what) : std::runtime_error(what) {}
};

class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

class NumericError : public std::runtime_error {
 public:
  explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

// Data-shaped problems.
class MissingColumnError : public DataError {
 public:
  explicit MissingColumnError(const std::string& col)
      : DataError("missing required column: " + col) {}
};

class ParseError : public DataError {
 public:
  ParseError(const std::string& file, long line, const std::string& detail)
      : DataError(file + ":" + std::to_string(line) + ": " + detail) {}
};

class EmptyDatasetError : public DataError {
 public:
  explicit EmptyDatasetError(const std::string& detail)
      : DataError("empty dataset: " + detail) {}
};

class IoError : public DataError {
 public:
  explicit IoError(const std::string& detail) : DataError(detail) {}
};

class OverlappingRangesError : public DataError {
 public:
  explicit OverlappingRangesError(const std::string& detail)
      : DataError("overlapping date ranges: " + detail) {}
};

class TooFewSamplesError : public DataError {
 public:
  explicit TooFewSamplesError(const std::string& detail)
      : DataError("too few samples: " + detail) {}
};

class DimensionMismatchError : public DataError {
 public:
  explicit DimensionMismatchError(const std::string& detail)
      : DataError("dimension mismatch: " + detail) {}
};

class GridMismatchError : public DataError {
 public:
  explicit GridMismatchError(const std::string& detail)
      : DataError("grid mismatch: " + detail) {}
};

class UnknownStationError : public DataError {
 public:
  explicit UnknownStationError(const std::string& id)
      : DataError("station not seen during fitting: " + id) {}
};

class FeatureMismatchError : public DataError {
 public:
  explicit FeatureMismatchError(const std::string& detail)
      : DataError("feature spec mismatch: " + detail) {}
};

class FormatVersionError : public DataError {
 public:
  explicit FormatVersionError(const std::string& detail)
      : DataError("artifact format mismatch: " + detail) {}
};

// Numerical problems.
class NonPositiveSigmaError : public NumericError {
 public:
  NonPositiveSigmaError() : NumericError("sigma must be positive") {}
};

class EmptyEnsembleError : public NumericError {
 public:
  EmptyEnsembleError() : NumericError("ensemble has no members") {}
};

class NonMonotoneQuantilesError : public NumericError {
 public:
  explicit NonMonotoneQuantilesError(const std::string& detail)
      : NumericError("non-monotone quantiles: " + detail) {}
};

class ZeroReferenceError : public NumericError {
 public:
  ZeroReferenceError() : NumericError("reference score is zero; skill undefined") {}
};

class ZeroErrorError : public NumericError {
 public:
  ZeroErrorError() : NumericError("zero RMSE; spread-error ratio undefined") {}
};

class DegenerateVarianceError : public NumericError {
 public:
  DegenerateVarianceError()
      : NumericError("score difference series is degenerate; models incomparable") {}
};

class NonFiniteLikelihoodError : public NumericError {
 public:
  explicit NonFiniteLikelihoodError(const std::string& detail)
      : NumericError("non-finite likelihood: " + detail) {}
};

class DivergedTrainingError : public NumericError {
 public:
  explicit DivergedTrainingError(const std::string& detail)
      : NumericError("training diverged: " + detail) {}
};

}  // namespace epp
