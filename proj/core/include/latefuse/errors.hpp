// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace latefuse {

/// Broad failure categories. The CLI maps these onto process exit codes
/// (config -> 2, data/io -> 3, numeric -> 4). Precondition violations that
/// indicate a programming error (not user input) throw std::invalid_argument
/// instead and are not part of this taxonomy.
enum class ErrorKind { Config, Data, Io, Numeric };

class Error : public std::runtime_error {
public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

private:
  ErrorKind kind_;
};

struct SingularMatrixError : Error {
  explicit SingularMatrixError(const std::string& m) : Error(ErrorKind::Numeric, m) {}
};
struct EmptyInputError : Error {
  explicit EmptyInputError(const std::string& m) : Error(ErrorKind::Data, m) {}
};
struct LengthMismatchError : Error {
  explicit LengthMismatchError(const std::string& m) : Error(ErrorKind::Data, m) {}
};
struct ShapeMismatchError : Error {
  explicit ShapeMismatchError(const std::string& m) : Error(ErrorKind::Data, m) {}
};
struct EmptyResultError : Error {
  explicit EmptyResultError(const std::string& m) : Error(ErrorKind::Data, m) {}
};
struct InsufficientDataError : Error {
  explicit InsufficientDataError(const std::string& m) : Error(ErrorKind::Data, m) {}
};
struct EmptySplitError : Error {
  explicit EmptySplitError(const std::string& m) : Error(ErrorKind::Data, m) {}
};
struct NoHistoryError : Error {
  explicit NoHistoryError(const std::string& m) : Error(ErrorKind::Data, m) {}
};
struct DataFormatError : Error {
  explicit DataFormatError(const std::string& m) : Error(ErrorKind::Data, m) {}
};
struct InvalidConfigError : Error {
  explicit InvalidConfigError(const std::string& m) : Error(ErrorKind::Config, m) {}
};
struct InvalidRangeError : Error {
  explicit InvalidRangeError(const std::string& m) : Error(ErrorKind::Config, m) {}
};
struct EmptyTrainingSetError : Error {
  explicit EmptyTrainingSetError(const std::string& m) : Error(ErrorKind::Data, m) {}
};
struct DivergenceDetectedError : Error {
  explicit DivergenceDetectedError(const std::string& m) : Error(ErrorKind::Numeric, m) {}
};
struct UnsolvableWeightsError : Error {
  explicit UnsolvableWeightsError(const std::string& m) : Error(ErrorKind::Numeric, m) {}
};
struct DegenerateClimatologyError : Error {
  explicit DegenerateClimatologyError(const std::string& m) : Error(ErrorKind::Data, m) {}
};
struct MisalignedSamplesError : Error {
  explicit MisalignedSamplesError(const std::string& m) : Error(ErrorKind::Data, m) {}
};
struct PoolTooSmallError : Error {
  explicit PoolTooSmallError(const std::string& m) : Error(ErrorKind::Data, m) {}
};
struct IoError : Error {
  explicit IoError(const std::string& m) : Error(ErrorKind::Io, m) {}
};

}  // namespace latefuse
