#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace psmc {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class PreconditionError : public Error {
 public:
  using Error::Error;
};

class ConfigurationError : public Error {
 public:
  using Error::Error;
};

class NumericalError : public Error {
 public:
  NumericalError(const std::string& what, std::ptrdiff_t row = -1)
      : Error(row >= 0 ? what + " (row " + std::to_string(row) + ")" : what), row_(row) {}
  /// Offending row index within the evaluated block, or -1.
  std::ptrdiff_t row() const { return row_; }

 private:
  std::ptrdiff_t row_;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

class InitializationError : public Error {
 public:
  using Error::Error;
};

class StuckChainError : public Error {
 public:
  using Error::Error;
};

class ShardSizeError : public Error {
 public:
  using Error::Error;
};

class NotPositiveDefinite : public Error {
 public:
  using Error::Error;
};

class NegativeKL : public Error {
 public:
  using Error::Error;
};

class DegenerateSample : public Error {
 public:
  using Error::Error;
};

class SingularInformation : public Error {
 public:
  using Error::Error;
};

class UnknownExample : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

class InsufficientRows : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

/// Failure of one or more shard chains; carries every shard's message.
class ShardRunError : public Error {
 public:
  struct Failure {
    int shard_index;
    std::string message;
  };

  explicit ShardRunError(std::vector<Failure> failures)
      : Error(summarize(failures)), failures_(std::move(failures)) {}

  const std::vector<Failure>& failures() const { return failures_; }

 private:
  static std::string summarize(const std::vector<Failure>& failures) {
    std::string out = std::to_string(failures.size()) + " shard chain(s) failed";
    for (const auto& f : failures) {
      out += "; shard " + std::to_string(f.shard_index) + ": " + f.message;
    }
    return out;
  }
  std::vector<Failure> failures_;
};

}  // namespace psmc
