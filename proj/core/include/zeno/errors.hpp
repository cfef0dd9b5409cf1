#pragma once

#include <stdexcept>
#include <string>

namespace zeno {

/// Base for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid input: mismatched grids, bad domain parameters, broken
/// preconditions. The optional field names the offending config entry.
class StructuralError : public Error {
 public:
  explicit StructuralError(const std::string& what, std::string field = {})
      : Error(what), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

/// Non-finite values, eigensolver or root-finder failure.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// A step would violate the periodic-embedding wrap-around guard or the
/// limit-order constraint of a reduction plan.
class GuardViolation : public Error {
 public:
  using Error::Error;
};

}  // namespace zeno
