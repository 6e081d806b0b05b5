#pragma once

#include <stdexcept>
#include <string>

namespace pbf {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Geometry or parameter combination that cannot be built.
class InvalidParams : public Error {
 public:
  using Error::Error;
};

/// Binary operation on filters built with different parameters or seeds.
class ParamsMismatch : public Error {
 public:
  using Error::Error;
};

/// Operation not defined for the filter's variant.
class WrongVariant : public Error {
 public:
  using Error::Error;
};

class FormatError : public Error {
 public:
  using Error::Error;
};
class BadMagic : public FormatError {
 public:
  BadMagic() : FormatError("bad magic: not a PBF1 filter file") {}
};
class UnsupportedVersion : public FormatError {
 public:
  explicit UnsupportedVersion(const std::string& what) : FormatError(what) {}
};
class LengthMismatch : public FormatError {
 public:
  explicit LengthMismatch(const std::string& what) : FormatError(what) {}
};
class ChecksumMismatch : public FormatError {
 public:
  ChecksumMismatch() : FormatError("CRC32 checksum mismatch") {}
};

/// Rejection sampling ran out of attempts.
class BudgetExhausted : public Error {
 public:
  using Error::Error;
};

}  // namespace pbf
