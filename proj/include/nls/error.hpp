#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace nls {

/// Base of every error thrown by the library. `kind()` selects the CLI exit code.
class Error : public std::runtime_error {
 public:
  enum class Kind { Config, Numerical, Format };

  Error(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

#define NLS_DEFINE_ERROR(Name, K)                                              \
  class Name : public Error {                                                  \
   public:                                                                     \
    explicit Name(const std::string& what) : Error(Kind::K, #Name ": " + what) {} \
  };

NLS_DEFINE_ERROR(InvalidParams, Config)
NLS_DEFINE_ERROR(ConfigError, Config)
NLS_DEFINE_ERROR(GridMismatch, Config)
NLS_DEFINE_ERROR(PreconditionError, Config)
NLS_DEFINE_ERROR(NonConvergence, Numerical)
NLS_DEFINE_ERROR(ResolutionError, Numerical)
NLS_DEFINE_ERROR(BracketError, Numerical)
NLS_DEFINE_ERROR(ConstructionFailed, Numerical)
NLS_DEFINE_ERROR(NonFinite, Numerical)
NLS_DEFINE_ERROR(ZeroMass, Numerical)

#undef NLS_DEFINE_ERROR

/// Malformed checkpoint; carries the byte offset where parsing stopped.
class FormatError : public Error {
 public:
  FormatError(const std::string& what, std::size_t offset)
      : Error(Kind::Format, "FormatError at byte " + std::to_string(offset) + ": " + what),
        offset_(offset) {}
  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

class UnsupportedVersion : public FormatError {
 public:
  UnsupportedVersion(unsigned version, std::size_t offset)
      : FormatError("unsupported checkpoint version " + std::to_string(version), offset),
        version_(version) {}
  unsigned version() const noexcept { return version_; }

 private:
  unsigned version_;
};

}  // namespace nls
