#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace spkr {

enum class Errc {
  ZeroVector,
  DimensionMismatch,
  EmptySet,
  DomainError,
  SingularCovariance,
  InsufficientData,
  DegenerateScatter,
  ConcentrationOverflow,
  EmptyScores,
  RecordingMismatch,
  BadMagic,
  TruncatedFile,
  ParseError,
  InvalidRegion,
  MissingId,
  ModeMismatch,
  NonFinite,
  InvalidArgument,
  IoError,
};

std::string_view to_string(Errc code) noexcept;

// Numerical failures map to a distinct CLI exit status from data errors.
bool is_numerical(Errc code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what) : std::runtime_error(what), code_(code) {}
  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& what) { throw Error(code, what); }

}  // namespace spkr
