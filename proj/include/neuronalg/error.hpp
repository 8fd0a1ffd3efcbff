#pragma once

#include <stdexcept>
#include <string>

namespace nalg {

enum class ErrorCode {
  InvalidParameter = 1,
  InvalidPolicy,
  ShapeError,
  CalibrationError,
  DegenerateHistogram,
  EmptyForeground,
  EmptyMarkers,
  EmptyLabelMap,
  UnknownLabel,
  EmptyRegion,
  IoError,
  DecodeError,
  DatasetFormatError,
  EmptyDataset,
  ConfigError,
};

const char* to_string(ErrorCode code) noexcept;

// Every failure raised by the library carries one of the codes above so the
// C layer can translate it without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
  throw Error(code, std::string(to_string(code)) + ": " + what);
}

}  // namespace nalg
