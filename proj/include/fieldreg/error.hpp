#pragma once

#include <stdexcept>
#include <string>

namespace fieldreg {

/// Error classes raised by the library. Each class maps onto one process
/// exit code of the command-line tool (see `exit_code`).
enum class ErrorCode {
  kIo,                          // unreadable/unwritable file
  kParse,                       // malformed file contents
  kSchema,                      // well-formed file missing a required field
  kEmptyCloud,                  // zero points where at least one is needed
  kValidation,                  // non-finite or out-of-range values
  kInvalidArgument,             // bad parameter value or unknown key
  kDegenerateBounds,            // zero-area rasterization rectangle
  kGeotagMismatch,              // geotags too far apart to overlap
  kInsufficientOverlap,         // maps share less than one seed cell
  kInsufficientCorrespondences, // fewer than 4 usable matches
  kRankDeficient,               // unobservable transform parameter
  kDivergence,                  // non-finite solver state
  kEmptyVegetation,             // ExG filter removed every point
};

const char* to_string(ErrorCode code);

/// Process exit code for an error class: 2 IO/usage, 3 overlap or
/// correspondences, 4 solver, 5 empty vegetation.
int exit_code(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  Error(ErrorCode code, std::string stage, const std::string& message)
      : std::runtime_error(stage + ": " + message), code_(code), stage_(std::move(stage)) {}

  ErrorCode code() const noexcept { return code_; }

  /// Pipeline stage that raised the error, empty outside `register_maps`.
  const std::string& stage() const noexcept { return stage_; }

 private:
  ErrorCode code_;
  std::string stage_;
};

}  // namespace fieldreg
