#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace gaitref {

// Error taxonomy. The CLI maps these onto process exit codes:
// ConfigError -> 2, FormatError -> 3, ProtocolError -> 4, anything else -> 1.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Shape or axis mismatch in a tensor operation.
struct DimensionError : Error {
  using Error::Error;
};

// An API precondition was violated (non-scalar loss, missing feature, ...).
struct ContractError : Error {
  using Error::Error;
};

// Bad user-supplied configuration value.
struct ConfigError : Error {
  using Error::Error;
};

// Numerically degenerate input (e.g. zero vertical extent).
struct DegenerateInputError : Error {
  using Error::Error;
};

// Evaluation protocol violation (e.g. probe without gallery positives).
struct ProtocolError : Error {
  using Error::Error;
};

// Malformed file contents; carries the byte offset of the defect.
struct FormatError : Error {
  std::size_t byte_offset;
  FormatError(const std::string& msg, std::size_t offset)
      : Error(msg + " (byte " + std::to_string(offset) + ")"), byte_offset(offset) {}
};

}  // namespace gaitref
