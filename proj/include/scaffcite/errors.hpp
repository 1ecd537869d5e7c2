#pragma once

#include <stdexcept>
#include <string>

namespace scaffcite {

// Base class for all toolkit errors.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Tensor shape disagreement; the message names both shapes.
struct DimensionError : Error {
  using Error::Error;
};

// A caller broke an API precondition.
struct ContractError : Error {
  using Error::Error;
};

// Input is structurally readable but semantically invalid (unknown label,
// missing instance id, mismatched sidecar length).
struct DataError : Error {
  using Error::Error;
};

// Input file is malformed; the message carries a line number where known.
struct FormatError : Error {
  using Error::Error;
};

}  // namespace scaffcite
