#pragma once

#include <stdexcept>

namespace zspad {

// Error taxonomy shared by all modules. The CLI maps each family to a
// distinct exit code (see tools/zspad.cpp and the README).

struct ArgumentError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Malformed file header / unsupported variant.
struct FormatError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Structurally valid header but damaged or truncated payload.
struct CorruptionError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ManifestError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A PA (or unlabeled) volume reached a bonafide-only stage.
struct ZeroPaViolation : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Training loss became non-finite.
struct DivergenceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Score-set statistics cannot normalize (m_max == m_bar or s_max == s_bar).
struct CalibrationDegenerateError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A Gaussian with zero standard deviation where a density is required.
struct DegenerateDensityError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct IncompatibleCheckpointError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace zspad
