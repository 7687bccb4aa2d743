#pragma once

#include <stdexcept>
#include <string>

namespace cvdv {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// State mass beyond the truncated basis exceeds the configured tolerance.
class TruncationError : public Error {
 public:
  using Error::Error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Unknown or duplicate mode label.
class ModeError : public Error {
 public:
  using Error::Error;
};

/// Conditioning event with vanishing probability.
class ZeroProbabilityError : public Error {
 public:
  using Error::Error;
};

/// Zero vector where a normalizable state was required.
class DegenerateStateError : public Error {
 public:
  using Error::Error;
};

class GridCoverageError : public Error {
 public:
  using Error::Error;
};

class NumericalError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace cvdv
