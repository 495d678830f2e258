#pragma once

#include <stdexcept>
#include <string>

namespace tpump {

/// Broad failure classes. The CLI maps them onto exit codes.
enum class ErrorKind {
  config,     // malformed or ambiguous input
  validation, // a precondition on numerical input was violated
  physics,    // gap closed, degenerate band, wraparound, no peak
  numerical,  // unitarity or trace drift beyond tolerance
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

struct ConfigError : Error {
  explicit ConfigError(const std::string& w) : Error(ErrorKind::config, w) {}
};
struct ValidationError : Error {
  explicit ValidationError(const std::string& w) : Error(ErrorKind::validation, w) {}
};
struct RangeError : Error {
  explicit RangeError(const std::string& w) : Error(ErrorKind::validation, w) {}
};

struct PhysicsError : Error {
  explicit PhysicsError(const std::string& w) : Error(ErrorKind::physics, w) {}
};
struct GapClosedError : PhysicsError {
  using PhysicsError::PhysicsError;
};
struct DegenerateBandError : PhysicsError {
  using PhysicsError::PhysicsError;
};
struct IllConditionedLoopError : PhysicsError {
  using PhysicsError::PhysicsError;
};
struct WraparoundError : PhysicsError {
  using PhysicsError::PhysicsError;
};
struct NoPeakError : PhysicsError {
  using PhysicsError::PhysicsError;
};
struct GaugeError : PhysicsError {
  using PhysicsError::PhysicsError;
};

struct NumericalError : Error {
  explicit NumericalError(const std::string& w) : Error(ErrorKind::numerical, w) {}
};

}  // namespace tpump
