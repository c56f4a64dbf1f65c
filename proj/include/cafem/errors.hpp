#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace cafem {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid argument or configuration value (exit code 1 in the CLI).
class InputError : public Error {
 public:
  using Error::Error;
};

/// Malformed text input; carries the 1-based line number.
class ParseError : public InputError {
 public:
  ParseError(std::size_t line, const std::string& what)
      : InputError("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Well-formed input whose contents are inconsistent (bad indices, degenerate cells).
class StructuralError : public InputError {
 public:
  using InputError::InputError;
};

/// Configuration value violating an invariant; carries the dotted key path
/// (e.g. "numerics.dt") so file parsers can point at the offending line.
class ConfigError : public InputError {
 public:
  ConfigError(std::string key, const std::string& what) : InputError(key + ": " + what), key_(std::move(key)) {}
  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

/// Iterative solver hit its iteration cap.
class SolverError : public Error {
 public:
  SolverError(const std::string& what, double residual)
      : Error(what), residual_(residual) {}
  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

/// Non-finite or runaway field detected during time stepping (exit code 2 in the CLI).
class InstabilityError : public Error {
 public:
  InstabilityError(const std::string& what, long step, double time)
      : Error(what), step_(step), time_(time) {}
  long step() const noexcept { return step_; }
  double time() const noexcept { return time_; }

 private:
  long step_;
  double time_;
};

}  // namespace cafem
