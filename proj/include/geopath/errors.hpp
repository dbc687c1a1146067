#pragma once

#include <stdexcept>
#include <string>

namespace geopath {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An argument violates an operation's precondition.
class InvalidInput : public Error {
 public:
  using Error::Error;
};

/// A configuration (ensemble parameters, solver bounds, experiment file) is invalid.
/// `key_path` names the offending entry when it comes from a config document.
class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& message, std::string key_path = {})
      : Error(key_path.empty() ? message : key_path + ": " + message), key_path_(std::move(key_path)) {}

  const std::string& key_path() const noexcept { return key_path_; }

 private:
  std::string key_path_;
};

/// A value lies outside the mathematical domain of a formula (e.g. negative curvature under a square root).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Integration produced a non-finite state.
class DivergenceError : public Error {
 public:
  DivergenceError(const std::string& message, double tau) : Error(message), tau_(tau) {}

  double tau() const noexcept { return tau_; }

 private:
  double tau_;
};

/// A numerical method cannot produce a trustworthy answer for the given discretization
/// (undersampled phase, phase unwrap across a node).
class DiagnosticError : public Error {
 public:
  using Error::Error;
};

}  // namespace geopath
