#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace bandclt {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid user input: malformed config, profile that fails validation,
/// inconsistent band geometry. The CLI maps these to exit code 2.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// An argument outside the mathematical domain of an operation
/// (e.g. a kernel evaluated inside the unit bidisk).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A numerical routine failed on otherwise valid input.
class NumericalError : public Error {
 public:
  using Error::Error;
};

class SpectrumError : public NumericalError {
 public:
  SpectrumError(const std::string& what, std::size_t replicate)
      : NumericalError(what + " (replicate " + std::to_string(replicate) + ")"),
        replicate_(replicate) {}

  std::size_t replicate() const noexcept { return replicate_; }

 private:
  std::size_t replicate_;
};

/// Raised by the Monte Carlo driver when a worker fails; carries how many
/// replicates had completed.
class PartialRunError : public Error {
 public:
  PartialRunError(const std::string& what, std::size_t completed)
      : Error(what + " after " + std::to_string(completed) + " completed replicates"),
        completed_(completed) {}

  std::size_t completed() const noexcept { return completed_; }

 private:
  std::size_t completed_;
};

}  // namespace bandclt
