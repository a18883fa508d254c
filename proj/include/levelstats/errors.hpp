#pragma once

#include <stdexcept>
#include <string>

namespace levelstats {

/// Base class for all library errors.
class Error : public std::runtime_error {
  public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Requested dimension exceeds what the chosen code path supports.
class SizeError : public Error {
  public:
    using Error::Error;
};

/// An iterative or dense solver failed to converge.
class SolverError : public Error {
  public:
    using Error::Error;
};

/// Windowed eigensolve terminated with fewer eigenvalues than the inertia
/// count requires.
class IncompleteWindowError : public SolverError {
  public:
    IncompleteWindowError(std::size_t found, std::size_t expected, const std::string& msg)
        : SolverError(msg), found_(found), expected_(expected) {}
    std::size_t found() const { return found_; }
    std::size_t expected() const { return expected_; }

  private:
    std::size_t found_;
    std::size_t expected_;
};

/// A value fell outside the domain of a map (IDOS, counting function, ...).
class DomainError : public Error {
  public:
    using Error::Error;
};

/// Malformed or inconsistent input data (files, tables).
class DataError : public Error {
  public:
    using Error::Error;
};

/// Too few samples or levels for the requested statistic.
class InsufficientDataError : public Error {
  public:
    using Error::Error;
};

/// Invalid configuration or command-line usage.
class ConfigError : public Error {
  public:
    using Error::Error;
};

}  // namespace levelstats
