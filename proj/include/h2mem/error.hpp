#pragma once

#include <stdexcept>
#include <string>

namespace h2mem {

/// Input outside an operation's precondition (bad quantum number, negative time, ...).
class DomainError : public std::domain_error {
 public:
  explicit DomainError(const std::string& what) : std::domain_error(what) {}
};

/// The integrator refused the grid or produced non-finite values.
class SolverError : public std::runtime_error {
 public:
  explicit SolverError(const std::string& what) : std::runtime_error(what) {}
};

/// Malformed configuration, constants file or CSV input.
class InputError : public std::runtime_error {
 public:
  explicit InputError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace h2mem
