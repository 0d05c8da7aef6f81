#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace v2i {

/// Precondition or parameter-range violation.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Fixed-point solver could not bracket or converge.
class ConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Analytic and simulated results describe different configurations.
class ConfigMismatchError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or inconsistent scenario file. `line()` is 0 when the error is
/// not tied to a single line (e.g. a cross-key unit violation).
class ScenarioError : public std::runtime_error {
 public:
  ScenarioError(const std::string& what, std::size_t line = 0)
      : std::runtime_error(line ? "line " + std::to_string(line) + ": " + what : what),
        line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

namespace detail {

inline void require(bool ok, const char* what) {
  if (!ok) throw DomainError(what);
}

}  // namespace detail
}  // namespace v2i
