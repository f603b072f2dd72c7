// Error taxonomy shared by all analysis stages. Each error class maps to one
// CLI exit code so scripted callers can tell input problems from analysis limits.
#ifndef TIPS_ERRORS_HPP
#define TIPS_ERRORS_HPP 1

#include <stdexcept>
#include <string>
#include <vector>

namespace tips {

// Malformed input document (bad JSON, missing keys, wrong value types).
struct ParseError : std::runtime_error {
  explicit ParseError(const std::string& what) : std::runtime_error(what) {}
};

// Structurally well-formed input that violates a model invariant. Messages
// name the violated invariant and the offending entity id.
struct ValidationError : std::runtime_error {
  explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

// Work-set growth exceeded a configured cap (trace count, oracle path count).
struct ExplosionError : std::runtime_error {
  explicit ExplosionError(const std::string& what) : std::runtime_error(what) {}
};

// Fixed-point iteration failed to settle within its iteration cap.
struct ConvergenceError : std::runtime_error {
  explicit ConvergenceError(const std::string& what) : std::runtime_error(what) {}
};

// Outcome of a verification pass: empty means the checked property holds.
struct Report {
  std::vector<std::string> violations;

  bool ok() const { return violations.empty(); }
  void add(std::string v) { violations.push_back(std::move(v)); }
  void merge(const Report& other) {
    violations.insert(violations.end(), other.violations.begin(), other.violations.end());
  }
};

namespace exit_code {
inline constexpr int ok = 0;
inline constexpr int failure = 1;       // unexpected error
inline constexpr int parse = 2;
inline constexpr int validation = 3;
inline constexpr int explosion = 4;
inline constexpr int non_convergence = 5;
inline constexpr int verification = 6;
inline constexpr int budget_overrun = 7;
}  // namespace exit_code

}  // namespace tips

#endif
