#pragma once

#include <stdexcept>
#include <string>

namespace qelab {

/// Rejected input: violated precondition, malformed file or config.
class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A configured compute or memory budget would be exceeded.
class BudgetExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A numerical invariant was checked and found violated.
class InvariantViolation : public std::runtime_error {
 public:
  InvariantViolation(std::string invariant, const std::string& detail)
      : std::runtime_error(invariant + ": " + detail), invariant_(std::move(invariant)) {}
  const std::string& invariant() const { return invariant_; }

 private:
  std::string invariant_;
};

/// Process exit status for an error escaping a command: 2 for invalid input,
/// 3 for exceeded compute budgets, 4 for numerical invariant violations and 1
/// for anything else.
inline int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const InvalidInput*>(&e)) return 2;
  if (dynamic_cast<const BudgetExceeded*>(&e)) return 3;
  if (dynamic_cast<const InvariantViolation*>(&e)) return 4;
  return 1;
}

}  // namespace qelab
