#pragma once

#include <stdexcept>
#include <string>

namespace topam {

/// Bad argument or configuration value supplied by the caller.
class InputError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// A numerical failure during evaluation (singular system, NaN in a field).
class NumericalError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// The reduced stiffness matrix could not be factorized.
class SingularSystemError : public NumericalError {
public:
  SingularSystemError(const std::string& what, long free_dofs)
      : NumericalError(what), free_dofs_(free_dofs) {}

  long free_dofs() const noexcept { return free_dofs_; }

private:
  long free_dofs_;
};

}  // namespace topam
