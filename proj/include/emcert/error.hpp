#pragma once

#include <stdexcept>
#include <string>

namespace emcert {

enum class ErrorCode {
  DimensionMismatch,
  BasisExpansion,
  GroupConstraint,
  Evaluation,
  NonConvergence,
  InvariantProduct,
  Structure,
  OutOfNeighborhood,
  BlowUp,
  StepFailure,
  UnknownSystem,
  Parameter,
  Usage,
};

inline const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::DimensionMismatch: return "dimension_mismatch";
    case ErrorCode::BasisExpansion: return "basis_expansion";
    case ErrorCode::GroupConstraint: return "group_constraint";
    case ErrorCode::Evaluation: return "evaluation";
    case ErrorCode::NonConvergence: return "non_convergence";
    case ErrorCode::InvariantProduct: return "invariant_product";
    case ErrorCode::Structure: return "structure";
    case ErrorCode::OutOfNeighborhood: return "out_of_neighborhood";
    case ErrorCode::BlowUp: return "blow_up";
    case ErrorCode::StepFailure: return "step_failure";
    case ErrorCode::UnknownSystem: return "unknown_system";
    case ErrorCode::Parameter: return "parameter";
    case ErrorCode::Usage: return "usage";
  }
  return "unknown";
}

/// Structured error carrying a machine-readable code alongside the message.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Thrown by the relative-equilibrium solver; keeps the best residual reached.
class NonConvergenceError : public Error {
 public:
  NonConvergenceError(const std::string& what, double best_residual)
      : Error(ErrorCode::NonConvergence, what), best_residual_(best_residual) {}

  double best_residual() const noexcept { return best_residual_; }

 private:
  double best_residual_;
};

/// Thrown when a numerical evaluation produces a non-finite value.
class EvaluationError : public Error {
 public:
  EvaluationError(const std::string& what, int index)
      : Error(ErrorCode::Evaluation, what + " (coordinate " + std::to_string(index) + ")"),
        index_(index) {}

  int index() const noexcept { return index_; }

 private:
  int index_;
};

}  // namespace emcert
