#pragma once

#include <Eigen/Dense>

namespace nzpc {

// Convex quadratic program in the two-sided row form
//
//   minimize    0.5 x' P x + q' x
//   subject to  l <= A x <= u        (element-wise, entries may be infinite)
//
// Equality rows are expressed with l == u.
struct QpProblem {
  Eigen::MatrixXd hessian;           // P, symmetric positive semidefinite
  Eigen::VectorXd gradient;          // q
  Eigen::MatrixXd constraintMatrix;  // A, one row per constraint
  Eigen::VectorXd lowerBound;        // l, -inf allowed
  Eigen::VectorXd upperBound;        // u, +inf allowed
};

struct QpSettings {
  double tolerance = 1e-6;               // absolute and relative convergence tolerance
  double infeasibilityTolerance = 1e-5;  // certificate tolerance for infeasibility
  int maxIterations = 20000;
  bool polish = true;  // refine the solution with an active-set KKT solve
};

enum class QpStatus {
  Optimal,
  MaxIterations,
  Infeasible,
};

const char* toString(QpStatus status);

struct QpResult {
  Eigen::VectorXd solution;  // x
  Eigen::VectorXd duals;     // multipliers for the rows of A (negative at lower bounds)
  QpStatus status = QpStatus::MaxIterations;
  int iterations = 0;
  double primalResidual = 0.0;  // on the original (unscaled) problem
  double dualResidual = 0.0;
  double objective = 0.0;
  double solveMs = 0.0;
  bool polished = false;
};

// Operator-splitting solver with row equilibration, per-row penalties and an
// optional active-set polish step. Throws std::invalid_argument on malformed
// input (dimension mismatch, asymmetric or indefinite Hessian, NaN data).
// Rows with lowerBound > upperBound certify an empty feasible set and yield
// QpStatus::Infeasible.
QpResult solveQp(const QpProblem& problem, const QpSettings& settings = {});

}  // namespace nzpc
