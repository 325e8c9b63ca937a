#include "nzpc/qp.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace nzpc {

namespace {

constexpr double kSigma = 1e-6;         // x-regularization of the splitting
constexpr double kAlpha = 1.6;          // over-relaxation
constexpr double kRhoEqualityBoost = 1e3;
constexpr double kRhoMin = 1e-6;
constexpr double kRhoMax = 1e6;
constexpr int kCheckInterval = 25;      // residual / adaptation cadence
constexpr double kPolishRegularization = 1e-9;
constexpr int kPolishRefinementSteps = 3;

double infinityNorm(const Eigen::VectorXd& v) {
  return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff();
}

void validate(const QpProblem& p) {
  const Eigen::Index n = p.hessian.rows();
  const Eigen::Index m = p.constraintMatrix.rows();
  if (n == 0) {
    throw std::invalid_argument("qp: problem has no decision variables");
  }
  if (p.hessian.cols() != n) {
    throw std::invalid_argument("qp: hessian must be square");
  }
  if (p.gradient.size() != n) {
    throw std::invalid_argument("qp: gradient size does not match hessian");
  }
  if (m > 0 && p.constraintMatrix.cols() != n) {
    throw std::invalid_argument("qp: constraint matrix column count does not match variables");
  }
  if (p.lowerBound.size() != m || p.upperBound.size() != m) {
    throw std::invalid_argument("qp: bound sizes do not match constraint rows");
  }
  if (!p.hessian.allFinite() || !p.gradient.allFinite() ||
      (m > 0 && !p.constraintMatrix.allFinite())) {
    throw std::invalid_argument("qp: hessian, gradient and constraint matrix must be finite");
  }
  const double hessianScale = std::max(1.0, p.hessian.cwiseAbs().maxCoeff());
  if ((p.hessian - p.hessian.transpose()).cwiseAbs().maxCoeff() > 1e-8 * hessianScale) {
    throw std::invalid_argument("qp: hessian must be symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eigs(p.hessian,
                                                      Eigen::EigenvaluesOnly);
  if (eigs.info() != Eigen::Success) {
    throw std::invalid_argument("qp: hessian factorization failed");
  }
  const Eigen::VectorXd d = eigs.eigenvalues();
  const double dScale = std::max(1.0, d.size() == 0 ? 0.0 : d.cwiseAbs().maxCoeff());
  if (d.size() > 0 && d.minCoeff() < -1e-9 * dScale) {
    throw std::invalid_argument("qp: hessian must be positive semidefinite");
  }
  for (Eigen::Index i = 0; i < m; ++i) {
    if (std::isnan(p.lowerBound[i]) || std::isnan(p.upperBound[i])) {
      throw std::invalid_argument("qp: bounds must not be NaN");
    }
  }
}

// A row with lower > upper is an empty constraint set: certify infeasibility
// directly instead of iterating.
bool hasCrossedBounds(const QpProblem& p) {
  for (Eigen::Index i = 0; i < p.lowerBound.size(); ++i) {
    if (p.lowerBound[i] > p.upperBound[i]) return true;
  }
  return false;
}

struct ScaledProblem {
  Eigen::MatrixXd a;       // row-equilibrated constraint matrix
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;
  Eigen::VectorXd rowScale;  // original row i was divided by rowScale[i]
};

ScaledProblem equilibrateRows(const QpProblem& p) {
  const Eigen::Index m = p.constraintMatrix.rows();
  ScaledProblem s;
  s.a = p.constraintMatrix;
  s.lower = p.lowerBound;
  s.upper = p.upperBound;
  s.rowScale = Eigen::VectorXd::Ones(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    const double norm = m == 0 ? 0.0 : s.a.row(i).cwiseAbs().maxCoeff();
    if (norm > 0.0) {
      s.rowScale[i] = norm;
      s.a.row(i) /= norm;
      if (std::isfinite(s.lower[i])) s.lower[i] /= norm;
      if (std::isfinite(s.upper[i])) s.upper[i] /= norm;
    }
  }
  return s;
}

bool isEqualityRow(double lo, double hi) {
  if (!std::isfinite(lo) || !std::isfinite(hi)) return false;
  const double scale = std::max({1.0, std::abs(lo), std::abs(hi)});
  return (hi - lo) <= 1e-12 * scale;
}

Eigen::VectorXd buildRho(const Eigen::VectorXd& lower, const Eigen::VectorXd& upper,
                         double rhoBar) {
  Eigen::VectorXd rho(lower.size());
  for (Eigen::Index i = 0; i < lower.size(); ++i) {
    rho[i] = isEqualityRow(lower[i], upper[i]) ? rhoBar * kRhoEqualityBoost : rhoBar;
  }
  return rho;
}

// Residuals of the candidate (x, y) on the scaled problem; z is taken as the
// projection of Ax onto the bounds so the pair needs no auxiliary state.
struct Residuals {
  double primal = 0.0;
  double dual = 0.0;
};

Residuals scaledResiduals(const Eigen::MatrixXd& p, const Eigen::VectorXd& q,
                          const ScaledProblem& s, const Eigen::VectorXd& x,
                          const Eigen::VectorXd& y) {
  Residuals r;
  if (s.a.rows() > 0) {
    const Eigen::VectorXd ax = s.a * x;
    const Eigen::VectorXd z = ax.cwiseMax(s.lower).cwiseMin(s.upper);
    r.primal = infinityNorm(ax - z);
    r.dual = infinityNorm(p * x + q + s.a.transpose() * y);
  } else {
    r.dual = infinityNorm(p * x + q);
  }
  return r;
}

// Active-set refinement: re-solve the KKT system restricted to the rows the
// multipliers mark as active, with light regularization and iterative
// refinement. Returns true and overwrites (x, y) only when both residuals
// improve.
bool tryPolish(const Eigen::MatrixXd& p, const Eigen::VectorXd& q, const ScaledProblem& s,
               Eigen::VectorXd& x, Eigen::VectorXd& y) {
  const Eigen::Index n = p.rows();
  const Eigen::Index m = s.a.rows();
  // Multipliers at round-off scale belong to inactive rows; pinning such a
  // row would polish toward the wrong vertex of the constraint set.
  const double activeTol = 1e-10 * std::max(1.0, infinityNorm(y));
  std::vector<Eigen::Index> activeRows;
  std::vector<int> activeSide;  // -1 lower, 0 equality, +1 upper
  std::vector<double> activeTargets;
  for (Eigen::Index i = 0; i < m; ++i) {
    if (isEqualityRow(s.lower[i], s.upper[i])) {
      activeRows.push_back(i);
      activeSide.push_back(0);
      activeTargets.push_back(s.upper[i]);
    } else if (y[i] < -activeTol && std::isfinite(s.lower[i])) {
      activeRows.push_back(i);
      activeSide.push_back(-1);
      activeTargets.push_back(s.lower[i]);
    } else if (y[i] > activeTol && std::isfinite(s.upper[i])) {
      activeRows.push_back(i);
      activeSide.push_back(1);
      activeTargets.push_back(s.upper[i]);
    }
  }
  const Eigen::Index k = static_cast<Eigen::Index>(activeRows.size());
  const Eigen::Index dim = n + k;

  Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(dim, dim);
  kkt.topLeftCorner(n, n) = p;
  Eigen::MatrixXd activeA(k, n);
  Eigen::VectorXd rhs(dim);
  rhs.head(n) = -q;
  for (Eigen::Index r = 0; r < k; ++r) {
    activeA.row(r) = s.a.row(activeRows[static_cast<std::size_t>(r)]);
    rhs[n + r] = activeTargets[static_cast<std::size_t>(r)];
  }
  if (k > 0) {
    kkt.topRightCorner(n, k) = activeA.transpose();
    kkt.bottomLeftCorner(k, n) = activeA;
  }
  Eigen::MatrixXd kktReg = kkt;
  kktReg.topLeftCorner(n, n).diagonal().array() += kPolishRegularization;
  if (k > 0) {
    kktReg.bottomRightCorner(k, k).diagonal().array() -= kPolishRegularization;
  }

  Eigen::PartialPivLU<Eigen::MatrixXd> lu(kktReg);
  Eigen::VectorXd sol = lu.solve(rhs);
  for (int step = 0; step < kPolishRefinementSteps; ++step) {
    const Eigen::VectorXd residual = rhs - kkt * sol;
    sol += lu.solve(residual);
  }
  if (!sol.allFinite()) return false;

  Eigen::VectorXd xCandidate = sol.head(n);
  Eigen::VectorXd yCandidate = Eigen::VectorXd::Zero(m);
  for (Eigen::Index r = 0; r < k; ++r) {
    yCandidate[activeRows[static_cast<std::size_t>(r)]] = sol[n + r];
  }

  // A candidate that solves the pinned system with wrong-signed multipliers
  // is a stationary point of the wrong vertex, not of the original problem:
  // its algebraic residuals can be exactly zero, so the magnitude comparison
  // below would accept it. Enforce the sign conditions explicitly.
  const double signTol = 1e-9 * std::max(1.0, infinityNorm(yCandidate));
  for (Eigen::Index r = 0; r < k; ++r) {
    const double mult = sol[n + r];
    if (activeSide[static_cast<std::size_t>(r)] < 0 && mult > signTol) return false;
    if (activeSide[static_cast<std::size_t>(r)] > 0 && mult < -signTol) return false;
  }

  const Residuals before = scaledResiduals(p, q, s, x, y);
  const Residuals after = scaledResiduals(p, q, s, xCandidate, yCandidate);
  if (std::max(after.primal, after.dual) < std::max(before.primal, before.dual)) {
    x = std::move(xCandidate);
    y = std::move(yCandidate);
    return true;
  }
  return false;
}

// OSQP-style certificate that the change in multipliers proves the constraint
// set empty: A' dy ~ 0 while the support function of the bounds along dy is
// strictly negative. The negativity threshold scales with the magnitude of
// the bounds entering the sum, so round-off leakage through near-null
// directions of A' cannot fake a certificate on a feasible problem.
bool certifiesPrimalInfeasibility(const ScaledProblem& s, const Eigen::VectorXd& deltaY,
                                  double tol) {
  const double norm = infinityNorm(deltaY);
  if (norm <= tol) return false;
  const Eigen::VectorXd direction = deltaY / norm;
  if (infinityNorm(s.a.transpose() * direction) > tol) return false;
  double support = 0.0;
  double boundScale = 1.0;
  for (Eigen::Index i = 0; i < direction.size(); ++i) {
    const double up = std::max(direction[i], 0.0);
    const double down = std::min(direction[i], 0.0);
    if (up > tol && !std::isfinite(s.upper[i])) return false;
    if (down < -tol && !std::isfinite(s.lower[i])) return false;
    if (up > 0.0 && std::isfinite(s.upper[i])) {
      support += s.upper[i] * up;
      boundScale = std::max(boundScale, std::abs(s.upper[i]));
    }
    if (down < 0.0 && std::isfinite(s.lower[i])) {
      support += s.lower[i] * down;
      boundScale = std::max(boundScale, std::abs(s.lower[i]));
    }
  }
  return support <= -tol * boundScale;
}

}  // namespace

const char* toString(QpStatus status) {
  switch (status) {
    case QpStatus::Optimal:
      return "optimal";
    case QpStatus::MaxIterations:
      return "max_iterations";
    case QpStatus::Infeasible:
      return "infeasible";
  }
  return "unknown";
}

QpResult solveQp(const QpProblem& problem, const QpSettings& settings) {
  const auto start = std::chrono::steady_clock::now();
  validate(problem);

  const Eigen::Index n = problem.hessian.rows();
  const Eigen::Index m = problem.constraintMatrix.rows();
  if (hasCrossedBounds(problem)) {
    QpResult result;
    result.status = QpStatus::Infeasible;
    result.solution = Eigen::VectorXd::Zero(n);
    result.duals = Eigen::VectorXd::Zero(m);
    const auto stop = std::chrono::steady_clock::now();
    result.solveMs = std::chrono::duration<double, std::milli>(stop - start).count();
    return result;
  }
  const Eigen::MatrixXd& p = problem.hessian;
  const Eigen::VectorXd& q = problem.gradient;
  const ScaledProblem s = equilibrateRows(problem);

  double rhoBar = 0.1;
  Eigen::VectorXd rho = buildRho(s.lower, s.upper, rhoBar);

  auto factor = [&](const Eigen::VectorXd& penalties) {
    Eigen::MatrixXd reduced = p;
    reduced.diagonal().array() += kSigma;
    if (m > 0) {
      reduced.noalias() += s.a.transpose() * penalties.asDiagonal() * s.a;
    }
    return Eigen::LLT<Eigen::MatrixXd>(reduced);
  };
  Eigen::LLT<Eigen::MatrixXd> llt = factor(rho);
  if (llt.info() != Eigen::Success) {
    throw std::runtime_error("qp: failed to factor the reduced system");
  }

  Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd z =
      m > 0 ? Eigen::VectorXd::Zero(m).cwiseMax(s.lower).cwiseMin(s.upper) : Eigen::VectorXd(0);
  Eigen::VectorXd y = Eigen::VectorXd::Zero(m);
  Eigen::VectorXd yAtLastCheck = y;
  int certificateStreak = 0;  // consecutive checks certifying infeasibility

  QpResult result;
  result.status = QpStatus::MaxIterations;

  const double tol = settings.tolerance;
  int iteration = 0;
  while (iteration < settings.maxIterations) {
    ++iteration;

    Eigen::VectorXd rhs = kSigma * x - q;
    if (m > 0) {
      rhs.noalias() += s.a.transpose() * (rho.cwiseProduct(z) - y);
    }
    const Eigen::VectorXd xTilde = llt.solve(rhs);
    x = kAlpha * xTilde + (1.0 - kAlpha) * x;
    if (m > 0) {
      const Eigen::VectorXd zTilde = s.a * xTilde;
      const Eigen::VectorXd zRelaxed = kAlpha * zTilde + (1.0 - kAlpha) * z;
      const Eigen::VectorXd zNext =
          (zRelaxed + y.cwiseQuotient(rho)).cwiseMax(s.lower).cwiseMin(s.upper);
      y += rho.cwiseProduct(zRelaxed - zNext);
      z = zNext;
    }

    const bool atCheck = (iteration % kCheckInterval == 0) || iteration == settings.maxIterations;
    if (!atCheck) continue;

    const Eigen::VectorXd px = p * x;
    double primal = 0.0;
    double primalScale = 1.0;
    double dualScale = std::max(infinityNorm(px), infinityNorm(q));
    Eigen::VectorXd dualVec = px + q;
    if (m > 0) {
      const Eigen::VectorXd ax = s.a * x;
      const Eigen::VectorXd aty = s.a.transpose() * y;
      primal = infinityNorm(ax - z);
      primalScale = std::max(infinityNorm(ax), infinityNorm(z));
      dualScale = std::max(dualScale, infinityNorm(aty));
      dualVec += aty;
    }
    const double dual = infinityNorm(dualVec);
    const double epsPrimal = tol + tol * primalScale;
    const double epsDual = tol + tol * dualScale;
    if (primal <= epsPrimal && dual <= epsDual) {
      result.status = QpStatus::Optimal;
      break;
    }

    if (m > 0) {
      const Eigen::VectorXd deltaY = y - yAtLastCheck;
      if (certifiesPrimalInfeasibility(s, deltaY, settings.infeasibilityTolerance)) {
        // A transient direction can resemble a certificate while the iterates
        // are still moving; require two consecutive windows to agree.
        if (++certificateStreak >= 2) {
          result.status = QpStatus::Infeasible;
          break;
        }
      } else {
        certificateStreak = 0;
      }
      yAtLastCheck = y;

      const double primalRel = primal / std::max(primalScale, 1e-12);
      const double dualRel = dual / std::max(dualScale, 1e-12);
      if (primalRel > 0.0 && dualRel > 0.0) {
        const double ratio = std::sqrt(primalRel / dualRel);
        if (ratio > 5.0 || ratio < 0.2) {
          rhoBar = std::clamp(rhoBar * ratio, kRhoMin, kRhoMax);
          rho = buildRho(s.lower, s.upper, rhoBar);
          llt = factor(rho);
          if (llt.info() != Eigen::Success) {
            throw std::runtime_error("qp: failed to refactor after penalty update");
          }
        }
      }
    }
  }
  result.iterations = iteration;

  if (result.status == QpStatus::Optimal && settings.polish && m > 0) {
    result.polished = tryPolish(p, q, s, x, y);
  }

  result.solution = x;
  result.duals = Eigen::VectorXd(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    result.duals[i] = y[i] / s.rowScale[i];
  }
  result.objective = 0.5 * x.dot(p * x) + q.dot(x);

  // Report residuals against the original, unscaled problem.
  if (m > 0) {
    const Eigen::VectorXd ax = problem.constraintMatrix * x;
    double violation = 0.0;
    for (Eigen::Index i = 0; i < m; ++i) {
      if (std::isfinite(problem.lowerBound[i])) {
        violation = std::max(violation, problem.lowerBound[i] - ax[i]);
      }
      if (std::isfinite(problem.upperBound[i])) {
        violation = std::max(violation, ax[i] - problem.upperBound[i]);
      }
    }
    result.primalResidual = violation;
    result.dualResidual =
        infinityNorm(p * x + q + problem.constraintMatrix.transpose() * result.duals);
  } else {
    result.dualResidual = infinityNorm(p * x + q);
  }

  const auto stop = std::chrono::steady_clock::now();
  result.solveMs = std::chrono::duration<double, std::milli>(stop - start).count();
  return result;
}

}  // namespace nzpc
