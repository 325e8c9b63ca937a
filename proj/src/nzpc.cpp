#include "nzpc/nzpc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <utility>

namespace nzpc {

namespace {

constexpr double kNestingTol = 1e-12;

void requireSize(const Eigen::VectorXd& v, Eigen::Index size, const char* name) {
  if (v.size() != size) {
    std::ostringstream msg;
    msg << "nzpc: " << name << " has size " << v.size() << ", expected " << size;
    throw std::invalid_argument(msg.str());
  }
}

void requirePositiveDefinite(const Eigen::MatrixXd& m, Eigen::Index size, const char* name) {
  if (m.rows() != size || m.cols() != size) {
    std::ostringstream msg;
    msg << "nzpc: " << name << " must be " << size << "x" << size << ", got " << m.rows() << "x"
        << m.cols();
    throw std::invalid_argument(msg.str());
  }
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale) {
    throw std::invalid_argument(std::string("nzpc: ") + name + " must be symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(m);
  if (eig.info() != Eigen::Success || eig.eigenvalues().minCoeff() <= 0.0) {
    throw std::invalid_argument(std::string("nzpc: ") + name + " must be positive definite");
  }
}

// Input-constraint encodings in the QP.
enum class InputEncoding {
  Point,    // no generators: u_k = center
  Box,      // axis-aligned generators: bounds on u_k directly
  General,  // arbitrary generators: u_k = c + G beta_u with an aux beta_u block
};

InputEncoding classifyInputSet(const Zonotope& set) {
  if (set.generatorCount() == 0) return InputEncoding::Point;
  if (set.generatorCount() != set.dim()) return InputEncoding::General;
  for (Eigen::Index j = 0; j < set.generatorCount(); ++j) {
    for (Eigen::Index i = 0; i < set.dim(); ++i) {
      if (i != j && set.generators()(i, j) != 0.0) return InputEncoding::General;
    }
  }
  return InputEncoding::Box;
}

Eigen::VectorXd rowAbsSum(const Eigen::MatrixXd& m) {
  return m.cwiseAbs().rowwise().sum();
}

}  // namespace

const Zonotope& inputConstraintAt(const NzpcConfig& config, int step) {
  const auto it = config.inputConstraintOverrides.find(step);
  return it == config.inputConstraintOverrides.end() ? config.inputConstraint : it->second;
}

IntervalVector outputConstraintAt(const NzpcConfig& config, int step) {
  const auto it = config.outputConstraintOverrides.find(step);
  if (it != config.outputConstraintOverrides.end()) return it->second;
  return IntervalVector(config.outputLower, config.outputUpper);
}

void validateNzpcConfig(const NzpcConfig& config, const PlantDimensions& dims) {
  if (config.horizon < 1) {
    throw std::invalid_argument("nzpc: horizon must be at least 1");
  }
  if (config.steps < 0) {
    throw std::invalid_argument("nzpc: steps must be non-negative");
  }
  requirePositiveDefinite(config.outputWeight, dims.outputDim, "output weight");
  requirePositiveDefinite(config.inputWeight, dims.inputDim, "input weight");
  requireSize(config.outputReference, dims.outputDim, "output reference");
  requireSize(config.inputReference, dims.inputDim, "input reference");
  requireSize(config.outputLower, dims.outputDim, "output lower bound");
  requireSize(config.outputUpper, dims.outputDim, "output upper bound");
  if (config.outputLower.hasNaN() || config.outputUpper.hasNaN() ||
      (config.outputLower.array() > config.outputUpper.array()).any()) {
    throw std::invalid_argument("nzpc: output bounds must be NaN-free with lower <= upper");
  }

  if (config.reach.inputSet.dim() != dims.inputDim) {
    throw std::invalid_argument("nzpc: reach input set dimension must match the input");
  }
  if (config.reach.measurementNoise.dim() != dims.outputDim) {
    throw std::invalid_argument("nzpc: measurement noise dimension must match the output");
  }
  if (config.reach.processNoise.dim() != dims.stateDim) {
    throw std::invalid_argument("nzpc: process noise dimension must match the state");
  }
  requireSize(config.reach.lipschitz, dims.stateDim, "Lipschitz bound");
  if ((config.reach.lipschitz.array() < 0.0).any() || config.reach.coveringRadius < 0.0) {
    throw std::invalid_argument("nzpc: Lipschitz bounds and covering radius must be non-negative");
  }
  if (config.reach.epsilonOverride && config.reach.epsilonOverride->dim() != dims.outputDim) {
    throw std::invalid_argument("nzpc: epsilon override dimension must match the output");
  }
  if (config.initialStateSet.dim() != 0 && config.initialStateSet.dim() != dims.stateDim) {
    throw std::invalid_argument("nzpc: initial state set dimension must match the state");
  }

  // Admissible inputs must stay inside the input set the learning phase uses
  // (interval-wise nesting check).
  const IntervalVector inputHull = toInterval(config.reach.inputSet);
  auto checkNested = [&](const Zonotope& set, const char* name) {
    if (set.dim() != dims.inputDim) {
      throw std::invalid_argument(std::string("nzpc: ") + name +
                                  " dimension must match the input");
    }
    if (!inputHull.contains(toInterval(set), kNestingTol)) {
      throw std::invalid_argument(std::string("nzpc: ") + name +
                                  " must be contained in the learning input set");
    }
  };
  checkNested(config.inputConstraint, "input constraint");
  for (const auto& [step, set] : config.inputConstraintOverrides) {
    checkNested(set, "input constraint override");
  }
  for (const auto& [step, bounds] : config.outputConstraintOverrides) {
    if (bounds.dim() != dims.outputDim) {
      throw std::invalid_argument("nzpc: output constraint override dimension mismatch");
    }
  }
}

Eigen::VectorXd AffinePredictor::centerAt(int k,
                                          const std::vector<Eigen::VectorXd>& inputs) const {
  if (k < 0 || k >= horizon()) {
    throw std::invalid_argument("nzpc: predictor step index out of range");
  }
  const PredictorStep& step = steps[static_cast<std::size_t>(k)];
  if (inputs.size() < step.centerGains.size()) {
    throw std::invalid_argument("nzpc: not enough inputs for the requested predictor step");
  }
  Eigen::VectorXd center = step.centerOffset;
  for (std::size_t j = 0; j < step.centerGains.size(); ++j) {
    center += step.centerGains[j] * inputs[j];
  }
  return center;
}

AffinePredictor buildPredictor(const LinearizedModel& model, const Zonotope& mismatchBound,
                               const Zonotope& coverageBound, const Zonotope& initialOutputSet,
                               int horizon, const ReachConfig& config,
                               const PlantDimensions& dims) {
  if (horizon < 1) {
    throw std::invalid_argument("nzpc: predictor horizon must be at least 1");
  }
  if (initialOutputSet.dim() != dims.outputDim) {
    throw std::invalid_argument("nzpc: initial output set dimension must match the output");
  }

  const Eigen::MatrixXd hPinv = pseudoRightInverse(dims.outputMap);
  const Eigen::MatrixXd slack =
      dims.stateBound * (Eigen::MatrixXd::Identity(dims.stateDim, dims.stateDim) -
                         hPinv * dims.outputMap);
  const Eigen::MatrixXd aHat = model.stateMatrix();
  const Eigen::MatrixXd bHat = model.inputMatrix();
  const Eigen::VectorXd xStar = model.point.stateAnchor(dims);
  const Eigen::VectorXd vCenter = config.measurementNoise.center();
  const Eigen::MatrixXd& vGens = config.measurementNoise.generators();
  const Eigen::MatrixXd wGensMapped = dims.outputMap * config.processNoise.generators();

  // Input-independent part added at every recursion step:
  //   m0 - A x* - B u* + c_v + H c_w + c_L + c_eps.
  const Eigen::VectorXd stepConstant =
      model.offset() - aHat * xStar - bHat * model.point.inputCenter + vCenter +
      dims.outputMap * config.processNoise.center() + mismatchBound.center() +
      coverageBound.center();

  AffinePredictor predictor;
  predictor.inputDim = dims.inputDim;
  predictor.outputDim = dims.outputDim;
  predictor.steps.reserve(static_cast<std::size_t>(horizon));

  Eigen::VectorXd prevConst = initialOutputSet.center();
  Eigen::MatrixXd prevGens = initialOutputSet.generators();
  std::vector<Eigen::MatrixXd> prevGains;

  for (int k = 0; k < horizon; ++k) {
    // Measurement-consistent state enclosure of the previous output set:
    // center hPinv (c_y - c_v), generators [hPinv G_y, -hPinv G_v, eta slack].
    Eigen::MatrixXd stateGens(dims.stateDim, prevGens.cols() + vGens.cols() + dims.stateDim);
    stateGens << hPinv * prevGens, -hPinv * vGens, slack;

    PredictorStep step;
    step.centerOffset = stepConstant + aHat * (hPinv * (prevConst - vCenter));
    step.centerGains.reserve(prevGains.size() + 1);
    for (const Eigen::MatrixXd& gain : prevGains) {
      step.centerGains.push_back(aHat * (hPinv * gain));
    }
    step.centerGains.push_back(bHat);

    step.generators.resize(dims.outputDim, stateGens.cols() + vGens.cols() + wGensMapped.cols() +
                                               mismatchBound.generatorCount() +
                                               coverageBound.generatorCount());
    step.generators << aHat * stateGens, vGens, wGensMapped, mismatchBound.generators(),
        coverageBound.generators();
    step.halfWidths = rowAbsSum(step.generators);

    prevConst = step.centerOffset;
    prevGens = step.generators;
    prevGains = step.centerGains;
    predictor.steps.push_back(std::move(step));
  }
  return predictor;
}

AssembledQp assembleQp(const AffinePredictor& predictor, const NzpcConfig& config,
                       int stepIndex) {
  const int horizon = predictor.horizon();
  if (horizon != config.horizon) {
    throw std::invalid_argument("nzpc: predictor horizon does not match the configuration");
  }
  const Eigen::Index nu = predictor.inputDim;
  const Eigen::Index ny = predictor.outputDim;
  constexpr double inf = std::numeric_limits<double>::infinity();

  // Variable layout.
  QpLayout layout;
  layout.horizon = horizon;
  layout.inputDim = nu;
  Eigen::Index vars = static_cast<Eigen::Index>(horizon) * nu;
  layout.betaOffset.resize(static_cast<std::size_t>(horizon));
  layout.betaCount.resize(static_cast<std::size_t>(horizon));
  for (int k = 0; k < horizon; ++k) {
    layout.betaOffset[static_cast<std::size_t>(k)] = vars;
    layout.betaCount[static_cast<std::size_t>(k)] =
        predictor.steps[static_cast<std::size_t>(k)].generators.cols();
    vars += layout.betaCount[static_cast<std::size_t>(k)];
  }
  layout.auxOffset.assign(static_cast<std::size_t>(horizon), 0);
  layout.auxCount.assign(static_cast<std::size_t>(horizon), 0);
  std::vector<InputEncoding> encodings(static_cast<std::size_t>(horizon));
  for (int k = 0; k < horizon; ++k) {
    const Zonotope& set = inputConstraintAt(config, stepIndex + k);
    encodings[static_cast<std::size_t>(k)] = classifyInputSet(set);
    if (encodings[static_cast<std::size_t>(k)] == InputEncoding::General) {
      layout.auxOffset[static_cast<std::size_t>(k)] = vars;
      layout.auxCount[static_cast<std::size_t>(k)] = set.generatorCount();
      vars += set.generatorCount();
    }
  }
  layout.variableCount = vars;

  // Cost: sum_k (y_{k+1} - y_ref)' Q (y_{k+1} - y_ref) + (u_k - u_ref)' R (u_k - u_ref)
  // written as 0.5 z' P z + q' z (+ constant).
  QpProblem problem;
  problem.hessian = Eigen::MatrixXd::Zero(vars, vars);
  problem.gradient = Eigen::VectorXd::Zero(vars);
  for (int k = 0; k < horizon; ++k) {
    const PredictorStep& step = predictor.steps[static_cast<std::size_t>(k)];
    Eigen::MatrixXd outputMapRows = Eigen::MatrixXd::Zero(ny, vars);
    for (std::size_t j = 0; j < step.centerGains.size(); ++j) {
      outputMapRows.middleCols(static_cast<Eigen::Index>(j) * nu, nu) = step.centerGains[j];
    }
    outputMapRows.middleCols(layout.betaOffset[static_cast<std::size_t>(k)],
                             layout.betaCount[static_cast<std::size_t>(k)]) = step.generators;
    const Eigen::VectorXd shift = step.centerOffset - config.outputReference;
    problem.hessian.noalias() +=
        2.0 * outputMapRows.transpose() * config.outputWeight * outputMapRows;
    problem.gradient.noalias() += 2.0 * outputMapRows.transpose() * (config.outputWeight * shift);

    const Eigen::Index uOffset = layout.inputOffset(k);
    problem.hessian.block(uOffset, uOffset, nu, nu) += 2.0 * config.inputWeight;
    problem.gradient.segment(uOffset, nu) -= 2.0 * config.inputWeight * config.inputReference;
  }

  // Constraint rows: beta boxes, tightened output intervals, input sets.
  Eigen::Index rows = 0;
  for (int k = 0; k < horizon; ++k) {
    rows += layout.betaCount[static_cast<std::size_t>(k)];   // ||beta_k||_inf <= 1
    rows += ny;                                              // tightened output interval
    rows += nu;                                              // input equality or box
    rows += layout.auxCount[static_cast<std::size_t>(k)];    // ||beta_u||_inf <= 1
  }
  problem.constraintMatrix = Eigen::MatrixXd::Zero(rows, vars);
  problem.lowerBound = Eigen::VectorXd::Zero(rows);
  problem.upperBound = Eigen::VectorXd::Zero(rows);

  Eigen::Index row = 0;
  for (int k = 0; k < horizon; ++k) {
    const std::size_t ks = static_cast<std::size_t>(k);
    const PredictorStep& step = predictor.steps[ks];

    for (Eigen::Index i = 0; i < layout.betaCount[ks]; ++i) {
      problem.constraintMatrix(row, layout.betaOffset[ks] + i) = 1.0;
      problem.lowerBound[row] = -1.0;
      problem.upperBound[row] = 1.0;
      ++row;
    }

    // Interval hull of the predicted set inside the output bounds:
    //   lower + dg <= center_k(u) <= upper - dg.
    const IntervalVector bounds = outputConstraintAt(config, stepIndex + k + 1);
    for (std::size_t j = 0; j < step.centerGains.size(); ++j) {
      problem.constraintMatrix.block(row, static_cast<Eigen::Index>(j) * nu, ny, nu) =
          step.centerGains[j];
    }
    for (Eigen::Index i = 0; i < ny; ++i) {
      const double tighten = step.halfWidths[i];
      problem.lowerBound[row + i] = std::isfinite(bounds.lower[i])
                                        ? bounds.lower[i] + tighten - step.centerOffset[i]
                                        : -inf;
      problem.upperBound[row + i] = std::isfinite(bounds.upper[i])
                                        ? bounds.upper[i] - tighten - step.centerOffset[i]
                                        : inf;
    }
    row += ny;

    const Zonotope& inputSet = inputConstraintAt(config, stepIndex + k);
    const Eigen::Index uOffset = layout.inputOffset(k);
    switch (encodings[ks]) {
      case InputEncoding::Point:
        for (Eigen::Index i = 0; i < nu; ++i) {
          problem.constraintMatrix(row + i, uOffset + i) = 1.0;
          problem.lowerBound[row + i] = inputSet.center()[i];
          problem.upperBound[row + i] = inputSet.center()[i];
        }
        row += nu;
        break;
      case InputEncoding::Box:
        for (Eigen::Index i = 0; i < nu; ++i) {
          const double radius = std::abs(inputSet.generators()(i, i));
          problem.constraintMatrix(row + i, uOffset + i) = 1.0;
          problem.lowerBound[row + i] = inputSet.center()[i] - radius;
          problem.upperBound[row + i] = inputSet.center()[i] + radius;
        }
        row += nu;
        break;
      case InputEncoding::General:
        // u_k - G beta_u = c and ||beta_u||_inf <= 1.
        for (Eigen::Index i = 0; i < nu; ++i) {
          problem.constraintMatrix(row + i, uOffset + i) = 1.0;
          problem.constraintMatrix.block(row + i, layout.auxOffset[ks], 1, layout.auxCount[ks]) =
              -inputSet.generators().row(i);
          problem.lowerBound[row + i] = inputSet.center()[i];
          problem.upperBound[row + i] = inputSet.center()[i];
        }
        row += nu;
        for (Eigen::Index i = 0; i < layout.auxCount[ks]; ++i) {
          problem.constraintMatrix(row, layout.auxOffset[ks] + i) = 1.0;
          problem.lowerBound[row] = -1.0;
          problem.upperBound[row] = 1.0;
          ++row;
        }
        break;
    }
  }

  return AssembledQp{std::move(problem), std::move(layout)};
}

namespace {

// Projects the solver's first input into the admissible set so the applied
// input is feasible exactly (up to floating-point evaluation), not just to
// solver tolerance.
Eigen::VectorXd projectInput(const Eigen::VectorXd& rawInput, const Zonotope& set,
                             const Eigen::VectorXd& auxBeta) {
  switch (classifyInputSet(set)) {
    case InputEncoding::Point:
      return set.center();
    case InputEncoding::Box: {
      Eigen::VectorXd projected = rawInput;
      for (Eigen::Index i = 0; i < set.dim(); ++i) {
        const double radius = std::abs(set.generators()(i, i));
        projected[i] = std::clamp(projected[i], set.center()[i] - radius,
                                  set.center()[i] + radius);
      }
      return projected;
    }
    case InputEncoding::General: {
      const Eigen::VectorXd beta = auxBeta.cwiseMax(-1.0).cwiseMin(1.0);
      return set.center() + set.generators() * beta;
    }
  }
  return rawInput;
}

std::string describeInfeasibility(const AffinePredictor& predictor, const NzpcConfig& config,
                                  int stepIndex, QpStatus status) {
  std::ostringstream msg;
  msg << "qp status " << toString(status) << " at step " << stepIndex;

  // Probe the constraint blocks at the input-center candidate (u_k at the
  // centers of the admissible sets, beta = 0) to point at the culprit rows.
  std::vector<Eigen::VectorXd> centers;
  centers.reserve(static_cast<std::size_t>(predictor.horizon()));
  for (int k = 0; k < predictor.horizon(); ++k) {
    centers.push_back(inputConstraintAt(config, stepIndex + k).center());
  }
  bool found = false;
  for (int k = 0; k < predictor.horizon(); ++k) {
    const Eigen::VectorXd center = predictor.centerAt(k, centers);
    const Eigen::VectorXd& tighten = predictor.steps[static_cast<std::size_t>(k)].halfWidths;
    const IntervalVector bounds = outputConstraintAt(config, stepIndex + k + 1);
    for (Eigen::Index i = 0; i < center.size(); ++i) {
      const double upperSlack = bounds.upper[i] - (center[i] + tighten[i]);
      const double lowerSlack = (center[i] - tighten[i]) - bounds.lower[i];
      if (upperSlack < 0.0) {
        msg << "; output " << i + 1 << " upper bound exceeded by " << -upperSlack
            << " at horizon position " << k + 1 << " (tightening " << tighten[i] << ")";
        found = true;
      }
      if (lowerSlack < 0.0) {
        msg << "; output " << i + 1 << " lower bound exceeded by " << -lowerSlack
            << " at horizon position " << k + 1 << " (tightening " << tighten[i] << ")";
        found = true;
      }
    }
  }
  if (!found) {
    msg << "; no violation at the input-center candidate - infeasibility involves "
           "input-coupled rows";
  }
  return msg.str();
}

}  // namespace

NzpcStepResult nzpcStep(const DataWindow& window, const Eigen::VectorXd& currentOutput,
                        const NzpcConfig& config, const PlantDimensions& dims, int stepIndex) {
  validateNzpcConfig(config, dims);
  requireSize(currentOutput, dims.outputDim, "current output");
  if (window.columns() == 0) {
    throw std::invalid_argument("nzpc: data window is empty");
  }

  // Learning phase, anchored at the current measurement.
  const LinearizationPoint point{currentOutput, config.reach.measurementNoise.center(),
                                 config.reach.inputSet.center()};
  const LinearizedModel model = estimateModel(window, point, config.reach, dims);
  const Zonotope mismatch = computeMismatchBound(window, model, config.reach, dims);
  const Zonotope coverage = computeCoverageBound(config.reach, dims);

  const AffinePredictor predictor =
      buildPredictor(model, mismatch, coverage, Zonotope::point(currentOutput), config.horizon,
                     config.reach, dims);
  AssembledQp assembled = assembleQp(predictor, config, stepIndex);

  NzpcStepResult result;
  result.qp = solveQp(assembled.problem, config.qp);
  if (result.qp.status != QpStatus::Optimal) {
    result.feasible = false;
    result.diagnostics = describeInfeasibility(predictor, config, stepIndex, result.qp.status);
    return result;
  }

  result.feasible = true;
  const Eigen::VectorXd& z = result.qp.solution;
  result.inputSequence.reserve(static_cast<std::size_t>(config.horizon));
  for (int k = 0; k < config.horizon; ++k) {
    result.inputSequence.push_back(z.segment(assembled.layout.inputOffset(k), dims.inputDim));
  }
  result.predictedOutputs.reserve(static_cast<std::size_t>(config.horizon));
  result.reachableSets.reserve(static_cast<std::size_t>(config.horizon));
  for (int k = 0; k < config.horizon; ++k) {
    const std::size_t ks = static_cast<std::size_t>(k);
    const Eigen::VectorXd center = predictor.centerAt(k, result.inputSequence);
    // Clamp the solver's beta iterate into the unit box so the reconstructed
    // point is an exact member of the predicted set, not merely within solver
    // tolerance of one.
    const Eigen::VectorXd beta =
        z.segment(assembled.layout.betaOffset[ks], assembled.layout.betaCount[ks])
            .cwiseMax(-1.0)
            .cwiseMin(1.0);
    result.predictedOutputs.push_back(center +
                                      predictor.steps[ks].generators * beta);
    result.reachableSets.emplace_back(center, predictor.steps[ks].generators);
  }

  const Zonotope& firstInputSet = inputConstraintAt(config, stepIndex);
  const Eigen::VectorXd auxBeta =
      assembled.layout.auxCount[0] > 0
          ? Eigen::VectorXd(z.segment(assembled.layout.auxOffset[0], assembled.layout.auxCount[0]))
          : Eigen::VectorXd(0);
  result.input = projectInput(result.inputSequence[0], firstInputSet, auxBeta);
  return result;
}

int ClosedLoopLog::violationCount() const {
  int count = 0;
  for (const ClosedLoopRecord& record : records) {
    count += record.outputViolation ? 1 : 0;
    count += record.inputViolation ? 1 : 0;
  }
  count += finalOutputViolation ? 1 : 0;
  return count;
}

bool ClosedLoopLog::anyInfeasible() const {
  if (aborted) return true;
  for (const ClosedLoopRecord& record : records) {
    if (record.qpStatus != QpStatus::Optimal) return true;
  }
  return false;
}

ClosedLoopLog runClosedLoop(PlantSimulator& plant, const NzpcConfig& config,
                            const DataWindow& initialWindow, std::uint64_t seed) {
  const PlantDimensions& dims = plant.dims();
  validateNzpcConfig(config, dims);
  if (config.initialStateSet.dim() != dims.stateDim) {
    throw std::invalid_argument("nzpc: closed loop requires an initial state set");
  }
  if (initialWindow.columns() == 0) {
    throw std::invalid_argument("nzpc: closed loop requires a non-empty data window");
  }

  plant.reseed(seed);
  DataWindow window = initialWindow;
  ClosedLoopLog log;

  Eigen::VectorXd x = sampleInZonotope(config.initialStateSet, plant.rng());
  Eigen::VectorXd y = plant.measure(x);
  Eigen::VectorXd lastInput;

  for (int t = 0; t < config.steps; ++t) {
    if (!x.allFinite() || x.cwiseAbs().maxCoeff() > dims.stateBound) {
      std::ostringstream msg;
      msg << "state bound ||x||_inf <= " << dims.stateBound << " violated at step " << t;
      log.aborted = true;
      log.abortStep = t;
      log.abortReason = msg.str();
      break;
    }

    const NzpcStepResult stepResult = nzpcStep(window, y, config, dims, t);
    ClosedLoopRecord record;
    record.step = t;
    record.output = y;
    record.qpStatus = stepResult.qp.status;
    record.qpIterations = stepResult.qp.iterations;
    record.solveMs = stepResult.qp.solveMs;

    Eigen::VectorXd input;
    if (stepResult.feasible) {
      input = stepResult.input;
      const IntervalVector hull = toInterval(stepResult.reachableSets.front());
      record.hullLower = hull.lower;
      record.hullUpper = hull.upper;
      record.predictedSets = stepResult.reachableSets;
    } else if (config.fallbackHoldInput && lastInput.size() > 0) {
      input = lastInput;
      record.fallbackUsed = true;
      record.hullLower =
          Eigen::VectorXd::Constant(dims.outputDim, std::numeric_limits<double>::quiet_NaN());
      record.hullUpper = record.hullLower;
    } else {
      log.aborted = true;
      log.abortStep = t;
      log.abortReason =
          stepResult.diagnostics.empty() ? "qp infeasible" : stepResult.diagnostics;
      break;
    }

    record.input = input;
    record.outputViolation = !outputConstraintAt(config, t).contains(y);
    record.inputViolation = !containsPoint(inputConstraintAt(config, t), input).contained();
    log.records.push_back(std::move(record));

    const Eigen::VectorXd xNext = plant.step(x, input);
    const Eigen::VectorXd yNext = plant.measure(xNext);
    window = slideWindow(window, input, y, yNext);
    x = xNext;
    y = yNext;
    lastInput = input;
  }

  if (!log.aborted) {
    log.finalOutput = y;
    log.finalOutputViolation = !outputConstraintAt(config, config.steps).contains(y);
  }
  return log;
}

}  // namespace nzpc
