#include "nzpc/reach.hpp"

#include <Eigen/SVD>

#include <stdexcept>
#include <string>

#include "nzpc/matrix_zonotope.hpp"

namespace nzpc {

namespace {

/// SVD pseudoinverse with a relative singular-value threshold. Reports the
/// numerical rank through `rank`.
Eigen::MatrixXd svdPseudoInverse(const Eigen::MatrixXd& m, double relTol,
                                 Eigen::Index* rank) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(
      m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::VectorXd& sv = svd.singularValues();
  const double cutoff = sv.size() > 0 ? relTol * sv[0] : 0.0;
  Eigen::VectorXd inv = Eigen::VectorXd::Zero(sv.size());
  Eigen::Index r = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    if (sv[i] > cutoff) {
      inv[i] = 1.0 / sv[i];
      ++r;
    }
  }
  if (rank) *rank = r;
  return svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
}

void checkConfig(const ReachConfig& config, const PlantDimensions& dims) {
  if (config.processNoise.dim() != dims.stateDim) {
    throw std::invalid_argument("ReachConfig: process noise dimension");
  }
  if (config.measurementNoise.dim() != dims.outputDim) {
    throw std::invalid_argument("ReachConfig: measurement noise dimension");
  }
  if (config.inputSet.dim() != dims.inputDim) {
    throw std::invalid_argument("ReachConfig: input set dimension");
  }
  if (config.epsilonOverride &&
      config.epsilonOverride->dim() != dims.outputDim) {
    throw std::invalid_argument("ReachConfig: coverage override dimension");
  }
  if (!config.epsilonOverride) {
    if (config.lipschitz.size() != dims.stateDim) {
      throw std::invalid_argument(
          "ReachConfig: lipschitz vector must have one entry per state "
          "dimension");
    }
    if (config.lipschitz.size() > 0 && config.lipschitz.minCoeff() < 0.0) {
      throw std::invalid_argument(
          "ReachConfig: lipschitz constants must be non-negative");
    }
    if (config.coveringRadius < 0.0) {
      throw std::invalid_argument("ReachConfig: covering radius is negative");
    }
  }
  if (!(config.stateBound > 0.0)) {
    throw std::invalid_argument("ReachConfig: state bound must be positive");
  }
}

/// The set Mhat * [1; -Hpinv Zv + slack; 0] appearing in the mismatch bound:
/// the estimation error of recovering states from noisy outputs, pushed
/// through the model coefficients.
Zonotope estimationNoiseTerm(const LinearizedModel& model,
                             const ReachConfig& config,
                             const PlantDimensions& dims) {
  const Eigen::MatrixXd hPinv = pseudoRightInverse(dims.outputMap);
  const Eigen::MatrixXd slack =
      Eigen::MatrixXd::Identity(dims.stateDim, dims.stateDim) -
      hPinv * dims.outputMap;
  const Zonotope stateNoise =
      linearMap(-hPinv, config.measurementNoise) +
      Zonotope(Eigen::VectorXd::Zero(dims.stateDim),
               Eigen::MatrixXd(config.stateBound * slack));
  Zonotope stacked = cartesianProduct(
      Zonotope::point(Eigen::VectorXd::Ones(1)),
      cartesianProduct(stateNoise,
                       Zonotope::point(Eigen::VectorXd::Zero(dims.inputDim))));
  return linearMap(model.coefficients, stacked);
}

}  // namespace

Eigen::VectorXd LinearizationPoint::stateAnchor(
    const PlantDimensions& dims) const {
  return pseudoRightInverse(dims.outputMap) * (outputCenter - noiseCenter);
}

LinearizedModel estimateModel(const DataWindow& window,
                              const LinearizationPoint& point,
                              const ReachConfig& config,
                              const PlantDimensions& dims) {
  checkConfig(config, dims);
  const Eigen::Index t = window.columns();
  if (t < 1) throw std::invalid_argument("estimateModel: empty window");
  if (point.outputCenter.size() != dims.outputDim ||
      point.noiseCenter.size() != dims.outputDim ||
      point.inputCenter.size() != dims.inputDim) {
    throw std::invalid_argument("estimateModel: linearization point dims");
  }

  const Eigen::MatrixXd hPinv = pseudoRightInverse(dims.outputMap);

  // Only the centers of the stacked noise matrix zonotopes enter the
  // least-squares correction.
  const Eigen::MatrixXd processCenter =
      concatNoiseZonotope(config.processNoise, t).center();
  const Eigen::MatrixXd measurementCenter =
      concatNoiseZonotope(config.measurementNoise, t).center();

  const Eigen::MatrixXd corrected =
      window.outputsNext - dims.outputMap * processCenter - measurementCenter;

  Eigen::MatrixXd regressor(1 + dims.stateDim + dims.inputDim, t);
  regressor.row(0).setOnes();
  regressor.middleRows(1, dims.stateDim) =
      hPinv * (window.outputsPrev - point.outputCenter.replicate(1, t));
  regressor.bottomRows(dims.inputDim) =
      window.inputsPrev - point.inputCenter.replicate(1, t);

  Eigen::Index rank = 0;
  const Eigen::MatrixXd pinv = svdPseudoInverse(regressor, 1e-10, &rank);
  if (rank < regressor.rows()) {
    throw std::runtime_error(
        "estimateModel: regressor is rank deficient (numerical rank " +
        std::to_string(rank) + " of " + std::to_string(regressor.rows()) +
        "); the data are not informative enough");
  }

  LinearizedModel model;
  model.coefficients = corrected * pinv;
  model.point = point;
  model.stateDim = dims.stateDim;
  model.inputDim = dims.inputDim;
  return model;
}

Zonotope computeMismatchBound(const DataWindow& window,
                              const LinearizedModel& model,
                              const ReachConfig& config,
                              const PlantDimensions& dims) {
  checkConfig(config, dims);
  const Eigen::Index t = window.columns();
  if (t < 1) throw std::invalid_argument("computeMismatchBound: empty window");

  const Eigen::MatrixXd hPinv = pseudoRightInverse(dims.outputMap);
  const Eigen::VectorXd anchor =
      model.point.outputCenter - model.point.noiseCenter;

  // Per-column residuals against the model *without* the constant column:
  // the interval extremes absorb the offset together with the mismatch.
  Eigen::VectorXd lo = Eigen::VectorXd::Constant(
      dims.outputDim, std::numeric_limits<double>::infinity());
  Eigen::VectorXd hi = Eigen::VectorXd::Constant(
      dims.outputDim, -std::numeric_limits<double>::infinity());
  Eigen::VectorXd lifted(1 + dims.stateDim + dims.inputDim);
  for (Eigen::Index j = 0; j < t; ++j) {
    lifted[0] = 0.0;
    lifted.segment(1, dims.stateDim) =
        hPinv * (window.outputsPrev.col(j) - anchor);
    lifted.tail(dims.inputDim) =
        window.inputsPrev.col(j) - model.point.inputCenter;
    const Eigen::VectorXd residual =
        window.outputsNext.col(j) - model.coefficients * lifted;
    lo = lo.cwiseMin(residual);
    hi = hi.cwiseMax(residual);
  }

  const Zonotope residualBox = fromInterval(IntervalVector(lo, hi));
  const Zonotope noiseTerm = estimationNoiseTerm(model, config, dims);
  const Zonotope processTerm = linearMap(dims.outputMap, config.processNoise);
  return residualBox + (-noiseTerm) + (-processTerm) +
         (-config.measurementNoise);
}

Zonotope computeCoverageBound(const ReachConfig& config,
                              const PlantDimensions& dims) {
  checkConfig(config, dims);
  if (config.epsilonOverride) return *config.epsilonOverride;
  Eigen::VectorXd halfWidth(dims.outputDim);
  for (Eigen::Index i = 0; i < dims.outputDim; ++i) {
    halfWidth[i] = 0.5 * config.coveringRadius *
                   (dims.outputMap.row(i).cwiseAbs() * config.lipschitz)(0);
  }
  Eigen::MatrixXd gens = halfWidth.asDiagonal();
  return Zonotope(Eigen::VectorXd::Zero(dims.outputDim), std::move(gens));
}

ReachStep reachStep(const Zonotope& outputSet, const Zonotope& inputSet,
                    const LinearizedModel& model, const Zonotope& mismatchBound,
                    const Zonotope& coverageBound, const ReachConfig& config,
                    const PlantDimensions& dims) {
  checkConfig(config, dims);
  if (outputSet.dim() != dims.outputDim) {
    throw std::invalid_argument("reachStep: output set dimension");
  }
  if (inputSet.dim() != dims.inputDim) {
    throw std::invalid_argument("reachStep: input set dimension");
  }

  // States consistent with the current output set.
  const Eigen::MatrixXd hPinv = pseudoRightInverse(dims.outputMap);
  const Eigen::MatrixXd slack =
      Eigen::MatrixXd::Identity(dims.stateDim, dims.stateDim) -
      hPinv * dims.outputMap;
  const Zonotope noiseFree = outputSet + (-config.measurementNoise);
  Zonotope stateSet =
      linearMap(hPinv, noiseFree) +
      Zonotope(Eigen::VectorXd::Zero(dims.stateDim),
               Eigen::MatrixXd(config.stateBound * slack));

  // Lifted [1; x - x*; u - u*] block pushed through the model.
  Eigen::VectorXd anchorShift(1 + dims.stateDim + dims.inputDim);
  anchorShift << 0.0, model.point.stateAnchor(dims), model.point.inputCenter;
  const Zonotope lifted =
      cartesianProduct(Zonotope::point(Eigen::VectorXd::Ones(1)),
                       cartesianProduct(stateSet, inputSet)) -
      anchorShift;
  Zonotope next = linearMap(model.coefficients, lifted) +
                  config.measurementNoise +
                  linearMap(dims.outputMap, config.processNoise) +
                  mismatchBound + coverageBound;
  return ReachStep{std::move(stateSet), std::move(next)};
}

ReachResult reachHorizon(const DataWindow& window,
                         const Zonotope& initialOutputSet, int horizon,
                         const ReachConfig& config,
                         const PlantDimensions& dims) {
  if (horizon < 1) {
    throw std::invalid_argument("reachHorizon: horizon must be positive");
  }
  LinearizationPoint point;
  point.outputCenter = initialOutputSet.center();
  point.noiseCenter = config.measurementNoise.center();
  point.inputCenter = config.inputSet.center();

  ReachResult result;
  result.model = estimateModel(window, point, config, dims);
  result.mismatchBound =
      computeMismatchBound(window, result.model, config, dims);
  result.coverageBound = computeCoverageBound(config, dims);

  Zonotope current = initialOutputSet;
  result.stateSets.reserve(static_cast<std::size_t>(horizon));
  result.outputSets.reserve(static_cast<std::size_t>(horizon));
  for (int k = 0; k < horizon; ++k) {
    ReachStep step =
        reachStep(current, config.inputSet, result.model, result.mismatchBound,
                  result.coverageBound, config, dims);
    result.stateSets.push_back(std::move(step.stateSet));
    result.outputSets.push_back(step.nextOutputSet);
    current = std::move(step.nextOutputSet);
  }
  return result;
}

}  // namespace nzpc
