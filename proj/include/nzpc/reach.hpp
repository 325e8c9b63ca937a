#pragma once

#include <Eigen/Dense>

#include <optional>
#include <vector>

#include "nzpc/trajectory.hpp"
#include "nzpc/zonotope.hpp"

namespace nzpc {

/// Linearization anchors: output, measurement-noise and input centers. The
/// implied state anchor is xStar = Hpinv (outputCenter - noiseCenter).
struct LinearizationPoint {
  Eigen::VectorXd outputCenter;  // y*
  Eigen::VectorXd noiseCenter;   // v*
  Eigen::VectorXd inputCenter;   // u*

  Eigen::VectorXd stateAnchor(const PlantDimensions& dims) const;
};

/// One-step affine model of the lifted output dynamics, estimated from data:
/// yNext ~ offset + A (xhat - x*) + B (u - u*), stored as the stacked
/// coefficient block [offset | A | B].
struct LinearizedModel {
  Eigen::MatrixXd coefficients;  // outputDim x (1 + stateDim + inputDim)
  LinearizationPoint point;
  Eigen::Index stateDim = 0;
  Eigen::Index inputDim = 0;

  Eigen::VectorXd offset() const { return coefficients.col(0); }
  Eigen::MatrixXd stateMatrix() const {
    return coefficients.middleCols(1, stateDim);
  }
  Eigen::MatrixXd inputMatrix() const {
    return coefficients.rightCols(inputDim);
  }
};

/// Uncertainty description consumed by the reachability recursion.
struct ReachConfig {
  Zonotope processNoise;      // Zw, state dimension
  Zonotope measurementNoise;  // Zv, output dimension
  Zonotope inputSet;          // Zu, input dimension
  Eigen::VectorXd lipschitz;  // per-dimension Lipschitz constants L_f
  double coveringRadius = 0.0;  // delta
  double stateBound = 0.0;      // eta
  std::optional<Zonotope> epsilonOverride;  // fixed coverage bound, if given
};

/// Output of the data-driven reachability recursion over a horizon.
struct ReachResult {
  LinearizedModel model;
  Zonotope mismatchBound;  // bound on model mismatch at the data (Z_L)
  Zonotope coverageBound;  // extension to unsampled points (Z_eps)
  std::vector<Zonotope> outputSets;  // reachable outputs, steps 1..N
  std::vector<Zonotope> stateSets;   // consistent state enclosures, steps 0..N-1
};

/// Least-squares estimate of [offset | A | B] from a regression window,
/// corrected by the noise-concatenation centers. Throws when the regressor
/// is rank deficient (message includes the numerical rank).
LinearizedModel estimateModel(const DataWindow& window,
                              const LinearizationPoint& point,
                              const ReachConfig& config,
                              const PlantDimensions& dims);

/// Zonotope bound on the model mismatch over the window: element-wise
/// residual extremes, recentred by the modeled estimation-noise terms.
Zonotope computeMismatchBound(const DataWindow& window,
                              const LinearizedModel& model,
                              const ReachConfig& config,
                              const PlantDimensions& dims);

/// Coverage bound for unsampled points: axis-aligned with half-widths
/// |H_i| . L_f * delta / 2 per output dimension, unless overridden.
Zonotope computeCoverageBound(const ReachConfig& config,
                              const PlantDimensions& dims);

/// One recursion step: returns the measurement-consistent state enclosure
/// and the next reachable output set.
struct ReachStep {
  Zonotope stateSet;
  Zonotope nextOutputSet;
};
ReachStep reachStep(const Zonotope& outputSet, const Zonotope& inputSet,
                    const LinearizedModel& model, const Zonotope& mismatchBound,
                    const Zonotope& coverageBound, const ReachConfig& config,
                    const PlantDimensions& dims);

/// Full pipeline: anchor at the centers of initialOutputSet / Zv / Zu,
/// estimate the model, build the bounds, and roll the recursion for
/// `horizon` steps.
ReachResult reachHorizon(const DataWindow& window,
                         const Zonotope& initialOutputSet, int horizon,
                         const ReachConfig& config, const PlantDimensions& dims);

}  // namespace nzpc
