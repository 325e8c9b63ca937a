#pragma once

#include <Eigen/Dense>

#include "nzpc/trajectory.hpp"

namespace nzpc {

// Naive data-driven estimates for the smoothness inputs of the reachability
// recursion. These are heuristics computed from finite noisy data, not
// certified bounds: slopes are the maximum pairwise difference quotients of
// the successor outputs over the lifted samples [state estimate; input], and
// the covering radius is the largest nearest-neighbour gap among the lifted
// samples.
struct LipschitzEstimate {
  Eigen::VectorXd slopes;       // per output dimension
  double coveringRadius = 0.0;  // delta estimate
  Eigen::Index pairsUsed = 0;
};

// Throws std::invalid_argument when the window has fewer than two columns
// and std::runtime_error when all lifted samples coincide (no usable pair).
LipschitzEstimate estimateLipschitz(const DataWindow& window, const PlantDimensions& dims);

}  // namespace nzpc
