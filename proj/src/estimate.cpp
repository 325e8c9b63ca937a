#include "nzpc/estimate.hpp"

#include <limits>
#include <stdexcept>

namespace nzpc {

LipschitzEstimate estimateLipschitz(const DataWindow& window, const PlantDimensions& dims) {
  const Eigen::Index columns = window.columns();
  if (columns < 2) {
    throw std::invalid_argument("estimate: need at least two window columns");
  }
  if (window.outputsPrev.rows() != dims.outputDim || window.inputsPrev.rows() != dims.inputDim) {
    throw std::invalid_argument("estimate: window dimensions do not match the plant");
  }

  // Lifted samples xi_j = [Hpinv y-_j ; u_j].
  const Eigen::MatrixXd hPinv = pseudoRightInverse(dims.outputMap);
  Eigen::MatrixXd lifted(dims.stateDim + dims.inputDim, columns);
  lifted.topRows(dims.stateDim) = hPinv * window.outputsPrev;
  lifted.bottomRows(dims.inputDim) = window.inputsPrev;

  LipschitzEstimate estimate;
  estimate.slopes = Eigen::VectorXd::Zero(dims.outputDim);
  Eigen::VectorXd nearest =
      Eigen::VectorXd::Constant(columns, std::numeric_limits<double>::infinity());

  for (Eigen::Index j = 0; j < columns; ++j) {
    for (Eigen::Index k = j + 1; k < columns; ++k) {
      const double distance = (lifted.col(j) - lifted.col(k)).norm();
      nearest[j] = std::min(nearest[j], distance);
      nearest[k] = std::min(nearest[k], distance);
      if (distance <= 0.0) {
        continue;  // duplicate lifted sample: the difference quotient is undefined
      }
      ++estimate.pairsUsed;
      estimate.slopes = estimate.slopes.cwiseMax(
          (window.outputsNext.col(j) - window.outputsNext.col(k)).cwiseAbs() / distance);
    }
  }
  if (estimate.pairsUsed == 0) {
    throw std::runtime_error("estimate: all lifted samples coincide; slopes are undefined");
  }
  estimate.coveringRadius = nearest.maxCoeff();
  return estimate;
}

}  // namespace nzpc
