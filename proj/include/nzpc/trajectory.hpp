#pragma once

#include <Eigen/Dense>

#include <string>
#include <vector>

#include "nzpc/zonotope.hpp"

namespace nzpc {

/// One recorded input-output trajectory. Inputs and outputs are stored
/// column-per-sample with equal length L >= 2; the final input is recorded
/// for completeness but never consumed by windowing (it has no successor).
struct Trajectory {
  int id = 0;
  Eigen::MatrixXd inputs;   // inputDim x L
  Eigen::MatrixXd outputs;  // outputDim x L

  Eigen::Index length() const { return outputs.cols(); }
};

/// Plant interface dimensions plus the known output map H (full row rank)
/// and the state-space bound eta (every reachable state satisfies
/// ||x||_inf <= eta).
struct PlantDimensions {
  Eigen::Index stateDim = 0;
  Eigen::Index inputDim = 0;
  Eigen::Index outputDim = 0;
  Eigen::MatrixXd outputMap;  // H: outputDim x stateDim
  double stateBound = 0.0;    // eta
};

/// Validating constructor; throws when H is not full row rank (singular
/// values below 1e-10 relative to the largest), mentioning the numerical
/// rank, or when shapes/bounds are inconsistent.
PlantDimensions makePlantDimensions(Eigen::Index inputDim,
                                    Eigen::MatrixXd outputMap,
                                    double stateBound);

/// Right pseudoinverse H^T (H H^T)^{-1} of a full-row-rank matrix.
Eigen::MatrixXd pseudoRightInverse(const Eigen::MatrixXd& rowFullRank);

/// Measurement-consistent state enclosure: given output y with measurement
/// noise Zv and state bound eta, every state consistent with y lies in
///   < Hpinv (y - c_v), [Hpinv G_v, eta (I - Hpinv H)] >.
/// Zero generator columns (square invertible H) are retained.
Zonotope stateFromOutput(const Eigen::VectorXd& output,
                         const Zonotope& measurementNoise,
                         const PlantDimensions& dims);

/// Column-aligned regression window. Column j pairs the successor output
/// Yplus(:,j) with its predecessor output Yminus(:,j) and the input
/// Uminus(:,j) applied in between.
struct DataWindow {
  Eigen::MatrixXd outputsNext;  // Y+ : outputDim x T
  Eigen::MatrixXd outputsPrev;  // Y- : outputDim x T
  Eigen::MatrixXd inputsPrev;   // U- : inputDim x T

  Eigen::Index columns() const { return outputsNext.cols(); }
};

/// Stacks successor pairs trajectory by trajectory; no pair ever straddles a
/// trajectory boundary. A length-L trajectory contributes L-1 columns.
DataWindow buildWindow(const std::vector<Trajectory>& trajectories,
                       const PlantDimensions& dims);

/// Drops the oldest column and appends the transition
/// (prevOutput --input--> newOutput). The column count is preserved.
DataWindow slideWindow(const DataWindow& window, const Eigen::VectorXd& input,
                       const Eigen::VectorXd& prevOutput,
                       const Eigen::VectorXd& newOutput);

/// CSV round trip for trajectory batches. Header:
///   traj_id,k,u_1..u_nu,y_1..y_ny
/// A missing or mismatched header and malformed rows raise errors that
/// mention the offending line number.
void writeTrajectoriesCsv(const std::string& path,
                          const std::vector<Trajectory>& trajectories);
std::vector<Trajectory> readTrajectoriesCsv(const std::string& path,
                                            const PlantDimensions& dims);

/// Ground-truth state sidecar (verification only; the estimation path never
/// reads states). Header: traj_id,k,x_1..x_nx.
void writeStatesCsv(const std::string& path, const std::vector<int>& ids,
                    const std::vector<Eigen::MatrixXd>& states);

}  // namespace nzpc
