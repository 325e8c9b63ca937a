#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "nzpc/plant.hpp"
#include "nzpc/qp.hpp"
#include "nzpc/reach.hpp"
#include "nzpc/trajectory.hpp"
#include "nzpc/zonotope.hpp"

namespace nzpc {

// Receding-horizon controller configuration.
//
// Input and output constraints default to `inputConstraint` and
// [outputLower, outputUpper] at every step; entries in the override maps
// replace them at specific global time steps.
struct NzpcConfig {
  int horizon = 1;                  // prediction horizon N
  Eigen::MatrixXd outputWeight;     // Q, positive definite
  Eigen::MatrixXd inputWeight;      // R, positive definite
  Eigen::VectorXd outputReference;  // y_ref
  Eigen::VectorXd inputReference;   // u_ref
  Zonotope inputConstraint;         // admissible inputs, must lie inside reach.inputSet
  Eigen::VectorXd outputLower;      // entries may be -inf
  Eigen::VectorXd outputUpper;      // entries may be +inf
  std::map<int, Zonotope> inputConstraintOverrides;
  std::map<int, IntervalVector> outputConstraintOverrides;
  int steps = 0;  // closed-loop length
  ReachConfig reach;
  Zonotope initialStateSet;  // sampled once at the start of a closed loop
  bool fallbackHoldInput = false;  // on infeasibility: hold previous input instead of aborting
  QpSettings qp;
};

// Constraint sets in force at a global time step.
const Zonotope& inputConstraintAt(const NzpcConfig& config, int step);
IntervalVector outputConstraintAt(const NzpcConfig& config, int step);

// Dimension / definiteness / nesting checks; throws std::invalid_argument
// with a field-level message.
void validateNzpcConfig(const NzpcConfig& config, const PlantDimensions& dims);

// Affine-in-input form of the reachable-set recursion with point inputs:
// the predicted output set at horizon position k (the set of y_{t+k+1|t}) is
//   < centerOffset + sum_j centerGains[j] u_j , generators >
// where the generators do not depend on the input sequence.
struct PredictorStep {
  Eigen::VectorXd centerOffset;
  std::vector<Eigen::MatrixXd> centerGains;  // gains of u_0 .. u_k
  Eigen::MatrixXd generators;
  Eigen::VectorXd halfWidths;  // row-wise absolute sums of `generators`
};

struct AffinePredictor {
  std::vector<PredictorStep> steps;
  Eigen::Index inputDim = 0;
  Eigen::Index outputDim = 0;

  int horizon() const { return static_cast<int>(steps.size()); }
  // Center of the step-k set for a concrete input sequence (needs k+1 inputs).
  Eigen::VectorXd centerAt(int k, const std::vector<Eigen::VectorXd>& inputs) const;
};

// Symbolic execution of the reachability recursion with the input set
// replaced by per-step point inputs.
AffinePredictor buildPredictor(const LinearizedModel& model, const Zonotope& mismatchBound,
                               const Zonotope& coverageBound, const Zonotope& initialOutputSet,
                               int horizon, const ReachConfig& config,
                               const PlantDimensions& dims);

// Decision vector layout: [u_0..u_{N-1} | beta_1..beta_N | aux input-beta
// blocks]. beta_k are the generator coefficients of the step-k predicted
// set; aux blocks appear only for input-constraint zonotopes that are
// neither points nor axis-aligned boxes.
struct QpLayout {
  int horizon = 0;
  Eigen::Index inputDim = 0;
  Eigen::Index variableCount = 0;
  std::vector<Eigen::Index> betaOffset;
  std::vector<Eigen::Index> betaCount;
  std::vector<Eigen::Index> auxOffset;
  std::vector<Eigen::Index> auxCount;

  Eigen::Index inputOffset(int k) const { return static_cast<Eigen::Index>(k) * inputDim; }
};

struct AssembledQp {
  QpProblem problem;
  QpLayout layout;
};

// Reduction of the horizon problem to a convex QP:
//  - cost: sum_k ||y_{k+1} - y_ref||^2_Q + ||u_k - u_ref||^2_R with
//    y_{k+1} = center_k(u) + G_k beta_k;
//  - output constraints tightened by the generator half-widths:
//    lower + dg_k <= center_k(u) <= upper - dg_k;
//  - beta boxes ||beta_k||_inf <= 1 (exact set membership of y_{k+1});
//  - input constraints as equalities (point), boxes (axis-aligned) or an
//    auxiliary beta block (general zonotope).
// `stepIndex` anchors per-step constraint overrides to global time.
AssembledQp assembleQp(const AffinePredictor& predictor, const NzpcConfig& config,
                       int stepIndex = 0);

struct NzpcStepResult {
  bool feasible = false;
  Eigen::VectorXd input;  // first input, projected into the admissible set
  std::vector<Eigen::VectorXd> inputSequence;     // raw solver inputs u_0..u_{N-1}
  std::vector<Eigen::VectorXd> predictedOutputs;  // optimal y_{t+k+1|t}
  std::vector<Zonotope> reachableSets;            // predicted sets at the optimal inputs
  QpResult qp;
  std::string diagnostics;  // populated when infeasible
};

// One controller step: learn the model from the window anchored at the
// current measurement, build the predictor, assemble and solve the QP.
NzpcStepResult nzpcStep(const DataWindow& window, const Eigen::VectorXd& currentOutput,
                        const NzpcConfig& config, const PlantDimensions& dims,
                        int stepIndex = 0);

struct ClosedLoopRecord {
  int step = 0;
  Eigen::VectorXd output;  // measured before solving
  Eigen::VectorXd input;   // applied
  QpStatus qpStatus = QpStatus::MaxIterations;
  int qpIterations = 0;
  double solveMs = 0.0;
  bool fallbackUsed = false;
  Eigen::VectorXd hullLower;  // interval hull of the one-step predicted set
  Eigen::VectorXd hullUpper;
  std::vector<Zonotope> predictedSets;  // full horizon of predicted output sets
  bool outputViolation = false;
  bool inputViolation = false;
};

struct ClosedLoopLog {
  std::vector<ClosedLoopRecord> records;
  Eigen::VectorXd finalOutput;  // measurement after the last applied input
  bool finalOutputViolation = false;
  bool aborted = false;
  int abortStep = -1;
  std::string abortReason;

  int violationCount() const;
  bool anyInfeasible() const;
};

// Runs the receding-horizon loop for config.steps steps: sample the initial
// state, measure, solve, apply the first input, slide the data window.
// Aborts with the log filled so far on infeasibility (unless the hold-input
// fallback is enabled) or on a state-bound violation.
ClosedLoopLog runClosedLoop(PlantSimulator& plant, const NzpcConfig& config,
                            const DataWindow& initialWindow, std::uint64_t seed);

}  // namespace nzpc
