#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <string>

#include "json.hpp"
#include "nzpc/nzpc.hpp"
#include "nzpc/plant.hpp"
#include "nzpc/reach.hpp"
#include "nzpc/zonotope.hpp"

namespace nzpc {

// Plant selection. "cstr" uses the built-in reactor benchmark; "linear" is
// x+ = A x + B u for identification tests.
struct PlantSpec {
  std::string type = "cstr";
  CstrParams cstr;
  Eigen::MatrixXd linearA;
  Eigen::MatrixXd linearB;
  Eigen::MatrixXd outputMap;  // H
  double stateBound = 0.0;    // eta
};

// Offline data-generation settings: `trajectories` rollouts of `length`
// samples each, starting from initialStateSet with inputs drawn from the
// reach input set.
struct DataSpec {
  int trajectories = 0;
  int length = 0;
  std::uint64_t seed = 0;
  Zonotope initialStateSet;
};

// Reachability experiment settings.
struct ReachSpec {
  int horizon = 1;
  Zonotope initialStateSet;  // X0 (the initial output set is H X0 + Zv)
  Zonotope inputSet;         // Zu
  Eigen::VectorXd lipschitz;
  double coveringRadius = 0.0;
  std::optional<Zonotope> epsilonOverride;
};

// Controller experiment settings.
struct NzpcSpec {
  int horizon = 1;
  Eigen::MatrixXd outputWeight;
  Eigen::MatrixXd inputWeight;
  Eigen::VectorXd outputReference;
  Eigen::VectorXd inputReference;
  Zonotope inputConstraint;
  Eigen::VectorXd outputLower;
  Eigen::VectorXd outputUpper;
  int steps = 0;
  Zonotope initialStateSet;
  bool fallbackHoldInput = false;
  QpSettings qp;
};

// One experiment = plant + noise + data source + reach settings, plus an
// optional controller section.
struct ExperimentConfig {
  PlantSpec plant;
  Zonotope processNoise;      // Zw
  Zonotope measurementNoise;  // Zv
  DataSpec data;
  ReachSpec reach;
  std::optional<NzpcSpec> nzpc;
  std::string outputDir = "out";
};

// Parsing/serialization. Files may contain // and /* */ comments; the
// serialized form round-trips through the parser to an identical config.
ExperimentConfig experimentConfigFromJson(const nlohmann::json& j);
nlohmann::json toJson(const ExperimentConfig& config);
ExperimentConfig loadExperimentConfig(const std::string& path);
void saveExperimentConfig(const std::string& path, const ExperimentConfig& config);

// Cross-field dimension checks (throws std::invalid_argument naming the
// offending field). Called by loadExperimentConfig.
void validateExperimentConfig(const ExperimentConfig& config);

// Materializers.
PlantDimensions dimensionsFrom(const ExperimentConfig& config);
PlantSimulator makePlant(const ExperimentConfig& config, std::uint64_t seed);
ReachConfig reachConfigFrom(const ExperimentConfig& config);
NzpcConfig nzpcConfigFrom(const ExperimentConfig& config);  // requires the nzpc section

}  // namespace nzpc
