#include "nzpc/config.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <utility>

#include "nzpc/serialization.hpp"

namespace nzpc {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

[[noreturn]] void fail(const std::string& field, const std::string& what) {
  throw std::runtime_error("config: field \"" + field + "\" " + what);
}

const nlohmann::json& require(const nlohmann::json& j, const char* key,
                              const std::string& context) {
  if (!j.is_object() || !j.contains(key)) {
    fail(context.empty() ? key : context + "." + key, "is missing");
  }
  return j.at(key);
}

std::string join(const std::string& context, const char* key) {
  return context.empty() ? key : context + "." + key;
}

double numberAt(const nlohmann::json& j, const char* key, const std::string& context) {
  const nlohmann::json& v = require(j, key, context);
  if (!v.is_number()) fail(join(context, key), "must be a number");
  return v.get<double>();
}

int intAt(const nlohmann::json& j, const char* key, const std::string& context) {
  const nlohmann::json& v = require(j, key, context);
  if (!v.is_number_integer()) fail(join(context, key), "must be an integer");
  return v.get<int>();
}

std::uint64_t seedAt(const nlohmann::json& j, const char* key, const std::string& context) {
  const nlohmann::json& v = require(j, key, context);
  if (!v.is_number_integer() || (v.is_number_integer() && v.get<std::int64_t>() < 0)) {
    fail(join(context, key), "must be a non-negative integer");
  }
  return v.get<std::uint64_t>();
}

// Output bounds allow null entries for unbounded dimensions.
Eigen::VectorXd boundsFromJson(const nlohmann::json& j, double sign, const std::string& context) {
  if (!j.is_array()) fail(context, "must be an array of numbers or nulls");
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (j[i].is_null()) {
      v[static_cast<Eigen::Index>(i)] = sign * kInf;
    } else if (j[i].is_number()) {
      v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
    } else {
      fail(context, "entry " + std::to_string(i) + " must be a number or null");
    }
  }
  return v;
}

nlohmann::json boundsToJson(const Eigen::VectorXd& v) {
  nlohmann::json arr = nlohmann::json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (std::isfinite(v[i])) {
      arr.push_back(v[i]);
    } else {
      arr.push_back(nullptr);
    }
  }
  return arr;
}

PlantSpec plantFromJson(const nlohmann::json& j) {
  PlantSpec plant;
  const nlohmann::json& type = require(j, "type", "plant");
  if (!type.is_string()) fail("plant.type", "must be a string");
  plant.type = type.get<std::string>();
  if (plant.type != "cstr" && plant.type != "linear") {
    fail("plant.type", "must be \"cstr\" or \"linear\", got \"" + plant.type + "\"");
  }
  plant.outputMap = matrixFromJson(require(j, "output_map", "plant"), "plant.output_map");
  plant.stateBound = numberAt(j, "state_bound", "plant");

  if (plant.type == "cstr") {
    if (j.contains("cstr")) {
      const nlohmann::json& p = j.at("cstr");
      plant.cstr.tau = numberAt(p, "tau", "plant.cstr");
      plant.cstr.alpha = numberAt(p, "alpha", "plant.cstr");
      plant.cstr.beta = numberAt(p, "beta", "plant.cstr");
      plant.cstr.rho = numberAt(p, "rho", "plant.cstr");
      plant.cstr.expArgCap =
          p.contains("exp_arg_cap") ? numberAt(p, "exp_arg_cap", "plant.cstr") : kInf;
    }
  } else {
    const nlohmann::json& lin = require(j, "linear", "plant");
    plant.linearA = matrixFromJson(require(lin, "a", "plant.linear"), "plant.linear.a");
    plant.linearB = matrixFromJson(require(lin, "b", "plant.linear"), "plant.linear.b");
  }
  return plant;
}

nlohmann::json plantToJson(const PlantSpec& plant) {
  nlohmann::json j{{"type", plant.type},
                   {"output_map", matrixToJson(plant.outputMap)},
                   {"state_bound", plant.stateBound}};
  if (plant.type == "cstr") {
    nlohmann::json p{{"tau", plant.cstr.tau},
                     {"alpha", plant.cstr.alpha},
                     {"beta", plant.cstr.beta},
                     {"rho", plant.cstr.rho}};
    if (std::isfinite(plant.cstr.expArgCap)) {
      p["exp_arg_cap"] = plant.cstr.expArgCap;
    }
    j["cstr"] = std::move(p);
  } else {
    j["linear"] = {{"a", matrixToJson(plant.linearA)}, {"b", matrixToJson(plant.linearB)}};
  }
  return j;
}

QpSettings qpFromJson(const nlohmann::json& j) {
  QpSettings settings;
  if (j.contains("tolerance")) settings.tolerance = numberAt(j, "tolerance", "nzpc.qp");
  if (j.contains("infeasibility_tolerance")) {
    settings.infeasibilityTolerance = numberAt(j, "infeasibility_tolerance", "nzpc.qp");
  }
  if (j.contains("max_iterations")) {
    settings.maxIterations = intAt(j, "max_iterations", "nzpc.qp");
  }
  if (j.contains("polish")) {
    if (!j.at("polish").is_boolean()) fail("nzpc.qp.polish", "must be a boolean");
    settings.polish = j.at("polish").get<bool>();
  }
  return settings;
}

nlohmann::json qpToJson(const QpSettings& settings) {
  return nlohmann::json{{"tolerance", settings.tolerance},
                        {"infeasibility_tolerance", settings.infeasibilityTolerance},
                        {"max_iterations", settings.maxIterations},
                        {"polish", settings.polish}};
}

}  // namespace

ExperimentConfig experimentConfigFromJson(const nlohmann::json& j) {
  ExperimentConfig config;
  config.plant = plantFromJson(require(j, "plant", ""));

  const nlohmann::json& noise = require(j, "noise", "");
  config.processNoise = zonotopeFromJson(require(noise, "process", "noise"), "noise.process");
  config.measurementNoise =
      zonotopeFromJson(require(noise, "measurement", "noise"), "noise.measurement");

  const nlohmann::json& data = require(j, "data", "");
  config.data.trajectories = intAt(data, "trajectories", "data");
  config.data.length = intAt(data, "length", "data");
  config.data.seed = seedAt(data, "seed", "data");
  config.data.initialStateSet = zonotopeFromJson(
      require(data, "initial_state_set", "data"), "data.initial_state_set");

  const nlohmann::json& reach = require(j, "reach", "");
  config.reach.horizon = intAt(reach, "horizon", "reach");
  config.reach.initialStateSet = zonotopeFromJson(
      require(reach, "initial_state_set", "reach"), "reach.initial_state_set");
  config.reach.inputSet =
      zonotopeFromJson(require(reach, "input_set", "reach"), "reach.input_set");
  config.reach.lipschitz =
      vectorFromJson(require(reach, "lipschitz", "reach"), "reach.lipschitz");
  config.reach.coveringRadius = numberAt(reach, "covering_radius", "reach");
  if (reach.contains("epsilon_override")) {
    config.reach.epsilonOverride =
        zonotopeFromJson(reach.at("epsilon_override"), "reach.epsilon_override");
  }

  if (j.contains("nzpc")) {
    const nlohmann::json& n = j.at("nzpc");
    NzpcSpec spec;
    spec.horizon = intAt(n, "horizon", "nzpc");
    spec.outputWeight =
        matrixFromJson(require(n, "output_weight", "nzpc"), "nzpc.output_weight");
    spec.inputWeight = matrixFromJson(require(n, "input_weight", "nzpc"), "nzpc.input_weight");
    spec.outputReference =
        vectorFromJson(require(n, "output_reference", "nzpc"), "nzpc.output_reference");
    spec.inputReference =
        vectorFromJson(require(n, "input_reference", "nzpc"), "nzpc.input_reference");
    spec.inputConstraint =
        zonotopeFromJson(require(n, "input_constraint", "nzpc"), "nzpc.input_constraint");
    spec.outputLower = boundsFromJson(require(n, "output_lower", "nzpc"), -1.0,
                                      "nzpc.output_lower");
    spec.outputUpper = boundsFromJson(require(n, "output_upper", "nzpc"), 1.0,
                                      "nzpc.output_upper");
    spec.steps = intAt(n, "steps", "nzpc");
    spec.initialStateSet = zonotopeFromJson(require(n, "initial_state_set", "nzpc"),
                                            "nzpc.initial_state_set");
    if (n.contains("fallback_hold_input")) {
      if (!n.at("fallback_hold_input").is_boolean()) {
        fail("nzpc.fallback_hold_input", "must be a boolean");
      }
      spec.fallbackHoldInput = n.at("fallback_hold_input").get<bool>();
    }
    if (n.contains("qp")) {
      spec.qp = qpFromJson(n.at("qp"));
    }
    config.nzpc = std::move(spec);
  }

  if (j.contains("output_dir")) {
    const nlohmann::json& dir = j.at("output_dir");
    if (!dir.is_string()) fail("output_dir", "must be a string");
    config.outputDir = dir.get<std::string>();
  }
  return config;
}

nlohmann::json toJson(const ExperimentConfig& config) {
  nlohmann::json j;
  j["plant"] = plantToJson(config.plant);
  j["noise"] = {{"process", toJson(config.processNoise)},
                {"measurement", toJson(config.measurementNoise)}};
  j["data"] = {{"trajectories", config.data.trajectories},
               {"length", config.data.length},
               {"seed", config.data.seed},
               {"initial_state_set", toJson(config.data.initialStateSet)}};
  nlohmann::json reach{{"horizon", config.reach.horizon},
                       {"initial_state_set", toJson(config.reach.initialStateSet)},
                       {"input_set", toJson(config.reach.inputSet)},
                       {"lipschitz", vectorToJson(config.reach.lipschitz)},
                       {"covering_radius", config.reach.coveringRadius}};
  if (config.reach.epsilonOverride) {
    reach["epsilon_override"] = toJson(*config.reach.epsilonOverride);
  }
  j["reach"] = std::move(reach);
  if (config.nzpc) {
    const NzpcSpec& spec = *config.nzpc;
    j["nzpc"] = {{"horizon", spec.horizon},
                 {"output_weight", matrixToJson(spec.outputWeight)},
                 {"input_weight", matrixToJson(spec.inputWeight)},
                 {"output_reference", vectorToJson(spec.outputReference)},
                 {"input_reference", vectorToJson(spec.inputReference)},
                 {"input_constraint", toJson(spec.inputConstraint)},
                 {"output_lower", boundsToJson(spec.outputLower)},
                 {"output_upper", boundsToJson(spec.outputUpper)},
                 {"steps", spec.steps},
                 {"initial_state_set", toJson(spec.initialStateSet)},
                 {"fallback_hold_input", spec.fallbackHoldInput},
                 {"qp", qpToJson(spec.qp)}};
  }
  j["output_dir"] = config.outputDir;
  return j;
}

ExperimentConfig loadExperimentConfig(const std::string& path) {
  ExperimentConfig config = experimentConfigFromJson(readJsonFile(path));
  validateExperimentConfig(config);
  return config;
}

void saveExperimentConfig(const std::string& path, const ExperimentConfig& config) {
  writeJsonFile(path, toJson(config));
}

void validateExperimentConfig(const ExperimentConfig& config) {
  const PlantSpec& plant = config.plant;
  if (plant.outputMap.rows() < 1 || plant.outputMap.cols() < 1) {
    fail("plant.output_map", "must be a non-empty matrix");
  }
  if (!(plant.stateBound > 0.0)) {
    fail("plant.state_bound", "must be positive");
  }
  Eigen::Index stateDim = plant.outputMap.cols();
  Eigen::Index inputDim = 0;
  if (plant.type == "cstr") {
    if (stateDim != 2 || plant.outputMap.rows() != 2) {
      fail("plant.output_map", "must be 2x2 for the reactor benchmark");
    }
    if (!(plant.cstr.tau > 0.0)) {
      fail("plant.cstr.tau", "must be positive");
    }
    inputDim = 2;
  } else {
    if (plant.linearA.rows() != plant.linearA.cols() || plant.linearA.rows() != stateDim) {
      fail("plant.linear.a", "must be square with the output map column count");
    }
    if (plant.linearB.rows() != stateDim || plant.linearB.cols() < 1) {
      fail("plant.linear.b", "row count must match the state dimension");
    }
    inputDim = plant.linearB.cols();
  }

  if (config.processNoise.dim() != stateDim) {
    fail("noise.process", "dimension must equal the state dimension");
  }
  if (config.measurementNoise.dim() != plant.outputMap.rows()) {
    fail("noise.measurement", "dimension must equal the output dimension");
  }

  if (config.data.trajectories < 0 || config.data.length < 0) {
    fail("data", "trajectories and length must be non-negative");
  }
  if (config.data.trajectories > 0 && config.data.length < 2) {
    fail("data.length", "must be at least 2 to form regression pairs");
  }
  if (config.data.initialStateSet.dim() != stateDim) {
    fail("data.initial_state_set", "dimension must equal the state dimension");
  }

  if (config.reach.horizon < 1) {
    fail("reach.horizon", "must be at least 1");
  }
  if (config.reach.initialStateSet.dim() != stateDim) {
    fail("reach.initial_state_set", "dimension must equal the state dimension");
  }
  if (config.reach.inputSet.dim() != inputDim) {
    fail("reach.input_set", "dimension must equal the input dimension");
  }
  if (config.reach.lipschitz.size() != stateDim ||
      (config.reach.lipschitz.array() < 0.0).any()) {
    fail("reach.lipschitz", "must be a non-negative vector of state dimension");
  }
  if (config.reach.coveringRadius < 0.0) {
    fail("reach.covering_radius", "must be non-negative");
  }
  if (config.reach.epsilonOverride &&
      config.reach.epsilonOverride->dim() != plant.outputMap.rows()) {
    fail("reach.epsilon_override", "dimension must equal the output dimension");
  }

  if (config.nzpc) {
    // Full controller validation via the runtime checker.
    const PlantDimensions dims = dimensionsFrom(config);
    validateNzpcConfig(nzpcConfigFrom(config), dims);
  }
}

PlantDimensions dimensionsFrom(const ExperimentConfig& config) {
  const Eigen::Index inputDim =
      config.plant.type == "cstr" ? 2 : config.plant.linearB.cols();
  return makePlantDimensions(inputDim, config.plant.outputMap, config.plant.stateBound);
}

PlantSimulator makePlant(const ExperimentConfig& config, std::uint64_t seed) {
  if (config.plant.type == "cstr") {
    return makeCstrPlant(config.plant.cstr, config.processNoise, config.measurementNoise, seed);
  }
  return makeLinearPlant(config.plant.linearA, config.plant.linearB, config.plant.outputMap,
                         config.plant.stateBound, config.processNoise, config.measurementNoise,
                         seed);
}

ReachConfig reachConfigFrom(const ExperimentConfig& config) {
  ReachConfig reach;
  reach.processNoise = config.processNoise;
  reach.measurementNoise = config.measurementNoise;
  reach.inputSet = config.reach.inputSet;
  reach.lipschitz = config.reach.lipschitz;
  reach.coveringRadius = config.reach.coveringRadius;
  reach.stateBound = config.plant.stateBound;
  reach.epsilonOverride = config.reach.epsilonOverride;
  return reach;
}

NzpcConfig nzpcConfigFrom(const ExperimentConfig& config) {
  if (!config.nzpc) {
    throw std::runtime_error("config: the \"nzpc\" section is required for control runs");
  }
  const NzpcSpec& spec = *config.nzpc;
  NzpcConfig controller;
  controller.horizon = spec.horizon;
  controller.outputWeight = spec.outputWeight;
  controller.inputWeight = spec.inputWeight;
  controller.outputReference = spec.outputReference;
  controller.inputReference = spec.inputReference;
  controller.inputConstraint = spec.inputConstraint;
  controller.outputLower = spec.outputLower;
  controller.outputUpper = spec.outputUpper;
  controller.steps = spec.steps;
  controller.reach = reachConfigFrom(config);
  controller.initialStateSet = spec.initialStateSet;
  controller.fallbackHoldInput = spec.fallbackHoldInput;
  controller.qp = spec.qp;
  return controller;
}

}  // namespace nzpc
