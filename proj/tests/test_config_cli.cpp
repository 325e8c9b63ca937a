#include "nzpc/config.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "doctest.h"
#include "json.hpp"
#include "nzpc/serialization.hpp"
#include "test_support.hpp"

using namespace nzpc;
using nlohmann::json;
using testsupport::throwsWithMessage;

namespace {

// The test binaries run with the repository root as working directory.
constexpr const char* kReachConfigPath = "configs/cstr_reach.json";
constexpr const char* kNzpcConfigPath = "configs/cstr_nzpc.json";

std::filesystem::path tempFile(const std::string& name) {
  return std::filesystem::temp_directory_path() / name;
}

std::vector<std::string> readLines(const std::filesystem::path& path) {
  std::ifstream in(path);
  REQUIRE(in.good());
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) lines.push_back(line);
  return lines;
}

}  // namespace

TEST_CASE("bundled reachability config loads with the documented values") {
  const ExperimentConfig config = loadExperimentConfig(kReachConfigPath);

  CHECK(config.plant.type == "cstr");
  CHECK(config.plant.cstr.tau == doctest::Approx(0.015));
  CHECK(config.plant.cstr.alpha == doctest::Approx(7.2e10));
  CHECK(config.plant.cstr.beta == doctest::Approx(-8750.0));
  CHECK(config.plant.cstr.rho == doctest::Approx(1.5e13));
  CHECK(config.plant.cstr.expArgCap == doctest::Approx(-29.1));
  CHECK(config.plant.outputMap(0, 1) == doctest::Approx(0.001));
  CHECK(config.plant.outputMap(1, 0) == doctest::Approx(-0.01));
  CHECK(config.plant.stateBound == doctest::Approx(22.0));

  REQUIRE(config.processNoise.generatorCount() == 1);
  CHECK(config.processNoise.generators()(0, 0) == doctest::Approx(2e-4));
  REQUIRE(config.measurementNoise.generatorCount() == 1);
  CHECK(config.measurementNoise.generators()(1, 0) == doctest::Approx(1e-3));

  CHECK(config.data.trajectories == 50);
  CHECK(config.data.length == 10);
  CHECK(config.data.seed == 42);
  CHECK(config.data.initialStateSet.center()[1] == doctest::Approx(-20.5));

  CHECK(config.reach.horizon == 5);
  CHECK(config.reach.inputSet.generators()(1, 1) == doctest::Approx(3.0));
  CHECK(config.reach.lipschitz[0] == doctest::Approx(0.32));
  CHECK(config.reach.coveringRadius == doctest::Approx(0.5));
  REQUIRE(config.reach.epsilonOverride.has_value());
  CHECK(config.reach.epsilonOverride->generators()(1, 1) == doctest::Approx(0.71));

  CHECK_FALSE(config.nzpc.has_value());
  CHECK(config.outputDir == "out/cstr-reach");

  const PlantDimensions dims = dimensionsFrom(config);
  CHECK(dims.stateDim == 2);
  CHECK(dims.inputDim == 2);
  CHECK(dims.outputDim == 2);
  CHECK(dims.stateBound == doctest::Approx(22.0));

  // A reach-only config has no controller section to materialize.
  CHECK(throwsWithMessage([&] { (void)nzpcConfigFrom(config); },
                          "the \"nzpc\" section is required"));
}

TEST_CASE("bundled controller config materializes a valid controller") {
  const ExperimentConfig config = loadExperimentConfig(kNzpcConfigPath);

  REQUIRE(config.nzpc.has_value());
  CHECK(config.nzpc->horizon == 3);
  CHECK(config.nzpc->steps == 150);
  CHECK(config.nzpc->outputWeight(0, 0) == doctest::Approx(5.0));
  CHECK(config.nzpc->inputWeight(1, 1) == doctest::Approx(0.02));
  CHECK(config.nzpc->outputReference[0] == doctest::Approx(-1.7997));
  CHECK(config.nzpc->inputReference[0] == doctest::Approx(-2.8054));
  CHECK(config.nzpc->outputLower[1] == doctest::Approx(-22.0));
  CHECK(config.nzpc->outputUpper[1] == doctest::Approx(2.7));
  CHECK_FALSE(config.nzpc->fallbackHoldInput);
  CHECK(config.nzpc->qp.tolerance == doctest::Approx(1e-6));
  CHECK(config.nzpc->qp.infeasibilityTolerance == doctest::Approx(1e-5));
  CHECK(config.nzpc->qp.maxIterations == 20000);
  CHECK(config.nzpc->qp.polish);

  const NzpcConfig controller = nzpcConfigFrom(config);
  CHECK(controller.horizon == 3);
  CHECK(controller.steps == 150);
  CHECK(controller.reach.inputSet.center()[0] == doctest::Approx(-2.805));
  CHECK(controller.reach.stateBound == doctest::Approx(22.0));
  REQUIRE(controller.reach.epsilonOverride.has_value());
  CHECK_NOTHROW(validateNzpcConfig(controller, dimensionsFrom(config)));

  const ReachConfig reach = reachConfigFrom(config);
  CHECK(reach.measurementNoise.generators()(1, 0) == doctest::Approx(0.01));
  CHECK(reach.coveringRadius == doctest::Approx(0.5));
}

TEST_CASE("config serialization round-trips to an identical document") {
  for (const char* path : {kReachConfigPath, kNzpcConfigPath}) {
    CAPTURE(path);
    const ExperimentConfig config = loadExperimentConfig(path);
    const json serialized = toJson(config);
    const ExperimentConfig reparsed = experimentConfigFromJson(serialized);
    CHECK(toJson(reparsed) == serialized);

    // And through a file.
    const std::filesystem::path out = tempFile("nzpc_config_roundtrip.json");
    saveExperimentConfig(out.string(), config);
    const ExperimentConfig reloaded = loadExperimentConfig(out.string());
    CHECK(toJson(reloaded) == serialized);
    std::filesystem::remove(out);
  }
}

TEST_CASE("json reader strips line and block comments") {
  const std::filesystem::path path = tempFile("nzpc_commented.json");
  {
    std::ofstream out(path);
    out << "// leading comment\n"
        << "{\n"
        << "  \"a\": 1, // trailing comment\n"
        << "  /* block\n"
        << "     comment */\n"
        << "  \"b\": [1, 2, 3]\n"
        << "}\n";
  }
  const json j = readJsonFile(path.string());
  CHECK(j.at("a").get<int>() == 1);
  CHECK(j.at("b").size() == 3);
  std::filesystem::remove(path);
}

TEST_CASE("config errors name the offending field") {
  const json base = readJsonFile(kReachConfigPath);
  const auto rejects = [&](const std::function<void(json&)>& mutate, const std::string& needle) {
    json j = base;
    mutate(j);
    return throwsWithMessage([&] { validateExperimentConfig(experimentConfigFromJson(j)); },
                             needle);
  };

  CHECK(rejects([](json& j) { j.erase("plant"); }, "field \"plant\" is missing"));
  CHECK(rejects([](json& j) { j["plant"]["type"] = 3; }, "field \"plant.type\" must be a string"));
  CHECK(rejects([](json& j) { j["plant"]["type"] = "banana"; },
                "must be \"cstr\" or \"linear\""));
  CHECK(rejects([](json& j) { j["plant"]["state_bound"] = -1.0; },
                "field \"plant.state_bound\" must be positive"));
  CHECK(rejects([](json& j) { j["plant"]["output_map"] = json::array({json::array({1.0, 0.001})}); },
                "must be 2x2 for the reactor benchmark"));
  CHECK(rejects([](json& j) { j["data"]["length"] = 1; },
                "must be at least 2 to form regression pairs"));
  CHECK(rejects([](json& j) { j["data"].erase("seed"); }, "field \"data.seed\" is missing"));
  CHECK(rejects([](json& j) { j["reach"]["horizon"] = 0; },
                "field \"reach.horizon\" must be at least 1"));
  CHECK(rejects([](json& j) { j["reach"]["lipschitz"] = json::array({0.32}); },
                "field \"reach.lipschitz\" must be a non-negative vector"));
  CHECK(rejects(
      [](json& j) {
        j["noise"]["process"] = json{{"center", json::array({0.0, 0.0, 0.0})}};
      },
      "field \"noise.process\" dimension must equal the state dimension"));
}

TEST_CASE("set and matrix readers give positioned parse errors") {
  CHECK(throwsWithMessage([] { (void)vectorFromJson(json::parse("[1, \"x\"]"), "ctx"); },
                          "json: ctx entry 1 is not a number"));
  CHECK(throwsWithMessage([] { (void)matrixFromJson(json::parse("[[1, 2], [3]]"), "m"); },
                          "row 1 is not an array of length 2"));
  CHECK(throwsWithMessage([] { (void)zonotopeFromJson(json::parse("[1, 2]"), "z"); },
                          "must be an object with \"center\""));
  CHECK(throwsWithMessage(
      [] {
        (void)zonotopeFromJson(json::parse("{\"center\": [0, 0], \"generators\": [[1]]}"), "z");
      },
      "length does not match the center"));

  // Round trips are exact.
  std::mt19937_64 rng(99);
  const Zonotope z = testsupport::randomZonotope(3, 4, rng);
  const Zonotope back = zonotopeFromJson(toJson(z), "z");
  CHECK((back.center() - z.center()).cwiseAbs().maxCoeff() == 0.0);
  CHECK((back.generators() - z.generators()).cwiseAbs().maxCoeff() == 0.0);

  const Eigen::MatrixXd m = testsupport::randomMatrix(2, 5, rng);
  CHECK((matrixFromJson(matrixToJson(m), "m") - m).cwiseAbs().maxCoeff() == 0.0);
  const Eigen::VectorXd v = testsupport::randomVector(4, rng);
  CHECK((vectorFromJson(vectorToJson(v), "v") - v).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("unbounded output limits serialize as nulls and parse back") {
  ExperimentConfig config = loadExperimentConfig(kNzpcConfigPath);
  REQUIRE(config.nzpc.has_value());
  config.nzpc->outputLower[0] = -std::numeric_limits<double>::infinity();
  config.nzpc->outputUpper[1] = std::numeric_limits<double>::infinity();

  const json j = toJson(config);
  CHECK(j.at("nzpc").at("output_lower")[0].is_null());
  CHECK(j.at("nzpc").at("output_lower")[1].is_number());
  CHECK(j.at("nzpc").at("output_upper")[1].is_null());

  const ExperimentConfig back = experimentConfigFromJson(j);
  REQUIRE(back.nzpc.has_value());
  CHECK(std::isinf(back.nzpc->outputLower[0]));
  CHECK(back.nzpc->outputLower[0] < 0);
  CHECK(std::isinf(back.nzpc->outputUpper[1]));
  CHECK(back.nzpc->outputUpper[1] > 0);
  CHECK(toJson(back) == j);
}

TEST_CASE("linear plant configs build a working simulator") {
  const char* text = R"({
    "plant": {
      "type": "linear",
      "linear": {"a": [[0.5]], "b": [[1.0]]},
      "output_map": [[1.0]],
      "state_bound": 100.0
    },
    "noise": {
      "process": {"center": [0.0]},
      "measurement": {"center": [0.0]}
    },
    "data": {
      "trajectories": 0,
      "length": 2,
      "seed": 7,
      "initial_state_set": {"center": [0.0]}
    },
    "reach": {
      "horizon": 1,
      "initial_state_set": {"center": [0.0]},
      "input_set": {"center": [0.0], "generators": [[1.0]]},
      "lipschitz": [0.0],
      "covering_radius": 0.0
    }
  })";
  const ExperimentConfig config = experimentConfigFromJson(json::parse(text));
  CHECK_NOTHROW(validateExperimentConfig(config));
  CHECK(config.plant.type == "linear");

  PlantSimulator plant = makePlant(config, 3);
  const Eigen::VectorXd next = plant.step(Eigen::VectorXd::Constant(1, 2.0),
                                          Eigen::VectorXd::Constant(1, 0.25));
  CHECK(next[0] == doctest::Approx(1.25));
  CHECK(plant.measure(next)[0] == doctest::Approx(1.25));
}

TEST_CASE("closed-loop csv has the documented layout") {
  ClosedLoopLog log;
  for (int t = 0; t < 2; ++t) {
    ClosedLoopRecord record;
    record.step = t;
    record.qpStatus = QpStatus::Optimal;
    log.records.push_back(record);
  }
  log.records[0].output = Eigen::VectorXd::Constant(1, 0.5);
  log.records[0].input = Eigen::VectorXd::Constant(1, 0.25);
  log.records[0].qpIterations = 12;
  log.records[0].solveMs = 0.125;
  log.records[0].hullLower = Eigen::VectorXd::Constant(1, 0.25);
  log.records[0].hullUpper = Eigen::VectorXd::Constant(1, 0.75);
  log.records[1].output = Eigen::VectorXd::Constant(1, 1.25);
  log.records[1].input = Eigen::VectorXd::Constant(1, -0.5);
  log.records[1].qpIterations = 8;
  log.records[1].solveMs = 0.0625;
  log.records[1].hullLower = Eigen::VectorXd::Constant(1, 1.0);
  log.records[1].hullUpper = Eigen::VectorXd::Constant(1, 1.5);
  log.finalOutput = Eigen::VectorXd::Constant(1, 1.5);

  const std::filesystem::path path = tempFile("nzpc_closed_loop.csv");
  writeClosedLoopCsv(path.string(), log, 1, 1);
  const std::vector<std::string> lines = readLines(path);
  std::filesystem::remove(path);

  REQUIRE(lines.size() == 4);
  CHECK(lines[0] == "step,y_1,u_1,qp_status,qp_iters,solve_ms,hull_lo_1,hull_hi_1");
  CHECK(lines[1] == "0,0.5,0.25,optimal,12,0.125,0.25,0.75");
  CHECK(lines[2] == "1,1.25,-0.5,optimal,8,0.0625,1,1.5");
  CHECK(lines[3] == "2,1.5,,,,,,");
}
