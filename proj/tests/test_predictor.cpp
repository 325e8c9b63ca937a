#include "nzpc/nzpc.hpp"

#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "test_support.hpp"

using namespace nzpc;
using testsupport::randomMatrix;
using testsupport::randomVector;

namespace {

PlantDimensions identityDims(Eigen::Index n, Eigen::Index inputDim, double bound) {
  return makePlantDimensions(inputDim, Eigen::MatrixXd::Identity(n, n), bound);
}

LinearizedModel scalarModel(double m0, double a, double b, double yStar, double uStar) {
  LinearizedModel model;
  model.coefficients.resize(1, 3);
  model.coefficients << m0, a, b;
  model.point.outputCenter = Eigen::VectorXd::Constant(1, yStar);
  model.point.noiseCenter = Eigen::VectorXd::Zero(1);
  model.point.inputCenter = Eigen::VectorXd::Constant(1, uStar);
  model.stateDim = 1;
  model.inputDim = 1;
  return model;
}

ReachConfig scalarReachConfig() {
  ReachConfig config;
  config.processNoise = Zonotope::point(Eigen::VectorXd::Zero(1));
  config.measurementNoise = Zonotope::point(Eigen::VectorXd::Zero(1));
  config.inputSet = Zonotope(Eigen::VectorXd::Zero(1),
                             Eigen::MatrixXd::Constant(1, 1, 1.0));
  config.lipschitz = Eigen::VectorXd::Zero(1);
  config.coveringRadius = 0.0;
  config.stateBound = 100.0;
  return config;
}

struct LinearSetup {
  PlantDimensions dims;
  DataWindow window;
  ReachConfig config;
  Zonotope initialOutput;
};

// Random stable linear plant, a data window generated by simulating it, and
// matching reachability settings.
LinearSetup randomLinearSetup(std::mt19937_64& rng) {
  const Eigen::Index n = 2;
  const Eigen::Index m = 2;
  Eigen::MatrixXd a = 0.4 * randomMatrix(n, n, rng);
  Eigen::MatrixXd b = randomMatrix(n, m, rng);
  const Eigen::MatrixXd h = Eigen::MatrixXd::Identity(n, n);

  const Zonotope zw(0.001 * randomVector(n, rng),
                    0.002 * Eigen::MatrixXd::Identity(n, n));
  const Zonotope zv(0.001 * randomVector(n, rng),
                    0.001 * Eigen::MatrixXd::Identity(n, n));
  const Zonotope x0(randomVector(n, rng), 0.2 * Eigen::MatrixXd::Identity(n, n));
  const Zonotope zu(0.1 * randomVector(m, rng), 0.6 * Eigen::MatrixXd::Identity(m, m));

  PlantSimulator plant = makeLinearPlant(a, b, h, 50.0, zw, zv, rng());
  std::vector<Trajectory> trajectories;
  for (int i = 0; i < 20; ++i) {
    const Eigen::VectorXd start = sampleInZonotope(x0, plant.rng());
    Eigen::MatrixXd inputs(m, 5);
    for (int k = 0; k < 5; ++k) inputs.col(k) = sampleInZonotope(zu, plant.rng());
    trajectories.push_back(simulateTrajectory(plant, start, inputs, i, false).trajectory);
  }

  LinearSetup setup;
  setup.dims = plant.dims();
  setup.window = buildWindow(trajectories, setup.dims);
  setup.config.processNoise = zw;
  setup.config.measurementNoise = zv;
  setup.config.inputSet = zu;
  setup.config.lipschitz = Eigen::VectorXd::Constant(n, 0.05);
  setup.config.coveringRadius = 0.1;
  setup.config.stateBound = 50.0;
  setup.initialOutput = linearMap(h, x0) + zv;
  return setup;
}

}  // namespace

TEST_CASE("one-step predictor exposes the input matrix as its gain") {
  const PlantDimensions dims = identityDims(1, 1, 100.0);
  const ReachConfig config = scalarReachConfig();
  const LinearizedModel model = scalarModel(0.2, 0.5, 1.5, 0.25, -0.1);
  const Zonotope none = Zonotope::point(Eigen::VectorXd::Zero(1));
  const Zonotope y0 = Zonotope::point(Eigen::VectorXd::Constant(1, 2.0));

  const AffinePredictor predictor = buildPredictor(model, none, none, y0, 1, config, dims);
  REQUIRE(predictor.horizon() == 1);
  REQUIRE(predictor.steps[0].centerGains.size() == 1);
  CHECK(predictor.steps[0].centerGains[0](0, 0) == doctest::Approx(1.5));

  // center(u0) = m0 + A (y0 - x*) + B (u0 - u*).
  std::vector<Eigen::VectorXd> inputs{Eigen::VectorXd::Constant(1, 0.7)};
  const double expected = 0.2 + 0.5 * (2.0 - 0.25) + 1.5 * (0.7 + 0.1);
  CHECK(predictor.centerAt(0, inputs)[0] == doctest::Approx(expected).epsilon(1e-14));

  // Zero uncertainty: no generators, zero half-widths.
  CHECK(predictor.steps[0].generators.cwiseAbs().maxCoeff() == 0.0);
  CHECK(predictor.steps[0].halfWidths[0] == 0.0);
}

TEST_CASE("predictor gains follow the chain A^(k-j) B") {
  const PlantDimensions dims = identityDims(1, 1, 100.0);
  const ReachConfig config = scalarReachConfig();
  const double a = 0.8;
  const double b = 1.25;
  const LinearizedModel model = scalarModel(0.0, a, b, 0.0, 0.0);
  const Zonotope none = Zonotope::point(Eigen::VectorXd::Zero(1));
  const Zonotope y0 = Zonotope::point(Eigen::VectorXd::Zero(1));

  const AffinePredictor predictor = buildPredictor(model, none, none, y0, 4, config, dims);
  REQUIRE(predictor.horizon() == 4);
  for (int k = 0; k < 4; ++k) {
    const PredictorStep& step = predictor.steps[static_cast<std::size_t>(k)];
    REQUIRE(static_cast<int>(step.centerGains.size()) == k + 1);
    for (int j = 0; j <= k; ++j) {
      const double expected = std::pow(a, k - j) * b;
      CHECK(step.centerGains[static_cast<std::size_t>(j)](0, 0) ==
            doctest::Approx(expected).epsilon(1e-12));
    }
  }
}

TEST_CASE("predictor generators are independent of the inputs") {
  std::mt19937_64 rng(81);
  const LinearSetup setup = randomLinearSetup(rng);
  const ReachResult reach =
      reachHorizon(setup.window, setup.initialOutput, 3, setup.config, setup.dims);
  const AffinePredictor predictor =
      buildPredictor(reach.model, reach.mismatchBound, reach.coverageBound,
                     setup.initialOutput, 3, setup.config, setup.dims);

  for (const PredictorStep& step : predictor.steps) {
    // Half-widths are exactly the row-wise absolute sums.
    const Eigen::VectorXd expected = step.generators.cwiseAbs().rowwise().sum();
    CHECK((step.halfWidths - expected).cwiseAbs().maxCoeff() == 0.0);
  }

  // centerAt is affine: doubling the input difference doubles the response.
  std::vector<Eigen::VectorXd> zero{Eigen::VectorXd::Zero(2), Eigen::VectorXd::Zero(2),
                                    Eigen::VectorXd::Zero(2)};
  std::vector<Eigen::VectorXd> one{Eigen::VectorXd::Ones(2), Eigen::VectorXd::Ones(2),
                                   Eigen::VectorXd::Ones(2)};
  std::vector<Eigen::VectorXd> two{2 * Eigen::VectorXd::Ones(2), 2 * Eigen::VectorXd::Ones(2),
                                   2 * Eigen::VectorXd::Ones(2)};
  for (int k = 0; k < 3; ++k) {
    const Eigen::VectorXd base = predictor.centerAt(k, zero);
    const Eigen::VectorXd d1 = predictor.centerAt(k, one) - base;
    const Eigen::VectorXd d2 = predictor.centerAt(k, two) - base;
    CHECK((d2 - 2.0 * d1).cwiseAbs().maxCoeff() <= 1e-12);
  }
}

TEST_CASE("predictor centers reproduce the reachability recursion") {
  std::mt19937_64 rng(82);
  for (int trial = 0; trial < 10; ++trial) {
    const LinearSetup setup = randomLinearSetup(rng);
    const int horizon = 1 + static_cast<int>(rng() % 4);
    const ReachResult reach =
        reachHorizon(setup.window, setup.initialOutput, horizon, setup.config, setup.dims);
    const AffinePredictor predictor =
        buildPredictor(reach.model, reach.mismatchBound, reach.coverageBound,
                       setup.initialOutput, horizon, setup.config, setup.dims);

    const std::vector<Eigen::VectorXd> centerInputs(
        static_cast<std::size_t>(horizon), setup.config.inputSet.center());
    for (int k = 0; k < horizon; ++k) {
      const Eigen::VectorXd predicted = predictor.centerAt(k, centerInputs);
      const Eigen::VectorXd expected =
          reach.outputSets[static_cast<std::size_t>(k)].center();
      CHECK((predicted - expected).cwiseAbs().maxCoeff() <= 1e-12);
    }
  }
}

TEST_CASE("predictor sets at the input center nest inside the reachable sets") {
  std::mt19937_64 rng(83);
  const LinearSetup setup = randomLinearSetup(rng);
  const int horizon = 3;
  const ReachResult reach =
      reachHorizon(setup.window, setup.initialOutput, horizon, setup.config, setup.dims);
  const AffinePredictor predictor =
      buildPredictor(reach.model, reach.mismatchBound, reach.coverageBound,
                     setup.initialOutput, horizon, setup.config, setup.dims);

  const std::vector<Eigen::VectorXd> centerInputs(
      static_cast<std::size_t>(horizon), setup.config.inputSet.center());
  for (int k = 0; k < horizon; ++k) {
    const PredictorStep& step = predictor.steps[static_cast<std::size_t>(k)];
    const Eigen::VectorXd center = predictor.centerAt(k, centerInputs);
    const IntervalVector hull =
        toInterval(reach.outputSets[static_cast<std::size_t>(k)]);
    CHECK(hull.contains(center + step.halfWidths, 1e-9));
    CHECK(hull.contains(center - step.halfWidths, 1e-9));
  }
}

TEST_CASE("predictor argument validation") {
  const PlantDimensions dims = identityDims(1, 1, 100.0);
  const ReachConfig config = scalarReachConfig();
  const LinearizedModel model = scalarModel(0.0, 0.5, 1.0, 0.0, 0.0);
  const Zonotope none = Zonotope::point(Eigen::VectorXd::Zero(1));
  const Zonotope y0 = Zonotope::point(Eigen::VectorXd::Zero(1));

  CHECK_THROWS_AS(buildPredictor(model, none, none, y0, 0, config, dims),
                  std::invalid_argument);
  CHECK_THROWS_AS(
      buildPredictor(model, none, none, Zonotope::point(Eigen::VectorXd::Zero(2)), 1,
                     config, dims),
      std::invalid_argument);

  const AffinePredictor predictor = buildPredictor(model, none, none, y0, 2, config, dims);
  std::vector<Eigen::VectorXd> oneInput{Eigen::VectorXd::Zero(1)};
  CHECK_NOTHROW(predictor.centerAt(0, oneInput));
  CHECK_THROWS_AS(predictor.centerAt(1, oneInput), std::invalid_argument);
  CHECK_THROWS_AS(predictor.centerAt(2, oneInput), std::invalid_argument);
  CHECK_THROWS_AS(predictor.centerAt(-1, oneInput), std::invalid_argument);
}
