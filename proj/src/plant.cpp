#include "nzpc/plant.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>
#include <utility>

namespace nzpc {

namespace {

void requireSize(const Eigen::VectorXd& v, Eigen::Index size, const char* name) {
  if (v.size() != size) {
    std::ostringstream msg;
    msg << "plant: " << name << " has size " << v.size() << ", expected " << size;
    throw std::invalid_argument(msg.str());
  }
}

}  // namespace

Eigen::VectorXd cstrStep(const Eigen::VectorXd& x, const Eigen::VectorXd& u,
                         const CstrParams& params) {
  requireSize(x, 2, "state");
  requireSize(u, 2, "input");
  if (x[1] == 0.0) {
    throw std::domain_error("cstr: x2 = 0 makes the exponential argument beta/x2 undefined");
  }
  const double tau = params.tau;
  const double arg = params.beta / x[1];
  const double expTerm = std::exp(std::min(arg, params.expArgCap));

  const double f1 =
      ((1.0 - 0.5 * tau - params.alpha * expTerm * tau) * x[0] + tau) / (1.0 + 0.5 * tau) +
      u[0] * tau;
  const double f2 = ((1.0 - 1.5 * tau) * x[1] + params.rho * x[0] * expTerm) / (1.0 + 1.5 * tau) +
                    tau * (350.0 - 6.3 * x[0] - 14.4 * x[1]) / (1.0 + 1.5 * tau) + u[1] * tau;

  if (!std::isfinite(f1) || !std::isfinite(f2)) {
    std::ostringstream msg;
    msg << "cstr: non-finite result in " << (!std::isfinite(f1) ? "f1" : "f2")
        << " at x = (" << x[0] << ", " << x[1] << "): exponential argument beta/x2 = " << arg
        << ", exp term = " << expTerm;
    throw std::domain_error(msg.str());
  }
  Eigen::VectorXd next(2);
  next << f1, f2;
  return next;
}

PlantSimulator::PlantSimulator(PlantDimensions dims, DynamicsFn dynamics, Zonotope processNoise,
                               Zonotope measurementNoise, std::uint64_t seed)
    : dims_(std::move(dims)),
      dynamics_(std::move(dynamics)),
      processNoise_(std::move(processNoise)),
      measurementNoise_(std::move(measurementNoise)),
      rng_(seed) {
  if (!dynamics_) {
    throw std::invalid_argument("plant: dynamics function must be set");
  }
  if (processNoise_.dim() != dims_.stateDim) {
    throw std::invalid_argument("plant: process noise dimension must equal the state dimension");
  }
  if (measurementNoise_.dim() != dims_.outputDim) {
    throw std::invalid_argument(
        "plant: measurement noise dimension must equal the output dimension");
  }
}

Eigen::VectorXd PlantSimulator::step(const Eigen::VectorXd& state, const Eigen::VectorXd& input) {
  requireSize(state, dims_.stateDim, "state");
  requireSize(input, dims_.inputDim, "input");
  return dynamics_(state, input) + sampleInZonotope(processNoise_, rng_);
}

Eigen::VectorXd PlantSimulator::measure(const Eigen::VectorXd& state) {
  requireSize(state, dims_.stateDim, "state");
  return dims_.outputMap * state + sampleInZonotope(measurementNoise_, rng_);
}

Eigen::VectorXd sampleInZonotope(const Zonotope& z, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  Eigen::VectorXd beta(z.generatorCount());
  for (Eigen::Index i = 0; i < beta.size(); ++i) {
    beta[i] = unit(rng);
  }
  return z.center() + z.generators() * beta;
}

SimulatedTrajectory simulateTrajectory(PlantSimulator& plant, const Eigen::VectorXd& x0,
                                       const Eigen::MatrixXd& inputs, int trajectoryId,
                                       bool recordStates) {
  const PlantDimensions& dims = plant.dims();
  requireSize(x0, dims.stateDim, "initial state");
  if (inputs.rows() != dims.inputDim || inputs.cols() < 1) {
    throw std::invalid_argument("plant: inputs must be inputDim x length with length >= 1");
  }
  const Eigen::Index length = inputs.cols();

  SimulatedTrajectory result;
  result.trajectory.id = trajectoryId;
  result.trajectory.inputs = inputs;
  result.trajectory.outputs.resize(dims.outputDim, length);
  if (recordStates) {
    result.states.resize(dims.stateDim, length);
  }

  Eigen::VectorXd x = x0;
  for (Eigen::Index k = 0; k < length; ++k) {
    if (!x.allFinite() || x.cwiseAbs().maxCoeff() > dims.stateBound) {
      std::ostringstream msg;
      msg << "plant: state bound ||x||_inf <= " << dims.stateBound
          << " violated at step " << k << " of trajectory " << trajectoryId
          << " (||x||_inf = " << (x.allFinite() ? x.cwiseAbs().maxCoeff() : 0.0)
          << (x.allFinite() ? "" : ", non-finite state") << ")";
      throw std::runtime_error(msg.str());
    }
    result.trajectory.outputs.col(k) = plant.measure(x);
    if (recordStates) {
      result.states.col(k) = x;
    }
    if (k + 1 < length) {
      x = plant.step(x, inputs.col(k));
    }
  }
  return result;
}

PlantSimulator makeCstrPlant(const CstrParams& params, const Zonotope& processNoise,
                             const Zonotope& measurementNoise, std::uint64_t seed) {
  Eigen::MatrixXd outputMap(2, 2);
  outputMap << 1.0, 0.001, -0.01, 1.0;
  PlantDimensions dims = makePlantDimensions(2, outputMap, 22.0);
  DynamicsFn dynamics = [params](const Eigen::VectorXd& x, const Eigen::VectorXd& u) {
    return cstrStep(x, u, params);
  };
  return PlantSimulator(std::move(dims), std::move(dynamics), processNoise, measurementNoise,
                        seed);
}

PlantSimulator makeLinearPlant(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                               const Eigen::MatrixXd& outputMap, double stateBound,
                               const Zonotope& processNoise, const Zonotope& measurementNoise,
                               std::uint64_t seed) {
  if (a.rows() != a.cols() || b.rows() != a.rows()) {
    throw std::invalid_argument("plant: linear dynamics require square A and matching B");
  }
  PlantDimensions dims = makePlantDimensions(b.cols(), outputMap, stateBound);
  if (dims.stateDim != a.rows()) {
    throw std::invalid_argument("plant: output map column count must equal the state dimension");
  }
  DynamicsFn dynamics = [a, b](const Eigen::VectorXd& x, const Eigen::VectorXd& u) {
    return (a * x + b * u).eval();
  };
  return PlantSimulator(std::move(dims), std::move(dynamics), processNoise, measurementNoise,
                        seed);
}

bool ContainmentReport::allContained() const {
  if (samples == 0) return true;
  for (double fraction : stepFractions) {
    if (fraction < 1.0) return false;
  }
  return true;
}

ContainmentReport verifyContainment(PlantSimulator& plant, const ReachResult& reach,
                                    const Zonotope& initialStateSet, const Zonotope& inputSet,
                                    int samples, std::uint64_t seed, double tol) {
  const int horizon = static_cast<int>(reach.outputSets.size());
  ContainmentReport report;
  report.samples = samples;
  report.horizon = horizon;
  report.stepFractions.assign(static_cast<std::size_t>(horizon), 0.0);
  report.worstScales.assign(static_cast<std::size_t>(horizon), 0.0);
  if (samples <= 0 || horizon == 0) {
    return report;
  }

  const PlantDimensions& dims = plant.dims();
  if (initialStateSet.dim() != dims.stateDim || inputSet.dim() != dims.inputDim) {
    throw std::invalid_argument("plant: containment check set dimensions do not match the plant");
  }

  std::vector<int> containedCounts(static_cast<std::size_t>(horizon), 0);
  plant.reseed(seed);
  for (int s = 0; s < samples; ++s) {
    Eigen::VectorXd x = sampleInZonotope(initialStateSet, plant.rng());
    for (int k = 0; k < horizon; ++k) {
      const Eigen::VectorXd u = sampleInZonotope(inputSet, plant.rng());
      x = plant.step(x, u);
      const Eigen::VectorXd y = plant.measure(x);
      const PointContainment pc =
          containsPoint(reach.outputSets[static_cast<std::size_t>(k)], y, tol);
      if (pc.contained()) {
        containedCounts[static_cast<std::size_t>(k)] += 1;
      }
      const double scale = std::isfinite(pc.scale) ? pc.scale
                                                   : std::numeric_limits<double>::infinity();
      report.worstScales[static_cast<std::size_t>(k)] =
          std::max(report.worstScales[static_cast<std::size_t>(k)], scale);
    }
  }
  for (int k = 0; k < horizon; ++k) {
    report.stepFractions[static_cast<std::size_t>(k)] =
        static_cast<double>(containedCounts[static_cast<std::size_t>(k)]) /
        static_cast<double>(samples);
  }
  return report;
}

}  // namespace nzpc
