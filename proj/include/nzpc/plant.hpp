#pragma once

#include <Eigen/Dense>

#include <functional>
#include <limits>
#include <random>
#include <vector>

#include "nzpc/reach.hpp"
#include "nzpc/trajectory.hpp"
#include "nzpc/zonotope.hpp"

namespace nzpc {

// Constants of the stirred-tank reactor benchmark. The dynamics contain
// exp(beta / x2), whose argument reaches +427 in the nominal operating region
// (x2 near -20.5): the exponential term (~2e185) makes the successor state
// astronomically large and iterating the map overflows double precision
// within a few steps; see docs/cstr-exponent.md. expArgCap saturates the
// exponent argument: exp(min(beta / x2, expArgCap)). The default +inf
// evaluates the printed formulas verbatim.
struct CstrParams {
  double tau = 0.015;
  double alpha = 7.2e10;
  double beta = -8750.0;
  double rho = 1.5e13;
  double expArgCap = std::numeric_limits<double>::infinity();
};

// One step of the reactor dynamics (no noise). Throws std::domain_error when
// x2 == 0 or when either component of the result is non-finite, identifying
// the offending term.
Eigen::VectorXd cstrStep(const Eigen::VectorXd& x, const Eigen::VectorXd& u,
                         const CstrParams& params);

using DynamicsFn =
    std::function<Eigen::VectorXd(const Eigen::VectorXd& x, const Eigen::VectorXd& u)>;

// Ground-truth simulator: deterministic dynamics plus sampled process and
// measurement noise. All randomness is drawn from the owned engine so a seed
// fixes every trajectory byte-for-byte.
class PlantSimulator {
 public:
  PlantSimulator(PlantDimensions dims, DynamicsFn dynamics, Zonotope processNoise,
                 Zonotope measurementNoise, std::uint64_t seed);

  const PlantDimensions& dims() const { return dims_; }
  const Zonotope& processNoise() const { return processNoise_; }
  const Zonotope& measurementNoise() const { return measurementNoise_; }

  // x+ = f(x, u) + w with w sampled from the process noise zonotope.
  Eigen::VectorXd step(const Eigen::VectorXd& state, const Eigen::VectorXd& input);
  // y = H x + v with v sampled from the measurement noise zonotope.
  Eigen::VectorXd measure(const Eigen::VectorXd& state);

  void reseed(std::uint64_t seed) { rng_.seed(seed); }
  std::mt19937_64& rng() { return rng_; }

 private:
  PlantDimensions dims_;
  DynamicsFn dynamics_;
  Zonotope processNoise_;
  Zonotope measurementNoise_;
  std::mt19937_64 rng_;
};

// Uniform sample over the generator cube: c + G beta, beta ~ U[-1,1]^g.
Eigen::VectorXd sampleInZonotope(const Zonotope& z, std::mt19937_64& rng);

// Simulation output. Ground-truth states are quarantined here: the Trajectory
// handed to the data-driven pipeline carries inputs and outputs only.
struct SimulatedTrajectory {
  Trajectory trajectory;
  Eigen::MatrixXd states;  // stateDim x length; empty unless recording was requested
};

// Roll the plant forward under the given inputs (inputDim x length). Records
// y(k) for every column and applies the dynamics between columns. Enforces
// the state bound ||x||_inf <= eta at every step and throws std::runtime_error
// with the step index on violation.
SimulatedTrajectory simulateTrajectory(PlantSimulator& plant, const Eigen::VectorXd& x0,
                                       const Eigen::MatrixXd& inputs, int trajectoryId,
                                       bool recordStates);

// Reactor plant with the benchmark output map H = [[1, 0.001], [-0.01, 1]]
// and state bound eta = 22.
PlantSimulator makeCstrPlant(const CstrParams& params, const Zonotope& processNoise,
                             const Zonotope& measurementNoise, std::uint64_t seed);

// Linear test plant x+ = A x + B u (+w), y = H x (+v), for exact-recovery
// tests of the estimator.
PlantSimulator makeLinearPlant(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                               const Eigen::MatrixXd& outputMap, double stateBound,
                               const Zonotope& processNoise, const Zonotope& measurementNoise,
                               std::uint64_t seed);

// Monte-Carlo verification of reachable-set containment.
struct ContainmentReport {
  int samples = 0;
  int horizon = 0;
  // Fraction of sampled rollouts whose output at step k+1 lies in
  // outputSets[k], and the worst membership scale observed there (<= 1 means
  // contained).
  std::vector<double> stepFractions;
  std::vector<double> worstScales;

  bool allContained() const;
};

// Draws x0 from initialStateSet and inputs from inputSet, simulates the true
// plant for `horizon = reach.outputSets.size()` steps, and checks each
// measured output against the corresponding reachable set.
ContainmentReport verifyContainment(PlantSimulator& plant, const ReachResult& reach,
                                    const Zonotope& initialStateSet, const Zonotope& inputSet,
                                    int samples, std::uint64_t seed, double tol = 1e-9);

}  // namespace nzpc
