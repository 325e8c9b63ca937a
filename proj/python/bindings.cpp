// Python bindings for the set algebra, the reactor benchmark dynamics and the
// two end-to-end pipelines (reachability verification, closed-loop control).
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstdint>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "nzpc/config.hpp"
#include "nzpc/nzpc.hpp"
#include "nzpc/plant.hpp"
#include "nzpc/qp.hpp"
#include "nzpc/reach.hpp"
#include "nzpc/trajectory.hpp"
#include "nzpc/zonotope.hpp"

namespace py = pybind11;
using namespace nzpc;

namespace {

// Same data-generation procedure as the command-line tool: one simulator
// seeded at data.seed, initial states from the data set, inputs from the
// learning input set.
DataWindow windowFromConfig(const ExperimentConfig& config) {
  const PlantDimensions dims = dimensionsFrom(config);
  PlantSimulator plant = makePlant(config, config.data.seed);
  std::vector<Trajectory> trajectories;
  trajectories.reserve(static_cast<std::size_t>(config.data.trajectories));
  for (int i = 0; i < config.data.trajectories; ++i) {
    const Eigen::VectorXd x0 = sampleInZonotope(config.data.initialStateSet, plant.rng());
    Eigen::MatrixXd inputs(dims.inputDim, config.data.length);
    for (int k = 0; k < config.data.length; ++k) {
      inputs.col(k) = sampleInZonotope(config.reach.inputSet, plant.rng());
    }
    trajectories.push_back(simulateTrajectory(plant, x0, inputs, i, false).trajectory);
  }
  return buildWindow(trajectories, dims);
}

py::dict runReachPipeline(const std::string& configPath, int samples,
                          std::optional<std::uint64_t> seed) {
  const ExperimentConfig config = loadExperimentConfig(configPath);
  const PlantDimensions dims = dimensionsFrom(config);
  const DataWindow window = windowFromConfig(config);

  const Zonotope initialOutputSet =
      linearMap(dims.outputMap, config.reach.initialStateSet) + config.measurementNoise;
  const ReachResult result = reachHorizon(window, initialOutputSet, config.reach.horizon,
                                          reachConfigFrom(config), dims);

  const std::uint64_t verifySeed = seed ? *seed : config.data.seed + 1;
  PlantSimulator plant = makePlant(config, verifySeed);
  const ContainmentReport report = verifyContainment(
      plant, result, config.reach.initialStateSet, config.reach.inputSet, samples, verifySeed);

  py::list centers;
  py::list hullLower;
  py::list hullUpper;
  for (const Zonotope& set : result.outputSets) {
    const IntervalVector hull = toInterval(set);
    centers.append(set.center());
    hullLower.append(hull.lower);
    hullUpper.append(hull.upper);
  }

  py::dict out;
  out["horizon"] = report.horizon;
  out["samples"] = report.samples;
  out["step_fractions"] = report.stepFractions;
  out["worst_scales"] = report.worstScales;
  out["all_contained"] = report.allContained();
  out["output_centers"] = centers;
  out["hull_lower"] = hullLower;
  out["hull_upper"] = hullUpper;
  return out;
}

py::dict runControlPipeline(const std::string& configPath, std::optional<std::uint64_t> seed,
                            std::optional<int> steps) {
  const ExperimentConfig config = loadExperimentConfig(configPath);
  NzpcConfig controller = nzpcConfigFrom(config);
  if (steps) controller.steps = *steps;
  const PlantDimensions dims = dimensionsFrom(config);
  const DataWindow window = windowFromConfig(config);

  const std::uint64_t loopSeed = seed ? *seed : config.data.seed + 1;
  PlantSimulator plant = makePlant(config, loopSeed);
  const ClosedLoopLog log = runClosedLoop(plant, controller, window, loopSeed);

  const Eigen::Index count = static_cast<Eigen::Index>(log.records.size());
  Eigen::MatrixXd outputs(count, dims.outputDim);
  Eigen::MatrixXd inputs(count, dims.inputDim);
  py::list qpStatuses;
  for (Eigen::Index i = 0; i < count; ++i) {
    const ClosedLoopRecord& record = log.records[static_cast<std::size_t>(i)];
    outputs.row(i) = record.output.transpose();
    inputs.row(i) = record.input.transpose();
    qpStatuses.append(std::string(toString(record.qpStatus)));
  }

  py::dict out;
  out["steps_requested"] = controller.steps;
  out["steps_executed"] = static_cast<int>(log.records.size());
  out["violation_count"] = log.violationCount();
  out["any_infeasible"] = log.anyInfeasible();
  out["aborted"] = log.aborted;
  out["abort_reason"] = log.abortReason;
  out["outputs"] = outputs;
  out["inputs"] = inputs;
  out["qp_statuses"] = qpStatuses;
  out["final_output"] = log.finalOutput;
  return out;
}

std::string zonotopeRepr(const Zonotope& z) {
  std::ostringstream out;
  out << "Zonotope(dim=" << z.dim() << ", generators=" << z.generatorCount() << ")";
  return out.str();
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Data-driven reachability analysis and zonotopic predictive control";

  py::class_<Zonotope>(m, "Zonotope",
                       "Set {center + generators @ beta : ||beta||_inf <= 1}; "
                       "generators are stored as columns.")
      .def(py::init<Eigen::VectorXd, Eigen::MatrixXd>(), py::arg("center"),
           py::arg("generators"))
      .def_static("point", &Zonotope::point, py::arg("center"),
                  "Degenerate zonotope with no generators.")
      .def_property_readonly("center", [](const Zonotope& z) { return z.center(); })
      .def_property_readonly("generators", [](const Zonotope& z) { return z.generators(); })
      .def_property_readonly("dim", &Zonotope::dim)
      .def_property_readonly("generator_count", &Zonotope::generatorCount)
      .def("__add__", [](const Zonotope& a, const Zonotope& b) { return a + b; },
           py::arg("other"), "Minkowski sum.")
      .def("__repr__", &zonotopeRepr);

  py::class_<IntervalVector>(m, "IntervalVector",
                             "Axis-aligned box [lower, upper]; bounds may be infinite.")
      .def(py::init<Eigen::VectorXd, Eigen::VectorXd>(), py::arg("lower"), py::arg("upper"))
      .def_property_readonly("lower", [](const IntervalVector& b) { return b.lower; })
      .def_property_readonly("upper", [](const IntervalVector& b) { return b.upper; })
      .def_property_readonly("dim", &IntervalVector::dim)
      .def(
          "contains_point",
          [](const IntervalVector& box, const Eigen::VectorXd& point, double tol) {
            return box.contains(point, tol);
          },
          py::arg("point"), py::arg("tol") = 0.0)
      .def(
          "contains_box",
          [](const IntervalVector& box, const IntervalVector& other, double tol) {
            return box.contains(other, tol);
          },
          py::arg("other"), py::arg("tol") = 0.0);

  m.def("minkowski_sum", &minkowskiSum, py::arg("a"), py::arg("b"),
        "Minkowski sum: centers add, generator columns concatenate.");
  m.def("linear_map", &linearMap, py::arg("map"), py::arg("zonotope"),
        "Image of a zonotope under a linear map.");
  m.def("cartesian_product", &cartesianProduct, py::arg("a"), py::arg("b"),
        "Stacked centers, block-diagonal generators.");
  m.def("to_interval", &toInterval, py::arg("zonotope"),
        "Tight interval hull [c - sum|g|, c + sum|g|].");
  m.def("from_interval", &fromInterval, py::arg("box"),
        "Axis-aligned zonotope for a finite box; zero-width dimensions "
        "contribute no generator column.");
  m.def("reduce_order", &reduceOrder, py::arg("zonotope"), py::arg("max_generators"),
        "Order reduction by the box method; the result is a superset.");
  m.def(
      "contains_point",
      [](const Zonotope& z, const Eigen::VectorXd& point, double tol) {
        const PointContainment result = containsPoint(z, point, tol);
        return std::make_pair(result.contained(), result.scale);
      },
      py::arg("zonotope"), py::arg("point"), py::arg("tol") = 1e-9,
      "Exact membership test; returns (contained, scale) where the point is "
      "inside iff scale <= 1 + tol.");

  m.def(
      "cstr_step",
      [](const Eigen::VectorXd& x, const Eigen::VectorXd& u, double tau, double alpha,
         double beta, double rho, double exp_arg_cap) {
        CstrParams params;
        params.tau = tau;
        params.alpha = alpha;
        params.beta = beta;
        params.rho = rho;
        params.expArgCap = exp_arg_cap;
        return cstrStep(x, u, params);
      },
      py::arg("x"), py::arg("u"), py::arg("tau") = CstrParams{}.tau,
      py::arg("alpha") = CstrParams{}.alpha, py::arg("beta") = CstrParams{}.beta,
      py::arg("rho") = CstrParams{}.rho, py::arg("exp_arg_cap") = CstrParams{}.expArgCap,
      "One noise-free step of the stirred-tank reactor benchmark dynamics.");

  m.def("run_reach", &runReachPipeline, py::arg("config_path"), py::arg("samples") = 1000,
        py::arg("seed") = std::nullopt,
        "Learn a model from generated data, propagate the reachable output "
        "sets and Monte-Carlo verify containment. Returns a summary dict.");
  m.def("run_closed_loop", &runControlPipeline, py::arg("config_path"),
        py::arg("seed") = std::nullopt, py::arg("steps") = std::nullopt,
        "Run the receding-horizon controller against the simulated plant. "
        "Returns a summary dict with per-step outputs and inputs.");
}
