// Command-line experiment runner: offline data generation, data-driven
// reachability with Monte-Carlo verification, closed-loop predictive control
// and a naive smoothness estimator. All experiments are driven by a JSON
// config (comments allowed); command-line flags override config fields.
#include "CLI11.hpp"

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <string>
#include <utility>
#include <vector>

#include "nzpc/config.hpp"
#include "nzpc/estimate.hpp"
#include "nzpc/nzpc.hpp"
#include "nzpc/plant.hpp"
#include "nzpc/reach.hpp"
#include "nzpc/serialization.hpp"
#include "nzpc/trajectory.hpp"

namespace fs = std::filesystem;
using namespace nzpc;

namespace {

constexpr int kExitViolation = 2;  // constraint violation / infeasibility / containment failure

struct Options {
  std::string configPath;
  std::string dataPath;
  std::string outDir;
  std::uint64_t seed = 0;
  int samples = 1000;
  int steps = 0;
  bool dumpSets = false;
  bool recordStates = false;
  bool seedGiven = false;
  bool samplesGiven = false;
  bool stepsGiven = false;
  bool outGiven = false;
};

fs::path ensureOutDir(const ExperimentConfig& config, const Options& opts) {
  const fs::path dir = opts.outGiven ? fs::path(opts.outDir) : fs::path(config.outputDir);
  fs::create_directories(dir);
  return dir;
}

std::vector<SimulatedTrajectory> generateTrajectories(const ExperimentConfig& config,
                                                      std::uint64_t seed, bool recordStates) {
  PlantSimulator plant = makePlant(config, seed);
  std::vector<SimulatedTrajectory> rollouts;
  rollouts.reserve(static_cast<std::size_t>(config.data.trajectories));
  for (int i = 0; i < config.data.trajectories; ++i) {
    const Eigen::VectorXd x0 = sampleInZonotope(config.data.initialStateSet, plant.rng());
    Eigen::MatrixXd inputs(plant.dims().inputDim, config.data.length);
    for (int k = 0; k < config.data.length; ++k) {
      inputs.col(k) = sampleInZonotope(config.reach.inputSet, plant.rng());
    }
    rollouts.push_back(simulateTrajectory(plant, x0, inputs, i, recordStates));
  }
  return rollouts;
}

DataWindow loadOrGenerateWindow(const ExperimentConfig& config, const PlantDimensions& dims,
                                const std::string& dataPath) {
  if (!dataPath.empty()) {
    return buildWindow(readTrajectoriesCsv(dataPath, dims), dims);
  }
  std::vector<Trajectory> trajectories;
  for (auto& rollout : generateTrajectories(config, config.data.seed, false)) {
    trajectories.push_back(std::move(rollout.trajectory));
  }
  return buildWindow(trajectories, dims);
}

int runGenData(const Options& opts) {
  ExperimentConfig config = loadExperimentConfig(opts.configPath);
  if (opts.samplesGiven) config.data.trajectories = opts.samples;
  if (opts.seedGiven) config.data.seed = opts.seed;
  validateExperimentConfig(config);
  const fs::path dir = ensureOutDir(config, opts);

  const auto rollouts = generateTrajectories(config, config.data.seed, opts.recordStates);
  std::vector<Trajectory> trajectories;
  trajectories.reserve(rollouts.size());
  for (const auto& rollout : rollouts) {
    trajectories.push_back(rollout.trajectory);
  }
  const fs::path dataFile = dir / "trajectories.csv";
  writeTrajectoriesCsv(dataFile.string(), trajectories);
  std::cout << "wrote " << dataFile.string() << "\n";

  if (opts.recordStates) {
    std::vector<int> ids;
    std::vector<Eigen::MatrixXd> states;
    for (const auto& rollout : rollouts) {
      ids.push_back(rollout.trajectory.id);
      states.push_back(rollout.states);
    }
    const fs::path statesFile = dir / "states.csv";
    writeStatesCsv(statesFile.string(), ids, states);
    std::cout << "wrote " << statesFile.string() << " (ground truth sidecar)\n";
  }

  long rawSamples = 0;
  long usableColumns = 0;
  for (const auto& trajectory : trajectories) {
    rawSamples += trajectory.length();
    usableColumns += trajectory.length() - 1;
  }
  std::cout << "trajectories: " << trajectories.size() << ", raw samples: " << rawSamples
            << ", usable window columns: " << usableColumns << "\n";
  return 0;
}

void printContainment(const ContainmentReport& report) {
  for (int k = 0; k < report.horizon; ++k) {
    std::cout << "step " << k + 1 << ": contained "
              << report.stepFractions[static_cast<std::size_t>(k)] * 100.0 << "%"
              << ", worst membership scale "
              << report.worstScales[static_cast<std::size_t>(k)] << "\n";
  }
  std::cout << (report.allContained() ? "all sampled outputs contained"
                                      : "CONTAINMENT FAILURE: some outputs escaped")
            << " (" << report.samples << " samples)\n";
}

int runReachLike(const Options& opts, bool dumpReach) {
  ExperimentConfig config = loadExperimentConfig(opts.configPath);
  const PlantDimensions dims = dimensionsFrom(config);
  const fs::path dir = ensureOutDir(config, opts);
  const DataWindow window = loadOrGenerateWindow(config, dims, opts.dataPath);

  const int horizon = opts.stepsGiven ? opts.steps : config.reach.horizon;
  const Zonotope initialOutputSet =
      linearMap(dims.outputMap, config.reach.initialStateSet) + config.measurementNoise;
  const ReachResult result =
      reachHorizon(window, initialOutputSet, horizon, reachConfigFrom(config), dims);
  if (dumpReach) {
    const fs::path reachFile = dir / "reach.json";
    writeJsonFile(reachFile.string(), toJson(result));
    std::cout << "wrote " << reachFile.string() << "\n";
  }

  const int samples = opts.samplesGiven ? opts.samples : 1000;
  const std::uint64_t verifySeed = opts.seedGiven ? opts.seed : config.data.seed + 1;
  PlantSimulator plant = makePlant(config, verifySeed);
  const ContainmentReport report =
      verifyContainment(plant, result, config.reach.initialStateSet, config.reach.inputSet,
                        samples, verifySeed);
  const fs::path reportFile = dir / "containment.json";
  writeJsonFile(reportFile.string(), toJson(report));
  std::cout << "wrote " << reportFile.string() << "\n";
  printContainment(report);
  return (samples > 0 && !report.allContained()) ? kExitViolation : 0;
}

nlohmann::json setsJson(const ClosedLoopLog& log) {
  nlohmann::json steps = nlohmann::json::array();
  for (const ClosedLoopRecord& record : log.records) {
    nlohmann::json sets = nlohmann::json::array();
    for (const Zonotope& set : record.predictedSets) {
      sets.push_back(toJson(set));
    }
    steps.push_back(nlohmann::json{{"step", record.step}, {"sets", std::move(sets)}});
  }
  return steps;
}

int runNzpc(const Options& opts) {
  ExperimentConfig config = loadExperimentConfig(opts.configPath);
  if (!config.nzpc) {
    throw std::runtime_error("config: the \"nzpc\" section is required for the nzpc command");
  }
  if (opts.stepsGiven) config.nzpc->steps = opts.steps;
  const PlantDimensions dims = dimensionsFrom(config);
  const fs::path dir = ensureOutDir(config, opts);
  const NzpcConfig controller = nzpcConfigFrom(config);
  const DataWindow window = loadOrGenerateWindow(config, dims, opts.dataPath);

  const std::uint64_t loopSeed = opts.seedGiven ? opts.seed : config.data.seed + 1;
  PlantSimulator plant = makePlant(config, loopSeed);
  const ClosedLoopLog log = runClosedLoop(plant, controller, window, loopSeed);

  const fs::path logFile = dir / "closed_loop.csv";
  writeClosedLoopCsv(logFile.string(), log, dims.outputDim, dims.inputDim);
  std::cout << "wrote " << logFile.string() << "\n";
  if (opts.dumpSets) {
    const fs::path setsFile = dir / "closed_loop_sets.json";
    writeJsonFile(setsFile.string(), setsJson(log));
    std::cout << "wrote " << setsFile.string() << "\n";
  }

  std::cout << "steps executed: " << log.records.size() << "/" << controller.steps
            << ", constraint violations: " << log.violationCount() << "\n";
  if (log.aborted) {
    std::cout << "ABORTED at step " << log.abortStep << ": " << log.abortReason << "\n";
  } else if (log.finalOutput.size() > 0) {
    std::cout << "final output:";
    for (Eigen::Index i = 0; i < log.finalOutput.size(); ++i) {
      std::cout << " " << log.finalOutput[i];
    }
    std::cout << "\n";
  }
  return (log.violationCount() > 0 || log.anyInfeasible()) ? kExitViolation : 0;
}

int runEstimateLipschitz(const Options& opts) {
  const ExperimentConfig config = loadExperimentConfig(opts.configPath);
  const PlantDimensions dims = dimensionsFrom(config);
  const DataWindow window = loadOrGenerateWindow(config, dims, opts.dataPath);
  const LipschitzEstimate estimate = estimateLipschitz(window, dims);

  std::cout << "naive pairwise-slope estimates (heuristics from finite noisy data, "
               "not certified bounds):\n";
  for (Eigen::Index i = 0; i < estimate.slopes.size(); ++i) {
    std::cout << "  output " << i + 1 << " slope: " << estimate.slopes[i] << "\n";
  }
  std::cout << "  covering radius (max nearest-neighbour gap): " << estimate.coveringRadius
            << "\n  pairs used: " << estimate.pairsUsed << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Data-driven reachability analysis and zonotopic predictive control"};
  app.require_subcommand(1);
  Options opts;
  int exitCode = 0;

  struct Bound {
    CLI::Option* seed = nullptr;
    CLI::Option* samples = nullptr;
    CLI::Option* steps = nullptr;
    CLI::Option* out = nullptr;
  };
  auto bindCommon = [&opts](CLI::App* cmd) {
    Bound bound;
    cmd->add_option("--config", opts.configPath, "experiment config file (JSON with comments)")
        ->required()
        ->check(CLI::ExistingFile);
    bound.seed = cmd->add_option("--seed", opts.seed, "override the random seed");
    bound.out = cmd->add_option("--out", opts.outDir, "output directory (default from config)");
    return bound;
  };
  auto refreshFlags = [&opts](const Bound& bound) {
    opts.seedGiven = bound.seed->count() > 0;
    opts.outGiven = bound.out->count() > 0;
    opts.samplesGiven = bound.samples != nullptr && bound.samples->count() > 0;
    opts.stepsGiven = bound.steps != nullptr && bound.steps->count() > 0;
  };

  auto* genData = app.add_subcommand("gen-data", "generate offline input-output trajectories");
  {
    Bound bound = bindCommon(genData);
    bound.samples =
        genData->add_option("--samples", opts.samples, "number of trajectories to generate");
    genData->add_flag("--record-states", opts.recordStates,
                      "also write the ground-truth state sidecar");
    genData->callback([&opts, bound, &exitCode, &refreshFlags]() {
      refreshFlags(bound);
      exitCode = runGenData(opts);
    });
  }

  auto* reach = app.add_subcommand(
      "reach", "data-driven reachable sets plus Monte-Carlo containment check");
  {
    Bound bound = bindCommon(reach);
    reach->add_option("--data", opts.dataPath, "trajectory CSV (default: generate from config)")
        ->check(CLI::ExistingFile);
    bound.samples =
        reach->add_option("--samples", opts.samples, "verification sample count (default 1000)");
    bound.steps = reach->add_option("--steps", opts.steps, "override the reach horizon");
    reach->callback([&opts, bound, &exitCode, &refreshFlags]() {
      refreshFlags(bound);
      exitCode = runReachLike(opts, /*dumpReach=*/true);
    });
  }

  auto* verify = app.add_subcommand(
      "verify", "Monte-Carlo containment verification of the reachability pipeline");
  {
    Bound bound = bindCommon(verify);
    verify->add_option("--data", opts.dataPath, "trajectory CSV (default: generate from config)")
        ->check(CLI::ExistingFile);
    bound.samples =
        verify->add_option("--samples", opts.samples, "verification sample count (default 1000)");
    bound.steps = verify->add_option("--steps", opts.steps, "override the reach horizon");
    verify->callback([&opts, bound, &exitCode, &refreshFlags]() {
      refreshFlags(bound);
      exitCode = runReachLike(opts, /*dumpReach=*/false);
    });
  }

  auto* nzpcCmd = app.add_subcommand("nzpc", "closed-loop zonotopic predictive control");
  {
    Bound bound = bindCommon(nzpcCmd);
    nzpcCmd->add_option("--data", opts.dataPath,
                        "initial trajectory CSV (default: generate from config)")
        ->check(CLI::ExistingFile);
    bound.steps = nzpcCmd->add_option("--steps", opts.steps, "override the closed-loop length");
    nzpcCmd->add_flag("--dump-sets", opts.dumpSets,
                      "also dump the per-step predicted reachable sets as JSON");
    nzpcCmd->callback([&opts, bound, &exitCode, &refreshFlags]() {
      refreshFlags(bound);
      exitCode = runNzpc(opts);
    });
  }

  auto* estimate = app.add_subcommand(
      "estimate-lipschitz", "naive slope / covering-radius estimates from data");
  {
    Bound bound = bindCommon(estimate);
    estimate->add_option("--data", opts.dataPath,
                         "trajectory CSV (default: generate from config)")
        ->check(CLI::ExistingFile);
    estimate->callback([&opts, bound, &exitCode, &refreshFlags]() {
      refreshFlags(bound);
      exitCode = runEstimateLipschitz(opts);
    });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return exitCode;
}
