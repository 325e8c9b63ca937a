#include "nzpc/trajectory.hpp"

#include <Eigen/SVD>

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace nzpc {

namespace {

std::string formatDouble(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::vector<std::string> splitCsvLine(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

}  // namespace

PlantDimensions makePlantDimensions(Eigen::Index inputDim,
                                    Eigen::MatrixXd outputMap,
                                    double stateBound) {
  if (inputDim < 1) {
    throw std::invalid_argument("PlantDimensions: inputDim must be positive");
  }
  if (outputMap.rows() < 1 || outputMap.cols() < 1) {
    throw std::invalid_argument("PlantDimensions: output map is empty");
  }
  if (outputMap.rows() > outputMap.cols()) {
    throw std::invalid_argument(
        "PlantDimensions: output map has more rows than columns; it cannot "
        "have full row rank");
  }
  if (!(stateBound > 0.0) || !std::isfinite(stateBound)) {
    throw std::invalid_argument("PlantDimensions: state bound must be positive");
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(outputMap);
  const Eigen::VectorXd& sv = svd.singularValues();
  const double threshold = 1e-10 * sv[0];
  Eigen::Index rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    if (sv[i] > threshold) ++rank;
  }
  if (rank < outputMap.rows()) {
    throw std::invalid_argument(
        "PlantDimensions: output map is not full row rank (numerical rank " +
        std::to_string(rank) + " of " + std::to_string(outputMap.rows()) + ")");
  }
  PlantDimensions dims;
  dims.stateDim = outputMap.cols();
  dims.inputDim = inputDim;
  dims.outputDim = outputMap.rows();
  dims.outputMap = std::move(outputMap);
  dims.stateBound = stateBound;
  return dims;
}

Eigen::MatrixXd pseudoRightInverse(const Eigen::MatrixXd& rowFullRank) {
  if (rowFullRank.rows() > rowFullRank.cols()) {
    throw std::invalid_argument("pseudoRightInverse: more rows than columns");
  }
  Eigen::MatrixXd gram = rowFullRank * rowFullRank.transpose();
  Eigen::LDLT<Eigen::MatrixXd> ldlt(gram);
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) {
    throw std::invalid_argument(
        "pseudoRightInverse: matrix is not full row rank");
  }
  // H^T (H H^T)^{-1}, computed as the solve (H H^T)^{-T} H applied transposed.
  return ldlt.solve(rowFullRank).transpose();
}

Zonotope stateFromOutput(const Eigen::VectorXd& output,
                         const Zonotope& measurementNoise,
                         const PlantDimensions& dims) {
  if (output.size() != dims.outputDim) {
    throw std::invalid_argument("stateFromOutput: output dimension mismatch");
  }
  if (measurementNoise.dim() != dims.outputDim) {
    throw std::invalid_argument(
        "stateFromOutput: measurement noise dimension mismatch");
  }
  const Eigen::MatrixXd hPinv = pseudoRightInverse(dims.outputMap);
  const Eigen::MatrixXd slack =
      Eigen::MatrixXd::Identity(dims.stateDim, dims.stateDim) -
      hPinv * dims.outputMap;
  Eigen::VectorXd center = hPinv * (output - measurementNoise.center());
  Eigen::MatrixXd gens(dims.stateDim,
                       measurementNoise.generatorCount() + dims.stateDim);
  gens << hPinv * measurementNoise.generators(), dims.stateBound * slack;
  return Zonotope(std::move(center), std::move(gens));
}

DataWindow buildWindow(const std::vector<Trajectory>& trajectories,
                       const PlantDimensions& dims) {
  if (trajectories.empty()) {
    throw std::invalid_argument("buildWindow: no trajectories");
  }
  Eigen::Index total = 0;
  for (const auto& traj : trajectories) {
    if (traj.outputs.rows() != dims.outputDim ||
        traj.inputs.rows() != dims.inputDim) {
      throw std::invalid_argument(
          "buildWindow: trajectory " + std::to_string(traj.id) +
          " has inconsistent dimensions");
    }
    if (traj.inputs.cols() != traj.outputs.cols()) {
      throw std::invalid_argument(
          "buildWindow: trajectory " + std::to_string(traj.id) +
          " has unequal input/output lengths");
    }
    if (traj.length() < 2) {
      throw std::invalid_argument(
          "buildWindow: trajectory " + std::to_string(traj.id) +
          " is shorter than two samples");
    }
    total += traj.length() - 1;
  }
  DataWindow w;
  w.outputsNext.resize(dims.outputDim, total);
  w.outputsPrev.resize(dims.outputDim, total);
  w.inputsPrev.resize(dims.inputDim, total);
  Eigen::Index col = 0;
  for (const auto& traj : trajectories) {
    const Eigen::Index len = traj.length();
    w.outputsNext.middleCols(col, len - 1) = traj.outputs.rightCols(len - 1);
    w.outputsPrev.middleCols(col, len - 1) = traj.outputs.leftCols(len - 1);
    w.inputsPrev.middleCols(col, len - 1) = traj.inputs.leftCols(len - 1);
    col += len - 1;
  }
  return w;
}

DataWindow slideWindow(const DataWindow& window, const Eigen::VectorXd& input,
                       const Eigen::VectorXd& prevOutput,
                       const Eigen::VectorXd& newOutput) {
  const Eigen::Index t = window.columns();
  if (t < 1) {
    throw std::invalid_argument("slideWindow: empty window");
  }
  if (input.size() != window.inputsPrev.rows() ||
      prevOutput.size() != window.outputsPrev.rows() ||
      newOutput.size() != window.outputsNext.rows()) {
    throw std::invalid_argument("slideWindow: dimension mismatch");
  }
  DataWindow next;
  next.outputsNext.resize(window.outputsNext.rows(), t);
  next.outputsPrev.resize(window.outputsPrev.rows(), t);
  next.inputsPrev.resize(window.inputsPrev.rows(), t);
  next.outputsNext << window.outputsNext.rightCols(t - 1), newOutput;
  next.outputsPrev << window.outputsPrev.rightCols(t - 1), prevOutput;
  next.inputsPrev << window.inputsPrev.rightCols(t - 1), input;
  return next;
}

void writeTrajectoriesCsv(const std::string& path,
                          const std::vector<Trajectory>& trajectories) {
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("writeTrajectoriesCsv: cannot open " + path);
  }
  if (trajectories.empty()) {
    throw std::invalid_argument("writeTrajectoriesCsv: no trajectories");
  }
  const Eigen::Index nu = trajectories.front().inputs.rows();
  const Eigen::Index ny = trajectories.front().outputs.rows();
  out << "traj_id,k";
  for (Eigen::Index i = 1; i <= nu; ++i) out << ",u_" << i;
  for (Eigen::Index i = 1; i <= ny; ++i) out << ",y_" << i;
  out << "\n";
  for (const auto& traj : trajectories) {
    for (Eigen::Index k = 0; k < traj.length(); ++k) {
      out << traj.id << "," << k;
      for (Eigen::Index i = 0; i < nu; ++i) {
        out << "," << formatDouble(traj.inputs(i, k));
      }
      for (Eigen::Index i = 0; i < ny; ++i) {
        out << "," << formatDouble(traj.outputs(i, k));
      }
      out << "\n";
    }
  }
}

std::vector<Trajectory> readTrajectoriesCsv(const std::string& path,
                                            const PlantDimensions& dims) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("readTrajectoriesCsv: cannot open " + path);
  }
  std::string line;
  if (!std::getline(in, line)) {
    throw std::runtime_error("readTrajectoriesCsv: empty file " + path);
  }
  if (!line.empty() && line.back() == '\r') line.pop_back();
  std::string expected = "traj_id,k";
  for (Eigen::Index i = 1; i <= dims.inputDim; ++i) {
    expected += ",u_" + std::to_string(i);
  }
  for (Eigen::Index i = 1; i <= dims.outputDim; ++i) {
    expected += ",y_" + std::to_string(i);
  }
  if (line != expected) {
    throw std::runtime_error("readTrajectoriesCsv: bad header at line 1 of " +
                             path + " (expected '" + expected + "')");
  }

  struct Row {
    int id;
    long k;
    Eigen::VectorXd u, y;
  };
  std::vector<Row> rows;
  long lineNo = 1;
  const std::size_t fieldCount =
      static_cast<std::size_t>(2 + dims.inputDim + dims.outputDim);
  while (std::getline(in, line)) {
    ++lineNo;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = splitCsvLine(line);
    if (fields.size() != fieldCount) {
      throw std::runtime_error("readTrajectoriesCsv: line " +
                               std::to_string(lineNo) + " has " +
                               std::to_string(fields.size()) + " fields, want " +
                               std::to_string(fieldCount));
    }
    Row row;
    try {
      std::size_t pos = 0;
      row.id = std::stoi(fields[0], &pos);
      row.k = std::stol(fields[1]);
      row.u.resize(dims.inputDim);
      row.y.resize(dims.outputDim);
      for (Eigen::Index i = 0; i < dims.inputDim; ++i) {
        row.u[i] = std::stod(fields[static_cast<std::size_t>(2 + i)]);
      }
      for (Eigen::Index i = 0; i < dims.outputDim; ++i) {
        row.y[i] =
            std::stod(fields[static_cast<std::size_t>(2 + dims.inputDim + i)]);
      }
    } catch (const std::exception&) {
      throw std::runtime_error("readTrajectoriesCsv: malformed value at line " +
                               std::to_string(lineNo));
    }
    if (!rows.empty() && row.id == rows.back().id &&
        row.k != rows.back().k + 1) {
      throw std::runtime_error(
          "readTrajectoriesCsv: non-contiguous sample index at line " +
          std::to_string(lineNo));
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) {
    throw std::runtime_error("readTrajectoriesCsv: no data rows in " + path);
  }

  std::vector<Trajectory> trajectories;
  std::size_t start = 0;
  for (std::size_t i = 1; i <= rows.size(); ++i) {
    if (i == rows.size() || rows[i].id != rows[start].id) {
      Trajectory traj;
      traj.id = rows[start].id;
      const Eigen::Index len = static_cast<Eigen::Index>(i - start);
      traj.inputs.resize(dims.inputDim, len);
      traj.outputs.resize(dims.outputDim, len);
      for (Eigen::Index k = 0; k < len; ++k) {
        traj.inputs.col(k) = rows[start + static_cast<std::size_t>(k)].u;
        traj.outputs.col(k) = rows[start + static_cast<std::size_t>(k)].y;
      }
      trajectories.push_back(std::move(traj));
      start = i;
    }
  }
  return trajectories;
}

void writeStatesCsv(const std::string& path, const std::vector<int>& ids,
                    const std::vector<Eigen::MatrixXd>& states) {
  if (ids.size() != states.size()) {
    throw std::invalid_argument("writeStatesCsv: id/state count mismatch");
  }
  if (states.empty()) {
    throw std::invalid_argument("writeStatesCsv: no states");
  }
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("writeStatesCsv: cannot open " + path);
  }
  const Eigen::Index nx = states.front().rows();
  out << "traj_id,k";
  for (Eigen::Index i = 1; i <= nx; ++i) out << ",x_" << i;
  out << "\n";
  for (std::size_t t = 0; t < states.size(); ++t) {
    for (Eigen::Index k = 0; k < states[t].cols(); ++k) {
      out << ids[t] << "," << k;
      for (Eigen::Index i = 0; i < nx; ++i) {
        out << "," << formatDouble(states[t](i, k));
      }
      out << "\n";
    }
  }
}

}  // namespace nzpc
