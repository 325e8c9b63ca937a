#include "nzpc/serialization.hpp"

#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace nzpc {

namespace {

std::string formatDouble(double value) {
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), "%.17g", value);
  return buffer;
}

[[noreturn]] void fail(const std::string& context, const std::string& what) {
  throw std::runtime_error("json: " + context + " " + what);
}

}  // namespace

nlohmann::json vectorToJson(const Eigen::VectorXd& v) {
  nlohmann::json arr = nlohmann::json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    arr.push_back(v[i]);
  }
  return arr;
}

nlohmann::json matrixToJson(const Eigen::MatrixXd& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      row.push_back(m(i, j));
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::VectorXd vectorFromJson(const nlohmann::json& j, const std::string& context) {
  if (!j.is_array()) fail(context, "must be an array of numbers");
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) fail(context, "entry " + std::to_string(i) + " is not a number");
    v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
  }
  return v;
}

Eigen::MatrixXd matrixFromJson(const nlohmann::json& j, const std::string& context) {
  if (!j.is_array() || j.empty()) fail(context, "must be a non-empty array of rows");
  const std::size_t cols = j[0].is_array() ? j[0].size() : 0;
  Eigen::MatrixXd m(static_cast<Eigen::Index>(j.size()), static_cast<Eigen::Index>(cols));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_array() || j[i].size() != cols) {
      fail(context, "row " + std::to_string(i) + " is not an array of length " +
                        std::to_string(cols));
    }
    for (std::size_t k = 0; k < cols; ++k) {
      if (!j[i][k].is_number()) {
        fail(context, "entry (" + std::to_string(i) + "," + std::to_string(k) +
                          ") is not a number");
      }
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = j[i][k].get<double>();
    }
  }
  return m;
}

nlohmann::json toJson(const Zonotope& z) {
  nlohmann::json generators = nlohmann::json::array();
  for (Eigen::Index g = 0; g < z.generatorCount(); ++g) {
    generators.push_back(vectorToJson(z.generators().col(g)));
  }
  return nlohmann::json{{"center", vectorToJson(z.center())},
                        {"generators", std::move(generators)}};
}

Zonotope zonotopeFromJson(const nlohmann::json& j, const std::string& context) {
  if (!j.is_object() || !j.contains("center")) {
    fail(context, "must be an object with \"center\" and \"generators\"");
  }
  Eigen::VectorXd center = vectorFromJson(j.at("center"), context + ".center");
  Eigen::MatrixXd generators(center.size(), 0);
  if (j.contains("generators") && !j.at("generators").empty()) {
    const nlohmann::json& gens = j.at("generators");
    if (!gens.is_array()) fail(context, ".generators must be an array of generator vectors");
    generators.resize(center.size(), static_cast<Eigen::Index>(gens.size()));
    for (std::size_t g = 0; g < gens.size(); ++g) {
      const Eigen::VectorXd column =
          vectorFromJson(gens[g], context + ".generators[" + std::to_string(g) + "]");
      if (column.size() != center.size()) {
        fail(context, ".generators[" + std::to_string(g) + "] length does not match the center");
      }
      generators.col(static_cast<Eigen::Index>(g)) = column;
    }
  }
  return Zonotope(std::move(center), std::move(generators));
}

nlohmann::json toJson(const LinearizedModel& model) {
  return nlohmann::json{
      {"coefficients", matrixToJson(model.coefficients)},
      {"state_dim", model.stateDim},
      {"input_dim", model.inputDim},
      {"point",
       {{"output_center", vectorToJson(model.point.outputCenter)},
        {"noise_center", vectorToJson(model.point.noiseCenter)},
        {"input_center", vectorToJson(model.point.inputCenter)}}}};
}

nlohmann::json toJson(const ReachResult& result) {
  nlohmann::json outputSets = nlohmann::json::array();
  for (const Zonotope& set : result.outputSets) {
    outputSets.push_back(toJson(set));
  }
  nlohmann::json stateSets = nlohmann::json::array();
  for (const Zonotope& set : result.stateSets) {
    stateSets.push_back(toJson(set));
  }
  return nlohmann::json{{"model", toJson(result.model)},
                        {"mismatch_bound", toJson(result.mismatchBound)},
                        {"coverage_bound", toJson(result.coverageBound)},
                        {"output_sets", std::move(outputSets)},
                        {"state_sets", std::move(stateSets)}};
}

nlohmann::json toJson(const ContainmentReport& report) {
  return nlohmann::json{{"samples", report.samples},
                        {"horizon", report.horizon},
                        {"step_fractions", report.stepFractions},
                        {"worst_scales", report.worstScales},
                        {"all_contained", report.allContained()}};
}

nlohmann::json readJsonFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("json: cannot open " + path);
  }
  return nlohmann::json::parse(in, nullptr, /*allow_exceptions=*/true,
                               /*ignore_comments=*/true);
}

void writeJsonFile(const std::string& path, const nlohmann::json& j) {
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("json: cannot open " + path + " for writing");
  }
  out << j.dump(2) << "\n";
  if (!out) {
    throw std::runtime_error("json: failed writing " + path);
  }
}

void writeClosedLoopCsv(const std::string& path, const ClosedLoopLog& log,
                        Eigen::Index outputDim, Eigen::Index inputDim) {
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("csv: cannot open " + path + " for writing");
  }
  out << "step";
  for (Eigen::Index i = 1; i <= outputDim; ++i) out << ",y_" << i;
  for (Eigen::Index i = 1; i <= inputDim; ++i) out << ",u_" << i;
  out << ",qp_status,qp_iters,solve_ms";
  for (Eigen::Index i = 1; i <= outputDim; ++i) out << ",hull_lo_" << i;
  for (Eigen::Index i = 1; i <= outputDim; ++i) out << ",hull_hi_" << i;
  out << "\n";

  for (const ClosedLoopRecord& record : log.records) {
    out << record.step;
    for (Eigen::Index i = 0; i < outputDim; ++i) out << "," << formatDouble(record.output[i]);
    for (Eigen::Index i = 0; i < inputDim; ++i) out << "," << formatDouble(record.input[i]);
    out << "," << toString(record.qpStatus) << "," << record.qpIterations << ","
        << formatDouble(record.solveMs);
    for (Eigen::Index i = 0; i < outputDim; ++i) {
      out << "," << formatDouble(record.hullLower[i]);
    }
    for (Eigen::Index i = 0; i < outputDim; ++i) {
      out << "," << formatDouble(record.hullUpper[i]);
    }
    out << "\n";
  }

  if (log.finalOutput.size() == outputDim) {
    out << log.records.size();
    for (Eigen::Index i = 0; i < outputDim; ++i) {
      out << "," << formatDouble(log.finalOutput[i]);
    }
    for (Eigen::Index i = 0; i < inputDim; ++i) out << ",";
    out << ",,,";
    for (Eigen::Index i = 0; i < 2 * outputDim; ++i) out << ",";
    out << "\n";
  }
  if (!out) {
    throw std::runtime_error("csv: failed writing " + path);
  }
}

}  // namespace nzpc
