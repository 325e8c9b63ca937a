#pragma once

#include <Eigen/Dense>

#include <string>

#include "json.hpp"
#include "nzpc/nzpc.hpp"
#include "nzpc/plant.hpp"
#include "nzpc/reach.hpp"
#include "nzpc/zonotope.hpp"

namespace nzpc {

// JSON conventions:
//  - vectors are plain arrays;
//  - matrices are arrays of rows;
//  - zonotopes are {"center": [...], "generators": [g1, g2, ...]} where each
//    g is one generator vector (a column of the generator matrix).
// The *FromJson readers raise std::runtime_error naming the offending field.
nlohmann::json vectorToJson(const Eigen::VectorXd& v);
nlohmann::json matrixToJson(const Eigen::MatrixXd& m);
Eigen::VectorXd vectorFromJson(const nlohmann::json& j, const std::string& context);
Eigen::MatrixXd matrixFromJson(const nlohmann::json& j, const std::string& context);

nlohmann::json toJson(const Zonotope& z);
Zonotope zonotopeFromJson(const nlohmann::json& j, const std::string& context);

nlohmann::json toJson(const LinearizedModel& model);
nlohmann::json toJson(const ReachResult& result);
nlohmann::json toJson(const ContainmentReport& report);

// File helpers. Reading accepts // and /* */ comments.
nlohmann::json readJsonFile(const std::string& path);
void writeJsonFile(const std::string& path, const nlohmann::json& j);

// Closed-loop log CSV:
//   step,y_1..y_ny,u_1..u_nu,qp_status,qp_iters,solve_ms,
//   hull_lo_1..hull_lo_ny,hull_hi_1..hull_hi_ny
// One row per executed step plus a trailing row holding the final
// measurement (input and solver columns empty).
void writeClosedLoopCsv(const std::string& path, const ClosedLoopLog& log,
                        Eigen::Index outputDim, Eigen::Index inputDim);

}  // namespace nzpc
