#include "nzpc/matrix_zonotope.hpp"

#include <stdexcept>
#include <string>

namespace nzpc {

MatrixZonotope::MatrixZonotope(Eigen::MatrixXd center,
                               std::vector<Eigen::MatrixXd> generators)
    : center_(std::move(center)), generators_(std::move(generators)) {
  if (center_.size() == 0) {
    throw std::invalid_argument("MatrixZonotope: empty center");
  }
  if (!center_.allFinite()) {
    throw std::invalid_argument("MatrixZonotope: non-finite center");
  }
  for (const auto& g : generators_) {
    if (g.rows() != center_.rows() || g.cols() != center_.cols()) {
      throw std::invalid_argument(
          "MatrixZonotope: generator shape mismatch (" +
          std::to_string(g.rows()) + "x" + std::to_string(g.cols()) + " vs " +
          std::to_string(center_.rows()) + "x" + std::to_string(center_.cols()) +
          ")");
    }
    if (!g.allFinite()) {
      throw std::invalid_argument("MatrixZonotope: non-finite generator");
    }
  }
}

Eigen::MatrixXd MatrixZonotope::member(const Eigen::VectorXd& beta) const {
  if (beta.size() != generatorCount()) {
    throw std::invalid_argument("MatrixZonotope::member: coefficient count");
  }
  Eigen::MatrixXd m = center_;
  for (Eigen::Index i = 0; i < generatorCount(); ++i) {
    m += beta[i] * generators_[static_cast<std::size_t>(i)];
  }
  return m;
}

Eigen::MatrixXd MatrixZonotope::sample(std::mt19937_64& rng) const {
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  Eigen::VectorXd beta(generatorCount());
  for (Eigen::Index i = 0; i < generatorCount(); ++i) beta[i] = unit(rng);
  return member(beta);
}

MatrixZonotope concatNoiseZonotope(const Zonotope& noise, Eigen::Index columns) {
  if (columns < 1) {
    throw std::invalid_argument("concatNoiseZonotope: need at least one column");
  }
  const Eigen::Index n = noise.dim();
  const Eigen::Index g = noise.generatorCount();
  Eigen::MatrixXd center = noise.center().replicate(1, columns);
  std::vector<Eigen::MatrixXd> generators;
  generators.reserve(static_cast<std::size_t>(columns * g));
  for (Eigen::Index t = 0; t < columns; ++t) {
    for (Eigen::Index i = 0; i < g; ++i) {
      Eigen::MatrixXd gen = Eigen::MatrixXd::Zero(n, columns);
      gen.col(t) = noise.generators().col(i);
      generators.push_back(std::move(gen));
    }
  }
  return MatrixZonotope(std::move(center), std::move(generators));
}

}  // namespace nzpc
