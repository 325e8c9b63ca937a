#pragma once

#include <Eigen/Dense>

#include <random>
#include <vector>

#include "nzpc/zonotope.hpp"

namespace nzpc {

/// Matrix zonotope { C + sum_i beta_i G_i : ||beta||_inf <= 1 } with matrix
/// center and matrix generators of identical shape.
class MatrixZonotope {
 public:
  MatrixZonotope() = default;
  MatrixZonotope(Eigen::MatrixXd center, std::vector<Eigen::MatrixXd> generators);

  Eigen::Index rows() const { return center_.rows(); }
  Eigen::Index cols() const { return center_.cols(); }
  Eigen::Index generatorCount() const {
    return static_cast<Eigen::Index>(generators_.size());
  }

  const Eigen::MatrixXd& center() const { return center_; }
  const std::vector<Eigen::MatrixXd>& generators() const { return generators_; }

  /// Member matrix for a given coefficient vector (each in [-1, 1]).
  Eigen::MatrixXd member(const Eigen::VectorXd& beta) const;

  /// Random member with coefficients drawn uniformly from [-1, 1].
  Eigen::MatrixXd sample(std::mt19937_64& rng) const;

 private:
  Eigen::MatrixXd center_;
  std::vector<Eigen::MatrixXd> generators_;
};

/// Lifts a noise zonotope to the matrix zonotope of column-stacked noise
/// realizations over a window of length `columns`: the center repeats the
/// noise center in every column, and there is one generator per
/// (column, noise generator) pair, nonzero in exactly that column. Generator
/// order: column-major (all generators of column 0, then column 1, ...).
MatrixZonotope concatNoiseZonotope(const Zonotope& noise, Eigen::Index columns);

}  // namespace nzpc
