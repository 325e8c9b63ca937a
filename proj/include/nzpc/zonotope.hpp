#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>

namespace nzpc {

/// Closed axis-aligned box [lower, upper] in R^n. Bounds may be infinite
/// (half-lines / full lines); NaN entries and crossed bounds are rejected.
struct IntervalVector {
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;

  IntervalVector() = default;
  IntervalVector(Eigen::VectorXd lo, Eigen::VectorXd hi);

  Eigen::Index dim() const { return lower.size(); }

  /// True when `other` is contained in this box, element-wise, within `tol`.
  bool contains(const IntervalVector& other, double tol = 0.0) const;
  /// True when the point lies inside the box, element-wise, within `tol`.
  bool contains(const Eigen::VectorXd& point, double tol = 0.0) const;
};

/// Zonotope { center + generators * beta : ||beta||_inf <= 1 }.
///
/// Generators are stored as columns. Zero columns are legal and are kept by
/// all set operations; only explicit reduction or interval conversion may
/// drop them.
class Zonotope {
 public:
  Zonotope() = default;
  Zonotope(Eigen::VectorXd center, Eigen::MatrixXd generators);

  /// Degenerate zonotope with no generators (a single point).
  static Zonotope point(Eigen::VectorXd center);

  Eigen::Index dim() const { return center_.size(); }
  Eigen::Index generatorCount() const { return generators_.cols(); }

  const Eigen::VectorXd& center() const { return center_; }
  const Eigen::MatrixXd& generators() const { return generators_; }

 private:
  Eigen::VectorXd center_;
  Eigen::MatrixXd generators_;  // dim x generatorCount
};

/// Minkowski sum: centers add, generator columns concatenate.
Zonotope minkowskiSum(const Zonotope& a, const Zonotope& b);
Zonotope operator+(const Zonotope& a, const Zonotope& b);
/// Minkowski difference against a point (pure translation).
Zonotope operator+(const Zonotope& z, const Eigen::VectorXd& shift);
Zonotope operator-(const Zonotope& z, const Eigen::VectorXd& shift);
/// Pointwise negation -Z = {-z : z in Z}.
Zonotope operator-(const Zonotope& z);

/// Image under a linear map: <L c, L G>.
Zonotope linearMap(const Eigen::MatrixXd& map, const Zonotope& z);
Zonotope operator*(const Eigen::MatrixXd& map, const Zonotope& z);

/// Cartesian product: stacked centers, block-diagonal generators.
Zonotope cartesianProduct(const Zonotope& a, const Zonotope& b);

/// Tight interval hull [c - sum|g|, c + sum|g|].
IntervalVector toInterval(const Zonotope& z);

/// Axis-aligned zonotope for a box: midpoint center, diagonal half-width
/// generators. Zero-width dimensions contribute no generator column.
/// Requires finite bounds.
Zonotope fromInterval(const IntervalVector& box);

enum class ContainmentStatus : std::uint8_t {
  Contained,
  NotContained,
  SolverFailure,
};

/// Result of a point-in-zonotope query. `scale` is the optimum of
/// min ||beta||_inf s.t. G beta = p - c (infinity when the point is not even
/// in the affine span); the point is contained iff scale <= 1 + tol.
struct PointContainment {
  ContainmentStatus status = ContainmentStatus::SolverFailure;
  double scale = 0.0;

  bool contained() const { return status == ContainmentStatus::Contained; }
};

/// Decide p in Z by computing the exact optimum of the membership linear
/// program min ||beta||_inf s.t. G beta = p - c via its dual: the optimum
/// equals max over facet normals lambda of |lambda^T (p-c)| / ||G^T lambda||_1.
/// Candidate normals are the null directions of (n-1)-column subsets of
/// [G | I], which covers degenerate (rank-deficient) generator matrices.
PointContainment containsPoint(const Zonotope& z, const Eigen::VectorXd& p,
                               double tol = 1e-9);

/// Order reduction by the box method: keeps the largest generators and
/// collapses the rest into an axis-aligned box. The result is a superset of
/// the input with at most maxGenerators + dim generator columns.
/// Requires maxGenerators >= dim. No-op when the input is already small.
Zonotope reduceOrder(const Zonotope& z, Eigen::Index maxGenerators);

}  // namespace nzpc
