#include "nzpc/zonotope.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

namespace nzpc {

namespace {

void requireFinite(const Eigen::MatrixXd& m, const char* what) {
  if (!m.allFinite()) {
    throw std::invalid_argument(std::string(what) + " has non-finite entries");
  }
}

void requireNoNaN(const Eigen::VectorXd& v, const char* what) {
  if (v.hasNaN()) {
    throw std::invalid_argument(std::string(what) + " has NaN entries");
  }
}

void requireSameDim(const Zonotope& a, const Zonotope& b, const char* op) {
  if (a.dim() != b.dim()) {
    throw std::invalid_argument(std::string(op) + ": dimension mismatch (" +
                                std::to_string(a.dim()) + " vs " +
                                std::to_string(b.dim()) + ")");
  }
}

}  // namespace

IntervalVector::IntervalVector(Eigen::VectorXd lo, Eigen::VectorXd hi)
    : lower(std::move(lo)), upper(std::move(hi)) {
  if (lower.size() != upper.size()) {
    throw std::invalid_argument("IntervalVector: bound sizes differ");
  }
  requireNoNaN(lower, "IntervalVector lower");
  requireNoNaN(upper, "IntervalVector upper");
  if ((lower.array() > upper.array()).any()) {
    throw std::invalid_argument("IntervalVector: lower exceeds upper");
  }
}

bool IntervalVector::contains(const IntervalVector& other, double tol) const {
  if (other.dim() != dim()) return false;
  return (other.lower.array() >= lower.array() - tol).all() &&
         (other.upper.array() <= upper.array() + tol).all();
}

bool IntervalVector::contains(const Eigen::VectorXd& point, double tol) const {
  if (point.size() != dim()) return false;
  return (point.array() >= lower.array() - tol).all() &&
         (point.array() <= upper.array() + tol).all();
}

Zonotope::Zonotope(Eigen::VectorXd center, Eigen::MatrixXd generators)
    : center_(std::move(center)), generators_(std::move(generators)) {
  if (center_.size() == 0) {
    throw std::invalid_argument("Zonotope: empty center");
  }
  if (generators_.size() == 0 && generators_.rows() != center_.size()) {
    // Normalize an empty generator matrix to the right row count.
    generators_.resize(center_.size(), 0);
  }
  if (generators_.rows() != center_.size()) {
    throw std::invalid_argument(
        "Zonotope: generator rows (" + std::to_string(generators_.rows()) +
        ") do not match center dimension (" + std::to_string(center_.size()) +
        ")");
  }
  requireFinite(center_, "Zonotope center");
  requireFinite(generators_, "Zonotope generators");
}

Zonotope Zonotope::point(Eigen::VectorXd center) {
  Eigen::MatrixXd none(center.size(), 0);
  return Zonotope(std::move(center), std::move(none));
}

Zonotope minkowskiSum(const Zonotope& a, const Zonotope& b) {
  requireSameDim(a, b, "minkowskiSum");
  Eigen::MatrixXd gens(a.dim(), a.generatorCount() + b.generatorCount());
  gens << a.generators(), b.generators();
  return Zonotope(a.center() + b.center(), std::move(gens));
}

Zonotope operator+(const Zonotope& a, const Zonotope& b) {
  return minkowskiSum(a, b);
}

Zonotope operator+(const Zonotope& z, const Eigen::VectorXd& shift) {
  if (shift.size() != z.dim()) {
    throw std::invalid_argument("Zonotope shift: dimension mismatch");
  }
  return Zonotope(z.center() + shift, z.generators());
}

Zonotope operator-(const Zonotope& z, const Eigen::VectorXd& shift) {
  return z + Eigen::VectorXd(-shift);
}

Zonotope operator-(const Zonotope& z) {
  return Zonotope(-z.center(), -z.generators());
}

Zonotope linearMap(const Eigen::MatrixXd& map, const Zonotope& z) {
  if (map.cols() != z.dim()) {
    throw std::invalid_argument(
        "linearMap: map columns (" + std::to_string(map.cols()) +
        ") do not match zonotope dimension (" + std::to_string(z.dim()) + ")");
  }
  return Zonotope(map * z.center(), map * z.generators());
}

Zonotope operator*(const Eigen::MatrixXd& map, const Zonotope& z) {
  return linearMap(map, z);
}

Zonotope cartesianProduct(const Zonotope& a, const Zonotope& b) {
  const Eigen::Index n = a.dim() + b.dim();
  const Eigen::Index g = a.generatorCount() + b.generatorCount();
  Eigen::VectorXd center(n);
  center << a.center(), b.center();
  Eigen::MatrixXd gens = Eigen::MatrixXd::Zero(n, g);
  gens.topLeftCorner(a.dim(), a.generatorCount()) = a.generators();
  gens.bottomRightCorner(b.dim(), b.generatorCount()) = b.generators();
  return Zonotope(std::move(center), std::move(gens));
}

IntervalVector toInterval(const Zonotope& z) {
  Eigen::VectorXd halfWidth = z.generators().cwiseAbs().rowwise().sum();
  return IntervalVector(z.center() - halfWidth, z.center() + halfWidth);
}

Zonotope fromInterval(const IntervalVector& box) {
  if (box.dim() == 0) {
    throw std::invalid_argument("fromInterval: empty interval");
  }
  requireFinite(box.lower, "fromInterval lower");
  requireFinite(box.upper, "fromInterval upper");
  Eigen::VectorXd center = 0.5 * (box.lower + box.upper);
  Eigen::VectorXd halfWidth = 0.5 * (box.upper - box.lower);
  const Eigen::Index nonZero = (halfWidth.array() > 0.0).count();
  Eigen::MatrixXd gens = Eigen::MatrixXd::Zero(box.dim(), nonZero);
  Eigen::Index col = 0;
  for (Eigen::Index i = 0; i < box.dim(); ++i) {
    if (halfWidth[i] > 0.0) {
      gens(i, col++) = halfWidth[i];
    }
  }
  return Zonotope(std::move(center), std::move(gens));
}

namespace {

// Enumerates the null directions of (n-1)-column subsets of `columns`,
// invoking `visit` with each unit-norm candidate normal.
template <typename Visitor>
void forEachFacetNormal(const Eigen::MatrixXd& columns, Visitor&& visit) {
  const Eigen::Index n = columns.rows();
  const Eigen::Index m = columns.cols();
  if (n == 1) {
    Eigen::VectorXd lambda(1);
    lambda[0] = 1.0;
    visit(lambda);
    return;
  }
  Eigen::MatrixXd sub(n, n - 1);
  // Iterate over all (n-1)-subsets of the m columns.
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(n - 1));
  std::iota(idx.begin(), idx.end(), 0);
  if (m < n - 1) return;
  while (true) {
    for (Eigen::Index j = 0; j < n - 1; ++j) {
      sub.col(j) = columns.col(idx[static_cast<std::size_t>(j)]);
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(sub, Eigen::ComputeFullU);
    visit(Eigen::VectorXd(svd.matrixU().col(n - 1)));
    // Advance the combination.
    Eigen::Index pos = n - 2;
    while (pos >= 0 && idx[static_cast<std::size_t>(pos)] == m - (n - 1) + pos) {
      --pos;
    }
    if (pos < 0) break;
    ++idx[static_cast<std::size_t>(pos)];
    for (Eigen::Index j = pos + 1; j < n - 1; ++j) {
      idx[static_cast<std::size_t>(j)] = idx[static_cast<std::size_t>(j - 1)] + 1;
    }
  }
}

double binomialEstimate(Eigen::Index m, Eigen::Index k) {
  double v = 1.0;
  for (Eigen::Index i = 0; i < k; ++i) {
    v *= static_cast<double>(m - i) / static_cast<double>(i + 1);
    if (v > 1e12) return v;
  }
  return v;
}

}  // namespace

PointContainment containsPoint(const Zonotope& z, const Eigen::VectorXd& p,
                               double tol) {
  if (p.size() != z.dim()) {
    throw std::invalid_argument("containsPoint: dimension mismatch");
  }
  PointContainment result;
  if (!p.allFinite() || !(tol >= 0.0)) {
    result.status = ContainmentStatus::SolverFailure;
    return result;
  }

  const Eigen::Index n = z.dim();
  const Eigen::VectorXd d = p - z.center();
  const Eigen::MatrixXd& g = z.generators();

  // Guard against combinatorial blow-up in high dimensions; the artifact
  // works in low-dimensional output spaces.
  if (binomialEstimate(g.cols() + n, n - 1) > 2e6) {
    result.status = ContainmentStatus::SolverFailure;
    return result;
  }

  double scaleRef = std::max(1.0, d.cwiseAbs().maxCoeff());
  if (g.size() > 0) {
    scaleRef = std::max(scaleRef, g.cwiseAbs().maxCoeff());
  }
  const double zeroTol = 1e-13 * scaleRef;

  Eigen::MatrixXd candidates(n, g.cols() + n);
  candidates << g, Eigen::MatrixXd::Identity(n, n);

  double best = 0.0;
  bool offSpan = false;
  forEachFacetNormal(candidates, [&](const Eigen::VectorXd& lambda) {
    const double num = std::abs(lambda.dot(d));
    const double den =
        g.cols() > 0 ? (g.transpose() * lambda).cwiseAbs().sum() : 0.0;
    if (den <= zeroTol) {
      if (num > zeroTol) offSpan = true;
      return;
    }
    best = std::max(best, num / den);
  });

  if (offSpan) {
    result.status = ContainmentStatus::NotContained;
    result.scale = std::numeric_limits<double>::infinity();
    return result;
  }
  result.scale = best;
  result.status = best <= 1.0 + tol ? ContainmentStatus::Contained
                                    : ContainmentStatus::NotContained;
  return result;
}

Zonotope reduceOrder(const Zonotope& z, Eigen::Index maxGenerators) {
  const Eigen::Index n = z.dim();
  if (maxGenerators < n) {
    throw std::invalid_argument(
        "reduceOrder: maxGenerators must be at least the dimension");
  }
  const Eigen::Index g = z.generatorCount();
  if (g <= maxGenerators) return z;

  // Sort generator indices by Euclidean norm, descending; collapse the tail.
  std::vector<Eigen::Index> order(static_cast<std::size_t>(g));
  std::iota(order.begin(), order.end(), 0);
  Eigen::VectorXd norms(g);
  for (Eigen::Index i = 0; i < g; ++i) norms[i] = z.generators().col(i).norm();
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index a, Eigen::Index b) {
                     return norms[a] > norms[b];
                   });

  const Eigen::Index keep = maxGenerators;
  Eigen::MatrixXd kept(n, keep);
  Eigen::VectorXd boxHalf = Eigen::VectorXd::Zero(n);
  for (Eigen::Index i = 0; i < g; ++i) {
    if (i < keep) {
      kept.col(i) = z.generators().col(order[static_cast<std::size_t>(i)]);
    } else {
      boxHalf +=
          z.generators().col(order[static_cast<std::size_t>(i)]).cwiseAbs();
    }
  }
  const Eigen::Index boxCols = (boxHalf.array() > 0.0).count();
  Eigen::MatrixXd gens(n, keep + boxCols);
  gens.leftCols(keep) = kept;
  Eigen::Index col = keep;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (boxHalf[i] > 0.0) {
      gens.col(col).setZero();
      gens(i, col) = boxHalf[i];
      ++col;
    }
  }
  return Zonotope(z.center(), std::move(gens));
}

}  // namespace nzpc
