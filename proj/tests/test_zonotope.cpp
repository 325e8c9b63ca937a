#include "nzpc/zonotope.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

#include "doctest.h"
#include "test_support.hpp"

using namespace nzpc;
using testsupport::randomMember;
using testsupport::randomZonotope;

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

Eigen::VectorXd vec2(double a, double b) {
  Eigen::VectorXd v(2);
  v << a, b;
  return v;
}
}  // namespace

TEST_CASE("interval vector validates its bounds") {
  CHECK_NOTHROW(IntervalVector(vec2(-1.0, 0.0), vec2(1.0, 0.0)));
  CHECK_NOTHROW(IntervalVector(vec2(-kInf, 0.0), vec2(1.0, kInf)));
  CHECK_THROWS_AS(IntervalVector(vec2(0.0, 0.0), vec2(-1.0, 1.0)), std::invalid_argument);
  CHECK_THROWS_AS(IntervalVector(vec2(kNan, 0.0), vec2(1.0, 1.0)), std::invalid_argument);
  CHECK_THROWS_AS(IntervalVector(vec2(0.0, 0.0), vec2(kNan, 1.0)), std::invalid_argument);
  CHECK_THROWS_AS(IntervalVector(Eigen::VectorXd::Zero(2), Eigen::VectorXd::Zero(3)),
                  std::invalid_argument);
}

TEST_CASE("interval vector containment with tolerance") {
  const IntervalVector box(vec2(-1.0, -2.0), vec2(1.0, 2.0));
  CHECK(box.contains(vec2(0.0, 0.0)));
  CHECK(box.contains(vec2(1.0, 2.0)));
  CHECK_FALSE(box.contains(vec2(1.0 + 1e-6, 0.0)));
  CHECK(box.contains(vec2(1.0 + 1e-6, 0.0), 1e-5));

  const IntervalVector inner(vec2(-0.5, -2.0), vec2(0.5, 2.0));
  CHECK(box.contains(inner));
  CHECK_FALSE(inner.contains(box));
  const IntervalVector halfLine(vec2(-kInf, -1.0), vec2(0.0, 1.0));
  CHECK_FALSE(box.contains(halfLine));
  const IntervalVector everything(vec2(-kInf, -kInf), vec2(kInf, kInf));
  CHECK(everything.contains(box));
  CHECK(everything.contains(halfLine));
}

TEST_CASE("zonotope constructor validates shapes and values") {
  CHECK_NOTHROW(Zonotope(vec2(0.0, 0.0), Eigen::MatrixXd::Zero(2, 3)));
  CHECK_THROWS_AS(Zonotope(vec2(0.0, 0.0), Eigen::MatrixXd::Zero(3, 2)),
                  std::invalid_argument);
  Eigen::VectorXd badCenter = vec2(kNan, 0.0);
  CHECK_THROWS_AS(Zonotope(badCenter, Eigen::MatrixXd::Zero(2, 1)), std::invalid_argument);
  Eigen::MatrixXd badGens = Eigen::MatrixXd::Zero(2, 1);
  badGens(0, 0) = kInf;
  CHECK_THROWS_AS(Zonotope(vec2(0.0, 0.0), badGens), std::invalid_argument);

  const Zonotope p = Zonotope::point(vec2(3.0, -4.0));
  CHECK(p.dim() == 2);
  CHECK(p.generatorCount() == 0);
  CHECK(p.center() == vec2(3.0, -4.0));
}

TEST_CASE("minkowski sum concatenates generators") {
  Eigen::MatrixXd ga(2, 1);
  ga << 1.0, 0.0;
  Eigen::MatrixXd gb(2, 1);
  gb << 0.0, 2.0;
  const Zonotope a(vec2(0.0, 0.0), ga);
  const Zonotope b(vec2(1.0, 1.0), gb);

  const Zonotope sum = a + b;
  CHECK(sum.center() == vec2(1.0, 1.0));
  REQUIRE(sum.generatorCount() == 2);
  CHECK(sum.generators()(0, 0) == 1.0);
  CHECK(sum.generators()(1, 0) == 0.0);
  CHECK(sum.generators()(0, 1) == 0.0);
  CHECK(sum.generators()(1, 1) == 2.0);

  // Adding a point only translates; zero columns are kept.
  const Zonotope shifted = sum + Zonotope::point(vec2(-1.0, 2.0));
  CHECK(shifted.center() == vec2(0.0, 3.0));
  CHECK(shifted.generatorCount() == 2);

  Eigen::MatrixXd withZero(2, 2);
  withZero << 1.0, 0.0, 0.0, 0.0;
  const Zonotope z(vec2(0.0, 0.0), withZero);
  CHECK((z + a).generatorCount() == 3);

  CHECK_THROWS_AS(a + Zonotope::point(Eigen::VectorXd::Zero(3)), std::invalid_argument);
}

TEST_CASE("minkowski sum soundness over random members") {
  std::mt19937_64 rng(7);
  const Zonotope a = randomZonotope(3, 4, rng);
  const Zonotope b = randomZonotope(3, 2, rng);
  const Zonotope sum = a + b;
  for (int i = 0; i < 1000; ++i) {
    const Eigen::VectorXd p = randomMember(a, rng) + randomMember(b, rng);
    CHECK(containsPoint(sum, p).contained());
  }
}

TEST_CASE("negation and vector shifts") {
  std::mt19937_64 rng(8);
  const Zonotope z = randomZonotope(2, 3, rng);
  const Zonotope neg = -z;
  CHECK(neg.center() == -z.center());
  CHECK(neg.generators() == -z.generators());

  const Eigen::VectorXd shift = vec2(0.5, -1.5);
  const Zonotope moved = z + shift;
  CHECK(moved.center() == z.center() + shift);
  CHECK(moved.generators() == z.generators());
  const Zonotope back = moved - shift;
  CHECK(back.center().isApprox(z.center()));
}

TEST_CASE("linear map scales center and generators") {
  Eigen::MatrixXd g(2, 2);
  g << 1.0, 0.5, 0.0, 1.0;
  const Zonotope z(vec2(1.0, -1.0), g);

  Eigen::MatrixXd map(2, 2);
  map << 2.0, 0.0, 0.0, 3.0;
  const Zonotope mapped = linearMap(map, z);
  CHECK(mapped.center() == vec2(2.0, -3.0));
  CHECK(mapped.generators()(0, 0) == 2.0);
  CHECK(mapped.generators()(1, 0) == 0.0);
  CHECK(mapped.generators()(0, 1) == 1.0);
  CHECK(mapped.generators()(1, 1) == 3.0);

  // operator* is an alias.
  const Zonotope viaOperator = map * z;
  CHECK(viaOperator.center() == mapped.center());
  CHECK(viaOperator.generators() == mapped.generators());

  const Zonotope identity = Eigen::MatrixXd::Identity(2, 2) * z;
  CHECK(identity.center() == z.center());
  CHECK(identity.generators() == z.generators());

  const Zonotope zero = Eigen::MatrixXd::Zero(2, 2) * z;
  CHECK(zero.center().isZero(0.0));
  CHECK(zero.generators().isZero(0.0));

  // Rectangular maps change the dimension.
  Eigen::MatrixXd wide(1, 2);
  wide << 1.0, 1.0;
  CHECK((wide * z).dim() == 1);
  CHECK_THROWS_AS(Eigen::MatrixXd::Identity(3, 3) * z, std::invalid_argument);
}

TEST_CASE("linear map commutes with membership") {
  std::mt19937_64 rng(9);
  const Zonotope z = randomZonotope(3, 5, rng);
  const Eigen::MatrixXd map = testsupport::randomMatrix(2, 3, rng);
  const Zonotope mapped = map * z;
  for (int i = 0; i < 500; ++i) {
    const Eigen::VectorXd p = randomMember(z, rng);
    CHECK(containsPoint(mapped, map * p, 1e-7).contained());
  }
}

TEST_CASE("cartesian product stacks blocks") {
  Eigen::MatrixXd ga(2, 2);
  ga << 1.0, 0.0, 0.0, 2.0;
  const Zonotope a(vec2(1.0, 2.0), ga);
  Eigen::MatrixXd gb(1, 3);
  gb << 0.5, -0.5, 1.0;
  Eigen::VectorXd cb(1);
  cb << -3.0;
  const Zonotope b(cb, gb);

  const Zonotope prod = cartesianProduct(a, b);
  CHECK(prod.dim() == 3);
  REQUIRE(prod.generatorCount() == 5);
  CHECK(prod.center()[0] == 1.0);
  CHECK(prod.center()[2] == -3.0);
  // Off-diagonal blocks are zero.
  CHECK(prod.generators().topRightCorner(2, 3).isZero(0.0));
  CHECK(prod.generators().bottomLeftCorner(1, 2).isZero(0.0));
  CHECK(prod.generators().topLeftCorner(2, 2) == ga);
  CHECK(prod.generators().bottomRightCorner(1, 3) == gb);

  // Point x segment keeps the segment generator only.
  const Zonotope pointSeg = cartesianProduct(Zonotope::point(vec2(0.0, 0.0)), b);
  CHECK(pointSeg.dim() == 3);
  CHECK(pointSeg.generatorCount() == 3);
}

TEST_CASE("interval hull is tight") {
  Eigen::VectorXd c(1);
  c << 1.0;
  Eigen::MatrixXd g(1, 2);
  g << 2.0, -1.0;
  const IntervalVector hull = toInterval(Zonotope(c, g));
  CHECK(hull.lower[0] == doctest::Approx(-2.0));
  CHECK(hull.upper[0] == doctest::Approx(4.0));

  const IntervalVector pointHull = toInterval(Zonotope::point(vec2(3.0, -1.0)));
  CHECK(pointHull.lower == vec2(3.0, -1.0));
  CHECK(pointHull.upper == vec2(3.0, -1.0));

  std::mt19937_64 rng(10);
  const Zonotope z = randomZonotope(3, 6, rng);
  const IntervalVector box = toInterval(z);
  for (int i = 0; i < 1000; ++i) {
    CHECK(box.contains(randomMember(z, rng), 1e-12));
  }
}

TEST_CASE("fromInterval builds axis-aligned zonotopes") {
  Eigen::VectorXd lo(1), hi(1);
  lo << -2.0;
  hi << 4.0;
  const Zonotope z = fromInterval(IntervalVector(lo, hi));
  CHECK(z.center()[0] == doctest::Approx(1.0));
  REQUIRE(z.generatorCount() == 1);
  CHECK(z.generators()(0, 0) == doctest::Approx(3.0));

  // Degenerate dimensions contribute no generator column.
  const Zonotope flat = fromInterval(IntervalVector(vec2(-1.0, 5.0), vec2(1.0, 5.0)));
  CHECK(flat.generatorCount() == 1);
  CHECK(flat.center() == vec2(0.0, 5.0));

  // Round trip through the hull of a box zonotope.
  const IntervalVector box(vec2(-3.0, 0.5), vec2(7.0, 2.5));
  const IntervalVector round = toInterval(fromInterval(box));
  CHECK(round.lower.isApprox(box.lower));
  CHECK(round.upper.isApprox(box.upper));

  CHECK_THROWS_AS(fromInterval(IntervalVector(vec2(-kInf, 0.0), vec2(0.0, 1.0))),
                  std::invalid_argument);
  CHECK_THROWS_AS(fromInterval(IntervalVector()), std::invalid_argument);
}

TEST_CASE("point membership reports the exact scale") {
  Eigen::MatrixXd g(2, 2);
  g << 1.0, 1.0, 0.0, 1.0;  // columns (1,0) and (1,1)
  const Zonotope z(vec2(0.0, 0.0), g);

  const PointContainment atCenter = containsPoint(z, vec2(0.0, 0.0));
  CHECK(atCenter.contained());
  CHECK(atCenter.scale == doctest::Approx(0.0));

  // (2,1) = 1*(1,0) + 1*(1,1) sits exactly on the boundary.
  const PointContainment boundary = containsPoint(z, vec2(2.0, 1.0));
  CHECK(boundary.contained());
  CHECK(boundary.scale == doctest::Approx(1.0));

  // (2,1.5) needs beta = (0.5, 1.5).
  const PointContainment outside = containsPoint(z, vec2(2.0, 1.5));
  CHECK_FALSE(outside.contained());
  CHECK(outside.status == ContainmentStatus::NotContained);
  CHECK(outside.scale == doctest::Approx(1.5));

  // A generous tolerance flips the verdict without changing the scale.
  CHECK(containsPoint(z, vec2(2.0, 1.5), 0.6).contained());
}

TEST_CASE("point membership handles degenerate sets") {
  const Zonotope point = Zonotope::point(vec2(1.0, 1.0));
  CHECK(containsPoint(point, vec2(1.0, 1.0)).contained());
  CHECK_FALSE(containsPoint(point, vec2(1.0, 1.1)).contained());

  // A segment in the plane: membership requires staying on the line.
  Eigen::MatrixXd seg(2, 1);
  seg << 1.0, 1.0;
  const Zonotope line(vec2(0.0, 0.0), seg);
  CHECK(containsPoint(line, vec2(0.5, 0.5)).contained());
  CHECK_FALSE(containsPoint(line, vec2(0.5, 0.6)).contained());
  CHECK_FALSE(containsPoint(line, vec2(2.0, 2.0)).contained());

  // Zero columns do not confuse the query.
  Eigen::MatrixXd withZero(2, 3);
  withZero << 1.0, 0.0, 0.0, 0.0, 1.0, 0.0;
  const Zonotope padded(vec2(0.0, 0.0), withZero);
  CHECK(containsPoint(padded, vec2(1.0, -1.0)).contained());
  CHECK_FALSE(containsPoint(padded, vec2(1.2, 0.0)).contained());
}

TEST_CASE("point membership agrees with random members") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const Zonotope z = randomZonotope(2, 4, rng);
    for (int i = 0; i < 50; ++i) {
      CHECK(containsPoint(z, randomMember(z, rng)).contained());
    }
    // Points far outside the interval hull must be rejected.
    const IntervalVector hull = toInterval(z);
    Eigen::VectorXd far = hull.upper + vec2(1.0, 1.0);
    CHECK_FALSE(containsPoint(z, far).contained());
  }
}

TEST_CASE("order reduction yields a small superset") {
  std::mt19937_64 rng(12);
  const Zonotope z = randomZonotope(2, 10, rng);

  // Already small: returned unchanged.
  const Zonotope same = reduceOrder(z, 10);
  CHECK(same.generatorCount() == z.generatorCount());
  CHECK(same.generators() == z.generators());

  const Zonotope reduced = reduceOrder(z, 4);
  CHECK(reduced.generatorCount() <= 4 + z.dim());
  CHECK(reduced.generatorCount() < z.generatorCount());
  for (int i = 0; i < 500; ++i) {
    CHECK(containsPoint(reduced, randomMember(z, rng), 1e-8).contained());
  }

  CHECK_THROWS_AS(reduceOrder(z, 1), std::invalid_argument);
}

TEST_CASE("diagonal maps commute with interval hulls") {
  std::mt19937_64 rng(13);
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(3, 3);
  d.diagonal() << 2.0, -1.0, 0.5;
  for (int trial = 0; trial < 100; ++trial) {
    const Zonotope z = randomZonotope(3, 5, rng);
    const IntervalVector mapped = toInterval(d * z);
    const IntervalVector hull = toInterval(z);
    for (Eigen::Index i = 0; i < 3; ++i) {
      const double s = d(i, i);
      const double lo = s >= 0.0 ? s * hull.lower[i] : s * hull.upper[i];
      const double hi = s >= 0.0 ? s * hull.upper[i] : s * hull.lower[i];
      CHECK(mapped.lower[i] == doctest::Approx(lo).epsilon(1e-12));
      CHECK(mapped.upper[i] == doctest::Approx(hi).epsilon(1e-12));
    }
  }
}

TEST_CASE("operations preserve membership of tracked points") {
  // Track a concrete member through a chain of operations and confirm the
  // final point lands in the final set.
  std::mt19937_64 rng(14);
  for (int trial = 0; trial < 200; ++trial) {
    const Zonotope a = randomZonotope(2, 3, rng);
    const Zonotope b = randomZonotope(2, 2, rng);
    const Eigen::MatrixXd map = testsupport::randomMatrix(2, 2, rng);

    const Eigen::VectorXd pa = randomMember(a, rng);
    const Eigen::VectorXd pb = randomMember(b, rng);

    const Zonotope chain = map * (a + b);
    const Eigen::VectorXd point = map * (pa + pb);
    CHECK(containsPoint(chain, point, 1e-7).contained());

    const Zonotope reduced = reduceOrder(chain, 3);
    CHECK(containsPoint(reduced, point, 1e-7).contained());
  }
}
