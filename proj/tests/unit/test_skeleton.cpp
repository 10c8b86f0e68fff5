#include "mems/skeleton.hpp"

#include <doctest.h>

#include <cmath>
#include <sstream>

using namespace mems;

namespace {

ProfileConstants constants() {
  static const ProfileConstants c = solve_profiles().constants;
  return c;
}

// Dense samples of the analytic medial axis of (-1,1) x (-0.8,0.8).
std::vector<Vec2> rect_axis() {
  std::vector<Vec2> pts;
  for (int k = 0; k <= 400; ++k) {
    const double s = k / 400.0;
    pts.emplace_back(-0.2 + 0.4 * s, 0.0);
    for (const Vec2 sg : {Vec2(1, 1), Vec2(1, -1), Vec2(-1, 1), Vec2(-1, -1)})
      pts.push_back(Vec2(0.2 + 0.8 * s, 0.8 * s).cwiseProduct(sg));
  }
  return pts;
}

double hausdorff(const std::vector<Vec2>& a, const std::vector<Vec2>& b) {
  auto one = [](const std::vector<Vec2>& p, const std::vector<Vec2>& q) {
    double worst = 0.0;
    for (const auto& x : p) {
      double best = 1e300;
      for (const auto& y : q) best = std::min(best, (x - y).norm());
      worst = std::max(worst, best);
    }
    return worst;
  };
  return std::max(one(a, b), one(b, a));
}

}  // namespace

TEST_SUITE("skeleton") {
  TEST_CASE("rectangle skeleton matches the analytic medial axis") {
    const double h = 0.01;
    const SkeletonSet sk = compute_skeleton(Domain::preset("rect"), h);
    CHECK(hausdorff(sk.vertices(), rect_axis()) <= 2 * h);
    CHECK(sk.meets_boundary);
    CHECK(sk.max_distance() == doctest::Approx(0.8));
  }

  TEST_CASE("skeleton invariants") {
    for (const char* name : {"rect", "rect-hole", "rect-4holes", "polar-asym"}) {
      const Domain d = Domain::preset(name);
      const SkeletonSet sk = compute_skeleton(d, 0.01);
      for (const auto& b : sk.branches)
        for (size_t k = 0; k < b.points.size(); ++k) {
          CHECK(b.distance[k] > 0.0);
          CHECK(b.contributors[k] >= 2);
          CHECK(d.contains(b.points[k]));
        }
    }
  }

  TEST_CASE("rectangle skeleton is symmetric") {
    const double h = 0.01;
    const SkeletonSet sk = compute_skeleton(Domain::preset("rect"), h);
    for (const auto& p : sk.vertices()) {
      CHECK(distance_to_skeleton(sk, {-p.x(), p.y()}) <= h);
      CHECK(distance_to_skeleton(sk, {p.x(), -p.y()}) <= h);
    }
  }

  TEST_CASE("disk skeleton is its centre") {
    const SkeletonSet sk = compute_skeleton(Domain::disk({0, 0}, 1.0), 0.01);
    for (const auto& p : sk.vertices()) CHECK(p.norm() <= 0.01);
    CHECK(sk.branches.front().ring.front());
  }

  TEST_CASE("hole skeleton curves are equidistant from wall and hole") {
    const Domain d = Domain::preset("rect-hole");
    const SkeletonSet sk = compute_skeleton(d, 0.01);
    int near_hole = 0;
    for (const auto& b : sk.branches)
      for (const auto& p : b.points) {
        const double dh = (p - Vec2(0.2, 0.3)).norm() - 0.2;
        const double dw = std::min(1.0 - std::abs(p.x()), 0.8 - std::abs(p.y()));
        if (std::abs(dh - d.boundary_distance(p)) < 1e-12) {
          ++near_hole;
          CHECK(std::abs(dh - dw) <= 0.02);
        }
      }
    CHECK(near_hole > 50);
  }

  TEST_CASE("coarse grids are rejected") {
    CHECK_THROWS_AS(compute_skeleton(Domain::preset("rect-hole"), 0.2), ResolutionError);
    CHECK_THROWS_AS(compute_skeleton(Domain::preset("rect"), 0.5), ResolutionError);
  }

  TEST_CASE("firefront") {
    const double h = 0.01;
    const Domain box = Domain::preset("rect");
    const auto lines = firefront(box, 0.1, h);
    REQUIRE(lines.size() == 1);
    CHECK((lines[0].front() - lines[0].back()).norm() < 1e-12);
    for (const auto& p : lines[0]) CHECK(std::abs(box.boundary_distance(p) - 0.1) <= 0.5 * h);
    const auto ring = firefront(Domain::disk({0, 0}, 1.0), 0.3, h);
    REQUIRE(ring.size() == 1);
    for (const auto& p : ring[0]) CHECK(p.norm() == doctest::Approx(0.7).epsilon(1e-3));
    CHECK_THROWS_AS(firefront(box, 0.81, h), EmptyResult);
  }

  TEST_CASE("arrival time") {
    const double z0 = constants().z0;
    CHECK(arrival_time(compute_skeleton(Domain::preset("rect"), 0.01), 0.02, z0) == 0.0);
    const SkeletonSet disk = compute_skeleton(Domain::disk({0, 0}, 1.0), 0.01);
    const double R = disk.min_distance();
    CHECK(R == doctest::Approx(1.0));
    for (double eps : {0.15, 0.2, 0.5}) {
      // Inverse of z0 phi(t) = R.
      const double q = std::pow(R / (z0 * std::sqrt(eps)), 4.0);
      const double t = (1.0 - std::pow(1.0 - q, 3.0)) / 3.0;
      CHECK(arrival_time(disk, eps, z0) == doctest::Approx(t).epsilon(1e-9));
    }
    CHECK_THROWS_AS(arrival_time(disk, 0.1, z0), NoArrival);
  }

  TEST_CASE("arrival time is nonincreasing in eps") {
    const SkeletonSet sk = compute_skeleton(Domain::preset("polar-asym"), 0.01);
    double prev = kQuenchTime;
    for (double eps = 0.03; eps <= 0.3; eps *= 1.2) {
      const double t = arrival_time(sk, eps, constants().z0);
      CHECK(t <= prev);
      prev = t;
    }
  }

  TEST_CASE("rectangle predictions") {
    const Domain box = Domain::preset("rect");
    const SkeletonSet sk = compute_skeleton(box, 0.01);
    const auto small = predict_touchdown(box, sk, 1e-4, constants());
    CHECK(small.regime == Regime::OnSkeleton);
    REQUIRE(small.points.size() == 4);
    for (const auto& p : small.points) {
      CHECK(std::abs(std::abs(p.point.x()) - std::abs(p.point.y()) - 0.2) < 0.02);  // on a corner diagonal
      CHECK(std::abs(p.point.x()) > 0.9);
      CHECK(box.contains(p.point));
      Vec2 mirrored(-p.point.x(), p.point.y());
      bool found = false;
      for (const auto& q : small.points) found = found || (q.point - mirrored).norm() < 1e-9;
      CHECK(found);
    }
    const auto large = predict_touchdown(box, sk, 0.1, constants());
    REQUIRE(large.points.size() == 1);
    CHECK(large.points.front().point.norm() < 0.02);
  }

  TEST_CASE("polar domain has candidates on three branches") {
    const Domain d = Domain::preset("polar-asym");
    const SkeletonSet sk = compute_skeleton(d, 0.01);
    CHECK(sk.branches.size() == 3);
    const auto p = predict_touchdown(d, sk, 0.04, constants());
    CHECK(p.regime == Regime::OnSkeleton);
    CHECK(p.points.size() == 3);
    for (size_t k = 1; k < p.points.size(); ++k) CHECK(p.points[k - 1].score <= p.points[k].score);
  }

  TEST_CASE("constant curvature is flagged as a ring") {
    const Domain disk = Domain::disk({0, 0}, 1.0);
    const auto pre = predict_touchdown(disk, 0.01, constants());
    CHECK(pre.regime == Regime::PreSkeleton);
    CHECK(pre.ring);
    const auto on = predict_touchdown(disk, 0.3, constants());
    CHECK(on.regime == Regime::OnSkeleton);
    CHECK(on.ring);
    CHECK(on.points.front().point.norm() < 0.01);
  }

  TEST_CASE("pre-skeleton predictions sit at curvature maxima") {
    const Domain d = Domain::preset("polar-asym");
    const auto p = predict_touchdown(d, 1e-3, constants());
    CHECK(p.regime == Regime::PreSkeleton);
    REQUIRE(!p.points.empty());
    double kmax = 0.0;
    for (const auto& s : d.outer().samples()) kmax = std::max(kmax, s.curvature);
    CHECK(p.points.front().mean_curvature == doctest::Approx(kmax).epsilon(1e-9));
    for (const auto& c : p.points) CHECK(d.boundary_distance(c.point) == doctest::Approx(p.target_distance).epsilon(1e-3));
  }

  TEST_CASE("csv export") {
    const SkeletonSet sk = compute_skeleton(Domain::preset("rect"), 0.02);
    std::ostringstream out;
    write_skeleton_csv(out, sk);
    CHECK(out.str().rfind("# mems-skeleton v1\nbranch,x,y,d,N,mean_kappa\n", 0) == 0);
  }
}
