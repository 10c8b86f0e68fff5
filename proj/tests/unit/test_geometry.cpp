#include "mems/geometry.hpp"

#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

using namespace mems;

namespace {

Domain rect() { return Domain::preset("rect"); }

// Brute-force distance to the rectangle walls.
double rect_dist(const Vec2& x) { return std::min(1.0 - std::abs(x.x()), 0.8 - std::abs(x.y())); }

bool has_point(const ClosestPoints& cp, const Vec2& p, double tol = 1e-9) {
  for (const auto& q : cp.points)
    if ((q.location - p).norm() <= tol) return true;
  return false;
}

// r(theta) = 1 + 0.15 sin 2t + 0.3 cos 3t and its derivatives, written out by hand.
double r_polar(double t) { return 1.0 + 0.15 * std::sin(2 * t) + 0.3 * std::cos(3 * t); }
double r1_polar(double t) { return 0.3 * std::cos(2 * t) - 0.9 * std::sin(3 * t); }
double r2_polar(double t) { return -0.6 * std::sin(2 * t) - 2.7 * std::cos(3 * t); }

}  // namespace

TEST_SUITE("geometry") {
  TEST_CASE("signed distance on the rectangle presets") {
    CHECK(rect().signed_distance({0, 0}) == doctest::Approx(0.8).epsilon(1e-14));
    CHECK(rect().signed_distance({0.9, 0.75}) == doctest::Approx(0.05).epsilon(1e-12));
    CHECK(Domain::preset("rect-hole").signed_distance({0.2, 0.3}) == doctest::Approx(-0.2).epsilon(1e-12));
    CHECK(rect().signed_distance({1.5, 0.0}) == doctest::Approx(-0.5).epsilon(1e-12));
  }

  TEST_CASE("signed distance matches brute force inside the rectangle") {
    std::mt19937 rng(3);
    std::uniform_real_distribution<double> ux(-1, 1), uy(-0.8, 0.8);
    const Domain d = rect();
    for (int k = 0; k < 200; ++k) {
      const Vec2 x(ux(rng), uy(rng));
      CHECK(d.signed_distance(x) == doctest::Approx(rect_dist(x)).epsilon(1e-12));
    }
  }

  TEST_CASE("closest boundary points") {
    const Domain d = rect();
    auto a = d.closest_boundary_points({0, 0}, 1e-6);
    REQUIRE(a.points.size() == 2);
    CHECK(has_point(a, {0, 0.8}));
    CHECK(has_point(a, {0, -0.8}));
    auto b = d.closest_boundary_points({0.1, 0}, 1e-6);
    REQUIRE(b.points.size() == 2);
    CHECK(has_point(b, {0.1, 0.8}));
    CHECK(has_point(b, {0.1, -0.8}));
    auto c = d.closest_boundary_points({0.8, 0.6}, 1e-6);
    REQUIRE(c.points.size() == 2);
    CHECK(has_point(c, {1.0, 0.6}));
    CHECK(has_point(c, {0.8, 0.8}));
    CHECK(c.distance == doctest::Approx(0.2));
    for (const auto& p : c.points) {
      CHECK(p.inward_normal.norm() == doctest::Approx(1.0).epsilon(1e-12));
      CHECK(d.contains(p.location + 1e-3 * p.inward_normal));
    }
  }

  TEST_CASE("disk centre is degenerate") {
    const Domain d = Domain::disk({0, 0}, 1.0);
    auto cp = d.closest_boundary_points({0, 0}, 1e-6);
    CHECK(cp.degenerate);
    CHECK(cp.points.size() == 8);
  }

  TEST_CASE("closest points respect the rectangle symmetries") {
    std::mt19937 rng(5);
    std::uniform_real_distribution<double> ux(-0.95, 0.95), uy(-0.75, 0.75);
    const Domain d = rect();
    for (int k = 0; k < 100; ++k) {
      const Vec2 x(ux(rng), uy(rng));
      const auto base = d.closest_boundary_points(x, 1e-3);
      for (const Vec2 s : {Vec2(-1, 1), Vec2(1, -1)}) {
        const auto m = d.closest_boundary_points(x.cwiseProduct(s), 1e-3);
        REQUIRE(m.points.size() == base.points.size());
        for (const auto& p : base.points) CHECK(has_point(m, p.location.cwiseProduct(s), 1e-9));
      }
    }
  }

  TEST_CASE("curvature sign convention") {
    const Curve hole = Curve::circle({0.2, 0.3}, 0.2, true);
    for (double s : {0.0, 0.3, 1.0}) CHECK(hole.curvature_at(s) == doctest::Approx(-5.0));
    const Curve disk = Curve::circle({0, 0}, 0.5, false);
    CHECK(disk.curvature_at(0.1) == doctest::Approx(2.0));
    const Curve& box = rect().outer();
    CHECK(box.curvature_at(0.5) == doctest::Approx(0.0));
    CHECK(box.curvature_at(1.3) == doctest::Approx(0.0));
  }

  TEST_CASE("polar curve curvature matches the closed form") {
    const Domain d = Domain::preset("polar-asym");
    const Curve& c = d.outer();
    auto kappa = [](double t) {
      const double r = r_polar(t), r1 = r1_polar(t), r2 = r2_polar(t);
      return (r * r + 2 * r1 * r1 - r * r2) / std::pow(r * r + r1 * r1, 1.5);
    };
    for (const auto& s : c.samples()) {
      const double t = std::atan2(s.point.y(), s.point.x());
      CHECK(s.curvature == doctest::Approx(kappa(t)).epsilon(1e-6));
    }
    // Centered differences of the tangent angle on the sample table.
    const auto& S = c.samples();
    const int n = static_cast<int>(S.size()) - 1;
    double worst = 0.0;
    for (int k = 1; k < n - 1; ++k) {
      const double a0 = std::atan2(S[k - 1].tangent.y(), S[k - 1].tangent.x());
      const double a1 = std::atan2(S[k + 1].tangent.y(), S[k + 1].tangent.x());
      double da = a1 - a0;
      while (da > kPi) da -= 2 * kPi;
      while (da < -kPi) da += 2 * kPi;
      worst = std::max(worst, std::abs(da / (S[k + 1].arc_length - S[k - 1].arc_length) - S[k].curvature));
    }
    CHECK(worst < 1e-3);
  }

  TEST_CASE("curves are closed and sampled points lie on the boundary") {
    for (const auto& name : Domain::preset_names()) {
      const Domain d = Domain::preset(name);
      for (const Curve& c : d.curves()) {
        const auto& S = c.samples();
        CHECK((S.front().point - S.back().point).norm() <= 1e-12);
        const double h = c.max_sample_spacing();
        for (size_t k = 0; k < S.size(); k += 7) CHECK(std::abs(d.signed_distance(S[k].point)) <= h * h);
      }
    }
  }

  TEST_CASE("containment") {
    CHECK(rect().contains({0, 0}));
    CHECK_FALSE(Domain::preset("rect-hole").contains({0.2, 0.3}));
    CHECK_FALSE(rect().contains({1.5, 0}));
    CHECK_FALSE(rect().contains({1.0, 0.2}));
    const Domain four = Domain::preset("rect-4holes");
    CHECK_FALSE(four.contains({0.5, 0.3}));
    CHECK(four.contains({0.0, 0.0}));
  }

  TEST_CASE("domain files") {
    std::istringstream in(
        "# rectangle with a hole\n"
        "outer polygon -1 -0.8 1 -0.8 1 0.8 -1 0.8\n"
        "hole circle 0.2 0.3 0.2\n");
    const Domain d = Domain::parse(in);
    CHECK(d.holes().size() == 1);
    CHECK(d.area() == doctest::Approx(3.2 - kPi * 0.04).epsilon(1e-9));
    std::istringstream bad("outer triangle 0 0 1\n");
    CHECK_THROWS_AS(Domain::parse(bad), DomainError);
    CHECK_THROWS_AS(Domain::preset("nope"), DomainError);
  }
}
