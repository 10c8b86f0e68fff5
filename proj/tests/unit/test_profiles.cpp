#include "mems/profiles.hpp"

#include <doctest.h>

#include <cmath>

using namespace mems;

namespace {

const Profiles& profiles() {
  static const Profiles p = solve_profiles();
  return p;
}

// Classical RK4 on du/dt = -(1 + u)^{-2}.
double rk4_quench(double t_end, int steps) {
  double u = 0.0;
  const double h = t_end / steps;
  auto f = [](double v) { return -1.0 / ((1.0 + v) * (1.0 + v)); };
  for (int k = 0; k < steps; ++k) {
    const double k1 = f(u), k2 = f(u + 0.5 * h * k1), k3 = f(u + 0.5 * h * k2), k4 = f(u + h * k3);
    u += h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
  }
  return u;
}

}  // namespace

TEST_SUITE("profiles") {
  TEST_CASE("outer solution") {
    CHECK(outer_u0(0.0) == 0.0);
    CHECK(outer_u0(0.1) == doctest::Approx(-0.112096).epsilon(1e-5));
    CHECK(outer_u0(0.1) == doctest::Approx(rk4_quench(0.1, 2000)).epsilon(1e-10));
    CHECK(outer_u0(std::nextafter(kQuenchTime, 0.0)) == doctest::Approx(-1.0).epsilon(1e-5));
    CHECK_THROWS_AS(outer_u0(kQuenchTime), DomainError);
  }

  TEST_CASE("layer width") {
    CHECK(phi(0.0, 0.3) == 0.0);
    CHECK(phi(kQuenchTime, 0.04) == doctest::Approx(0.2));
    CHECK(phi(0.1, 0.01) == doctest::Approx(0.1 * std::pow(0.112096, 0.25)).epsilon(1e-5));
    CHECK(phi(0.1, 0.01) == doctest::Approx(0.05787).epsilon(1e-4));
    CHECK_THROWS_AS(phi(0.1, 0.0), DomainError);
  }

  TEST_CASE("profile constants agree with the published values") {
    const auto& c = profiles().constants;
    CHECK(c.z0 == doctest::Approx(2.89).epsilon(0.02 / 2.89));
    CHECK(c.w0_at_z0 == doctest::Approx(-1.0822).epsilon(0.002 / 1.0822));
    CHECK(c.w1bar_at_z0 == doctest::Approx(-0.1186).epsilon(0.002 / 0.1186));
    CHECK(c.alpha == doctest::Approx(0.3533).epsilon(0.005 / 0.3533));
    CHECK(c.w0_at_z0 < -1.0);
    CHECK(c.alpha > 0.0);
    CHECK(c.wkb_rate == doctest::Approx(3.0 * std::pow(2.0, -11.0 / 3.0)));
    CHECK(wkb_rate_exact() == doctest::Approx(0.23623).epsilon(1e-4));
  }

  TEST_CASE("boundary and far-field conditions") {
    const auto& w0 = profiles().w0;
    const auto& w1 = profiles().w1bar;
    CHECK(std::abs(w0.y.front()[0]) < 1e-10);
    CHECK(std::abs(w0.y.front()[2]) < 1e-8);
    CHECK(std::abs(w0.y.back()[0] - w0.far_field_limit) <= 1e-8);
    CHECK(std::abs(w1.y.front()[0]) < 1e-10);
    CHECK(w1.y.front()[2] == doctest::Approx(w0.y.front()[1]).epsilon(1e-6));
    CHECK(std::abs(w1.y.back()[0]) <= 1e-8);
    CHECK(w0(100.0) == -1.0);
  }

  TEST_CASE("ODE residuals and derivative consistency") {
    const auto& w0 = profiles().w0;
    const auto& w1 = profiles().w1bar;
    const size_t n = w0.z.size();
    double res0 = 0.0, res1 = 0.0, cons = 0.0;
    for (size_t k = 2; k + 2 < n; ++k) {
      const double z = w0.z[k];
      const auto& a = w0.y[k];
      const auto& b = w1.y[k];
      res0 = std::max(res0, std::abs(a[4] - z / 4 * a[1] + a[0] + 1.0));
      res1 = std::max(res1, std::abs(b[4] - z / 4 * b[1] + 1.25 * b[0] - 2.0 * a[3]));
      // Fourth-order central difference of each stored column against the next one.
      const double h = w0.z[k + 1] - w0.z[k];
      for (int j = 0; j < 4; ++j) {
        const double d = (-w0.y[k + 2][j] + 8 * w0.y[k + 1][j] - 8 * w0.y[k - 1][j] + w0.y[k - 2][j]) / (12 * h);
        cons = std::max(cons, std::abs(d - a[j + 1]));
      }
    }
    CHECK(res0 <= 1e-6);
    CHECK(res1 <= 1e-6);
    CHECK(cons <= 1e-5);
  }

  TEST_CASE("grid convergence of the constants") {
    const auto fine = solve_profiles(30.0, 12000).constants;
    const auto& c = profiles().constants;
    CHECK(std::abs(fine.z0 - c.z0) < 1e-3);
    CHECK(std::abs(fine.w0_at_z0 - c.w0_at_z0) < 1e-4);
  }

  TEST_CASE("w0 oscillates about the far field") {
    const auto& w0 = profiles().w0;
    int changes = 0;
    double prev = w0(0.05) + 1.0;
    for (double z = 0.1; z <= 15.0; z += 0.05) {
      const double v = w0(z) + 1.0;
      if (v * prev < 0.0) ++changes;
      prev = v;
    }
    CHECK(changes >= 3);
  }

  TEST_CASE("WKB decay rate of the tail") {
    const double rate = fit_wkb_decay(profiles().w0, 8.0, 20.0);
    CHECK(rate == doctest::Approx(wkb_rate_exact()).epsilon(0.05));
  }

  TEST_CASE("composite solution") {
    const Profiles& p = profiles();
    const Domain box = Domain::preset("rect");
    // Origin of the rectangle: two flat walls at distance 0.8.
    const double t = 0.3, eps = 0.04;
    const double ph = phi(t, eps), u0 = outer_u0(t);
    const double expect = u0 - u0 * 2.0 * (1.0 + p.w0(0.8 / ph));
    CHECK(composite_solution(box, p, {0, 0}, t, eps) == doctest::Approx(expect).epsilon(1e-12));
    // One flat wall at the trough depth.
    const double ph2 = phi(0.2, 1e-4);
    const Vec2 x(0.0, -0.8 + p.constants.z0 * ph2);
    CHECK(composite_solution(box, p, x, 0.2, 1e-4) ==
          doctest::Approx(outer_u0(0.2) * -p.constants.w0_at_z0).epsilon(1e-6));
    // Layers far from the point: only the outer solution remains.
    const Domain big = Domain::disk({0, 0}, 50.0);
    CHECK(composite_solution(big, p, {0, 0}, 0.05, 0.01) == doctest::Approx(outer_u0(0.05)).epsilon(1e-14));
  }

  TEST_CASE("minimum shift") {
    const auto& c = profiles().constants;
    CHECK(predicted_min_shift({0.0, 0.0}, 0.1, c) == doctest::Approx(c.z0));
    CHECK(predicted_min_shift({5.0}, 0.1, c) == doctest::Approx(c.z0 - c.alpha * 0.5));
    CHECK(predicted_min_shift({5.0}, 0.1, c) == doctest::Approx(2.713).epsilon(2e-3));
    CHECK(predicted_min_shift({-5.0}, 0.1, c) - c.z0 == doctest::Approx(0.5 * c.alpha));
    CHECK_THROWS_AS(predicted_min_shift({}, 0.1, c), DomainError);
  }

  TEST_CASE("predicted minimum deepens with more contributors and higher curvature") {
    const auto& c = profiles().constants;
    const double one = predicted_min_value({0.0}, 0.3, 0.01, c);
    const double two = predicted_min_value({0.0, 0.0}, 0.3, 0.01, c);
    CHECK(two < one);
    CHECK(predicted_min_value({2.0}, 0.3, 0.01, c) < one);
    CHECK(one == doctest::Approx(outer_u0(0.3) * -c.w0_at_z0));
  }
}
