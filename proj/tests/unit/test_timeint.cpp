#include "mems/radau.hpp"
#include "mems/simulation.hpp"

#include <doctest.h>

#include <cmath>
#include <sstream>

using namespace mems;

namespace {

double fixed_step_error(double h) {
  OdeSystem sys(
      1, [](double t, const Eigen::VectorXd& y) { return Eigen::VectorXd(y * std::cos(t)); },
      [](double t, const Eigen::VectorXd&) { return Eigen::MatrixXd::Constant(1, 1, std::cos(t)); });
  IntegrateOptions io;
  io.fixed_step = true;
  io.h0 = h;
  const IntegrateResult r = radau_integrate(sys, 0.0, 2.0, Eigen::VectorXd::Ones(1), io);
  return std::abs(r.y[0] - std::exp(std::sin(2.0)));
}

Eigen::VectorXd wells(const TriMesh& m) {
  Eigen::VectorXd u(m.num_vertices());
  for (int i = 0; i < m.num_vertices(); ++i) {
    const Vec2& x = m.vertex(i);
    u[i] = -0.97 * std::exp(-40.0 * (x - Vec2(-0.513, 0.037)).squaredNorm()) -
           0.93 * std::exp(-40.0 * (x - Vec2(0.48, -0.21)).squaredNorm());
  }
  return u;
}

}  // namespace

TEST_SUITE("timeint") {
  TEST_CASE("flat quench time") {
    CHECK(std::abs(zero_d_quench_time() - 1.0 / 3.0) <= 1e-6);
  }

  TEST_CASE("Radau IIA is fifth order") {
    const double e1 = fixed_step_error(0.2), e2 = fixed_step_error(0.1);
    CHECK(std::log2(e1 / e2) > 4.5);
  }

  TEST_CASE("zero right-hand side keeps the state") {
    OdeSystem sys(
        3, [](double, const Eigen::VectorXd& y) { return Eigen::VectorXd(Eigen::VectorXd::Zero(y.size())); },
        [](double, const Eigen::VectorXd& y) { return Eigen::MatrixXd(Eigen::MatrixXd::Zero(y.size(), y.size())); });
    const Eigen::Vector3d y0(1.0, -2.0, 0.5);
    const IntegrateResult r = radau_integrate(sys, 0.0, 1.0, y0);
    CHECK((r.y - y0).norm() == 0.0);
  }

  TEST_CASE("adaptive integration meets the tolerance") {
    OdeSystem sys(
        2,
        [](double, const Eigen::VectorXd& y) {
          Eigen::VectorXd f(2);
          f << y[1], -y[0];
          return f;
        },
        [](double, const Eigen::VectorXd&) {
          Eigen::MatrixXd J(2, 2);
          J << 0, 1, -1, 0;
          return J;
        });
    RadauOptions ro;
    ro.rtol = ro.atol = 1e-9;
    const IntegrateResult r = radau_integrate(sys, 0.0, 10.0, Eigen::Vector2d(1.0, 0.0), {}, ro);
    CHECK(r.y[0] == doctest::Approx(std::cos(10.0)).epsilon(1e-6));
  }

  TEST_CASE("trough extraction") {
    const TriMesh m = generate_initial_mesh(Domain::preset("rect"), 6400);
    const Eigen::VectorXd u = wells(m);
    const auto all = extract_troughs(m, u, -0.9);
    REQUIRE(all.size() == 2);
    CHECK(all[0].value <= all[1].value);
    CHECK((all[0].point - Vec2(-0.513, 0.037)).norm() < 0.01);
    CHECK((all[1].point - Vec2(0.48, -0.21)).norm() < 0.01);
    for (const auto& t : all) CHECK(t.value <= u[t.vertex]);
    CHECK(extract_troughs(m, u, -0.95).size() == 1);
    CHECK(extract_troughs(m, u, -0.99).empty());
  }

  TEST_CASE("small simulation") {
    SimulationConfig cfg;
    cfg.eps = 0.1;
    cfg.target_N = 400;
    cfg.stop_level = -0.9;
    cfg.trough_level = -0.8;
    std::ostringstream log;
    cfg.log = &log;
    double prev = 1.0;
    bool monotone = true, positive = true;
    cfg.observer = [&](const StepInfo& s, const TriMesh& m, const Eigen::VectorXd&) {
      monotone = monotone && s.min_u <= prev + 1e-12;
      positive = positive && s.min_area > 0.0 && m.min_signed_area() > 0.0;
      prev = s.min_u;
    };
    const TouchdownReport r = run_simulation(Domain::preset("rect"), cfg);
    CHECK(r.touched);
    CHECK(monotone);
    CHECK(positive);
    CHECK(r.t_touch > 0.25);
    CHECK(r.t_touch < 1.0 / 3.0);
    REQUIRE(!r.points.empty());
    for (const auto& p : r.points) CHECK(p.value <= -0.9);
    CHECK(r.points.front().point.norm() < 0.1);
    CHECK(log.str().rfind("# step t dt min_u", 0) == 0);
  }
}
