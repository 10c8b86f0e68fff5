#include "mems/mmpde.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace mems;

namespace {

Mat2 random_spd(std::mt19937& rng) {
  std::uniform_real_distribution<double> u(-1, 1);
  Mat2 A;
  A << u(rng), u(rng), u(rng), u(rng);
  return A * A.transpose() + 0.3 * Mat2::Identity();
}

// Random Delaunay patch with exactly 10 triangles, all vertices free.
TriMesh random_patch(std::mt19937& rng) {
  std::uniform_real_distribution<double> u(0, 1);
  for (;;) {
    std::vector<Vec2> p(8);
    for (auto& x : p) x = {u(rng), u(rng)};
    auto tris = delaunay(p);
    if (tris.size() != 10) continue;
    TriMesh m = TriMesh::from_arrays(p, tris, std::vector<BoundaryMarker>(p.size()));
    if (m.min_signed_area() > 1e-3) return m;
  }
}

MetricField metric_of(std::vector<Mat2> M) {
  MetricField f;
  f.M = std::move(M);
  return f;
}

Eigen::VectorXd bump_values(const TriMesh& m) {
  Eigen::VectorXd v(m.num_vertices());
  for (int i = 0; i < m.num_vertices(); ++i) v[i] = -0.9 * std::exp(-30.0 * (m.vertex(i) - Vec2(0.4, 0.2)).squaredNorm());
  return v;
}

}  // namespace

TEST_SUITE("mmpde") {
  TEST_CASE("energy density reference values") {
    CHECK(energy_density(Mat2::Identity(), Mat2::Identity()) == doctest::Approx(std::pow(2.0, 2.5) / 3.0));
    CHECK(energy_dG_ddetJ(Mat2::Identity(), Mat2::Identity()) == doctest::Approx(std::sqrt(2.0)));
    const TriMesh m = structured_rect_mesh(Domain::rectangle(0, 0, 1, 1), 1, 1, QuadSplit::Diagonal);
    const MetricField I = metric_of({Mat2::Identity(), Mat2::Identity()});
    CHECK(energy(m, m, I) == doctest::Approx(std::pow(2.0, 2.5) / 3.0));
  }

  TEST_CASE("energy scales with the metric") {
    std::mt19937 rng(4);
    for (int k = 0; k < 20; ++k) {
      const Mat2 M = random_spd(rng), J = random_spd(rng);
      CHECK(energy_density(J, 4.0 * M) == doctest::Approx(0.5 * energy_density(J, M)).epsilon(1e-12));
    }
  }

  TEST_CASE("energy is translation invariant") {
    std::mt19937 rng(5);
    const TriMesh m = random_patch(rng);
    std::vector<Mat2> M(m.num_triangles());
    for (auto& a : M) a = random_spd(rng);
    const MetricField f = metric_of(M);
    std::vector<Vec2> shifted = m.vertices();
    for (auto& x : shifted) x += Vec2(3.0, -1.5);
    CHECK(energy(m, m.with_vertices(shifted), f) == doctest::Approx(energy(m, m, f)).epsilon(1e-12));
  }

  TEST_CASE("velocities are the negative energy gradient") {
    std::mt19937 rng(1);
    std::uniform_real_distribution<double> u(-0.05, 0.05);
    for (int trial = 0; trial < 20; ++trial) {
      const TriMesh phys = random_patch(rng);
      std::vector<Mat2> M(phys.num_triangles());
      for (auto& a : M) a = random_spd(rng);
      const MetricField f = metric_of(M);
      std::vector<Vec2> xi;
      TriMesh comp;
      do {
        xi = phys.vertices();
        for (auto& x : xi) x += Vec2(u(rng), u(rng));
        comp = phys.with_vertices(xi);
      } while (comp.min_signed_area() <= 0.0);
      const auto v = assemble_velocities(phys, comp, f);
      const double h = 1e-6;
      double scale = 0.0, worst = 0.0;
      for (int i = 0; i < phys.num_vertices(); ++i)
        for (int c = 0; c < 2; ++c) {
          auto plus = xi, minus = xi;
          plus[i][c] += h;
          minus[i][c] -= h;
          const double g = (energy(phys, phys.with_vertices(plus), f) - energy(phys, phys.with_vertices(minus), f)) / (2 * h);
          worst = std::max(worst, std::abs(v[i][c] + g));
          scale = std::max(scale, std::abs(g));
        }
      CHECK(worst <= 1e-6 * scale);
    }
  }

  TEST_CASE("uniform mesh with identity metric is stationary") {
    const TriMesh m = generate_initial_mesh(Domain::preset("rect"), 800);
    const MetricField f = metric_of(std::vector<Mat2>(m.num_triangles(), Mat2::Identity()));
    const auto v = assemble_velocities(m, m, f);
    for (int i = 0; i < m.num_interior(); ++i) CHECK(v[i].norm() < 1e-12);
    for (double p : balance_factors(m, f)) CHECK(p == doctest::Approx(1.0));
  }

  TEST_CASE("moving with the identity metric keeps the mesh") {
    const Domain d = Domain::preset("rect");
    const TriMesh m = generate_initial_mesh(d, 800);
    const MetricField f = metric_of(std::vector<Mat2>(m.num_triangles(), Mat2::Identity()));
    MoveOptions o;
    o.interval = 1e-3;
    const MoveResult r = move_mesh(d, m, m, f, o);
    double shift = 0.0;
    for (int i = 0; i < m.num_vertices(); ++i) shift = std::max(shift, (r.mesh.vertex(i) - m.vertex(i)).norm());
    CHECK(shift < 1e-8);
  }

  TEST_CASE("vertices concentrate where the metric is large") {
    const Domain d = Domain::preset("rect");
    TriMesh m = generate_initial_mesh(d, 1600);
    const TriMesh ref = m;
    const Eigen::VectorXd u = bump_values(m);
    auto count_near = [](const TriMesh& mesh) {
      int c = 0;
      for (const auto& x : mesh.vertices()) c += (x - Vec2(0.4, 0.2)).norm() < 0.2;
      return c;
    };
    const int before = count_near(m);
    MoveOptions o;
    o.interval = 0.05;
    for (int it = 0; it < 10; ++it) {
      Eigen::VectorXd uv(m.num_vertices());
      for (int i = 0; i < m.num_vertices(); ++i) uv[i] = interpolate_linear(ref, u, m.vertex(i));
      const MetricField f = metric_tensor(m, uv);
      const MoveResult r = move_mesh(d, m, ref, f, o);
      CHECK(r.mesh.min_signed_area() > 0.0);
      CHECK(min_area_along_path(m, r.mesh) > 0.0);
      CHECK(r.energy_end <= r.energy_start * (1 + 1e-9));
      for (int i = m.num_interior(); i < m.num_vertices(); ++i)
        CHECK(d.curve(m.marker(i).curve).distance(r.mesh.vertex(i)) < 1e-10);
      m = r.mesh;
    }
    CHECK(count_near(m) >= before + 8);
  }

  TEST_CASE("path area minimum") {
    const TriMesh a = structured_rect_mesh(Domain::rectangle(0, 0, 1, 1), 1, 1, QuadSplit::Diagonal);
    std::vector<Vec2> v = a.vertices();
    CHECK(min_area_along_path(a, a) == doctest::Approx(0.5));
    // Collapse one triangle by reflection: area passes through zero.
    for (auto& x : v) x = Vec2(x.x(), -x.y());
    CHECK(min_area_along_path(a, a.with_vertices(v)) <= 0.0);
  }
}
