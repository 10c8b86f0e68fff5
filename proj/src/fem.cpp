#include "mems/fem.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace mems {

namespace {

// Interior order-2 rule: barycentric (2/3, 1/6, 1/6) and permutations, equal weights.
constexpr double kQ3[3][3] = {{2.0 / 3.0, 1.0 / 6.0, 1.0 / 6.0},
                              {1.0 / 6.0, 2.0 / 3.0, 1.0 / 6.0},
                              {1.0 / 6.0, 1.0 / 6.0, 2.0 / 3.0}};

// Dunavant degree-4 rule (6 points).
struct QPoint {
  double l0, l1, l2, w;
};
const QPoint kQ6[6] = {
    {0.108103018168070, 0.445948490915965, 0.445948490915965, 0.223381589678011},
    {0.445948490915965, 0.108103018168070, 0.445948490915965, 0.223381589678011},
    {0.445948490915965, 0.445948490915965, 0.108103018168070, 0.223381589678011},
    {0.816847572980459, 0.091576213509771, 0.091576213509771, 0.109951743655322},
    {0.091576213509771, 0.816847572980459, 0.091576213509771, 0.109951743655322},
    {0.091576213509771, 0.091576213509771, 0.816847572980459, 0.109951743655322},
};

template <class Local>
SpMat assemble(const TriMesh& mesh, bool reduced, Local local) {
  const int n = reduced ? mesh.num_interior() : mesh.num_vertices();
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<std::size_t>(mesh.num_triangles()) * 9);
  for (int k = 0; k < mesh.num_triangles(); ++k) {
    const auto& t = mesh.triangle(k);
    const ElementGeometry g = element_geometry(mesh, k);
    for (int a = 0; a < 3; ++a) {
      if (t[a] >= n) continue;
      for (int b = 0; b < 3; ++b)
        if (t[b] < n) trip.emplace_back(t[a], t[b], local(g, a, b));
    }
  }
  SpMat A(n, n);
  A.setFromTriplets(trip.begin(), trip.end());
  return A;
}

double mass_entry(const ElementGeometry& g, int a, int b) { return g.area / 12.0 * (a == b ? 2.0 : 1.0); }
double stiff_entry(const ElementGeometry& g, int a, int b) { return g.area * g.grad[a].dot(g.grad[b]); }

double nodal(const Eigen::VectorXd& U, int n_int, int v) { return v < n_int ? U[v] : 0.0; }

}  // namespace

ElementGeometry element_geometry(const TriMesh& mesh, int k) {
  const auto& t = mesh.triangle(k);
  const Vec2& p0 = mesh.vertex(t[0]);
  const Vec2& p1 = mesh.vertex(t[1]);
  const Vec2& p2 = mesh.vertex(t[2]);
  const double det = cross(p1 - p0, p2 - p0);
  if (det <= 1e-14) throw DegenerateElement("element " + std::to_string(k) + " is degenerate or inverted");
  ElementGeometry g;
  g.area = 0.5 * det;
  g.grad[0] = Vec2(p1.y() - p2.y(), p2.x() - p1.x()) / det;
  g.grad[1] = Vec2(p2.y() - p0.y(), p0.x() - p2.x()) / det;
  g.grad[2] = Vec2(p0.y() - p1.y(), p1.x() - p0.x()) / det;
  return g;
}

SpMat assemble_mass_full(const TriMesh& mesh) { return assemble(mesh, false, mass_entry); }
SpMat assemble_mass(const TriMesh& mesh) { return assemble(mesh, true, mass_entry); }
SpMat assemble_stiffness_full(const TriMesh& mesh) { return assemble(mesh, false, stiff_entry); }
SpMat assemble_stiffness(const TriMesh& mesh) { return assemble(mesh, true, stiff_entry); }

Eigen::VectorXd assemble_load(const TriMesh& mesh, const Eigen::VectorXd& U, const std::vector<Vec2>& xdot,
                              const LoadOptions& opts) {
  const int n = mesh.num_interior();
  if (U.size() != n) throw DomainError("assemble_load: U must hold interior values");
  if (n > 0 && 1.0 + U.minCoeff() <= opts.quench_floor)
    throw QuenchReached("min(1 + U) reached the quench floor");
  const bool moving = !xdot.empty();
  Eigen::VectorXd F = Eigen::VectorXd::Zero(n);
  for (int k = 0; k < mesh.num_triangles(); ++k) {
    const auto& t = mesh.triangle(k);
    const ElementGeometry g = element_geometry(mesh, k);
    const double u[3] = {nodal(U, n, t[0]), nodal(U, n, t[1]), nodal(U, n, t[2])};
    double local[3] = {0.0, 0.0, 0.0};
    for (const auto& q : kQ3) {
      const double uq = q[0] * u[0] + q[1] * u[1] + q[2] * u[2];
      const double s = 1.0 / ((1.0 + uq) * (1.0 + uq));
      for (int a = 0; a < 3; ++a) local[a] -= g.area / 3.0 * s * q[a];
    }
    if (opts.source) {
      for (const auto& q : kQ6) {
        const Vec2 x = q.l0 * mesh.vertex(t[0]) + q.l1 * mesh.vertex(t[1]) + q.l2 * mesh.vertex(t[2]);
        const double s = (*opts.source)(x, opts.time) * q.w * g.area;
        local[0] += s * q.l0;
        local[1] += s * q.l1;
        local[2] += s * q.l2;
      }
    }
    if (moving) {
      const Vec2 grad_u = u[0] * g.grad[0] + u[1] * g.grad[1] + u[2] * g.grad[2];
      double c[3];
      for (int b = 0; b < 3; ++b) c[b] = grad_u.dot(xdot[t[b]]);
      for (int a = 0; a < 3; ++a) local[a] += g.area / 12.0 * (c[0] + c[1] + c[2] + c[a]);
    }
    for (int a = 0; a < 3; ++a)
      if (t[a] < n) F[t[a]] += local[a];
  }
  return F;
}

SpMat assemble_load_jacobian(const TriMesh& mesh, const Eigen::VectorXd& U, const std::vector<Vec2>& xdot) {
  const int n = mesh.num_interior();
  const bool moving = !xdot.empty();
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<std::size_t>(mesh.num_triangles()) * 9);
  for (int k = 0; k < mesh.num_triangles(); ++k) {
    const auto& t = mesh.triangle(k);
    const ElementGeometry g = element_geometry(mesh, k);
    const double u[3] = {nodal(U, n, t[0]), nodal(U, n, t[1]), nodal(U, n, t[2])};
    double local[3][3] = {};
    for (const auto& q : kQ3) {
      const double uq = q[0] * u[0] + q[1] * u[1] + q[2] * u[2];
      const double s = 2.0 / std::pow(1.0 + uq, 3);
      for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b) local[a][b] += g.area / 3.0 * s * q[a] * q[b];
    }
    if (moving) {
      // d/dU_b of int (grad u . Xdot) psi_a = sum_c (grad psi_b . Xdot_c) int psi_c psi_a.
      for (int b = 0; b < 3; ++b) {
        double c[3];
        for (int m = 0; m < 3; ++m) c[m] = g.grad[b].dot(xdot[t[m]]);
        for (int a = 0; a < 3; ++a) local[a][b] += g.area / 12.0 * (c[0] + c[1] + c[2] + c[a]);
      }
    }
    for (int a = 0; a < 3; ++a) {
      if (t[a] >= n) continue;
      for (int b = 0; b < 3; ++b)
        if (t[b] < n) trip.emplace_back(t[a], t[b], local[a][b]);
    }
  }
  SpMat J(n, n);
  J.setFromTriplets(trip.begin(), trip.end());
  return J;
}

DaeResidual dae_residual(const TriMesh& mesh, const std::vector<Vec2>& xdot, const Eigen::VectorXd& U,
                         const Eigen::VectorXd& Udot, const Eigen::VectorXd& V, double eps,
                         const LoadOptions& opts) {
  const SpMat M = assemble_mass(mesh);
  const SpMat B = assemble_stiffness(mesh);
  DaeResidual r;
  r.r1 = M * Udot - eps * eps * (B * V) - assemble_load(mesh, U, xdot, opts);
  r.r2 = M * V + B * U;
  return r;
}

Eigen::VectorXd extend_by_zero(const TriMesh& mesh, const Eigen::VectorXd& interior) {
  Eigen::VectorXd full = Eigen::VectorXd::Zero(mesh.num_vertices());
  full.head(mesh.num_interior()) = interior;
  return full;
}

TriMesh interpolate_mesh(const TriMesh& a, const TriMesh& b, double theta) {
  if (theta == 0.0) return a;
  if (theta == 1.0) return b;
  std::vector<Vec2> x(a.num_vertices());
  for (int i = 0; i < a.num_vertices(); ++i) x[i] = (1.0 - theta) * a.vertex(i) + theta * b.vertex(i);
  return a.with_vertices(std::move(x));
}

std::vector<Vec2> mesh_velocity(const TriMesh& a, const TriMesh& b, double dt) {
  std::vector<Vec2> v(a.num_vertices());
  for (int i = 0; i < a.num_vertices(); ++i) v[i] = (b.vertex(i) - a.vertex(i)) / dt;
  return v;
}

double l2_error(const TriMesh& mesh, const Eigen::VectorXd& U, const std::function<double(const Vec2&)>& f) {
  const int n = mesh.num_interior();
  double acc = 0.0;
  for (int k = 0; k < mesh.num_triangles(); ++k) {
    const auto& t = mesh.triangle(k);
    const double area = mesh.signed_area(k);
    for (const auto& q : kQ6) {
      const Vec2 x = q.l0 * mesh.vertex(t[0]) + q.l1 * mesh.vertex(t[1]) + q.l2 * mesh.vertex(t[2]);
      const double uh = q.l0 * nodal(U, n, t[0]) + q.l1 * nodal(U, n, t[1]) + q.l2 * nodal(U, n, t[2]);
      const double e = uh - f(x);
      acc += q.w * area * e * e;
    }
  }
  return std::sqrt(acc);
}

}  // namespace mems
