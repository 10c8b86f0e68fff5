#pragma once

#include "mems/core.hpp"
#include "mems/mesh.hpp"

#include <Eigen/Sparse>

#include <array>
#include <functional>
#include <vector>

namespace mems {

using SpMat = Eigen::SparseMatrix<double>;

/// Linear-element gradients and area of triangle k (gradients of the three hat functions).
struct ElementGeometry {
  std::array<Vec2, 3> grad;
  double area = 0.0;
};
ElementGeometry element_geometry(const TriMesh& mesh, int k);

/// Consistent mass matrix. The reduced form keeps interior basis functions only
/// (homogeneous Dirichlet data), which are numbered first in every TriMesh.
SpMat assemble_mass_full(const TriMesh& mesh);
SpMat assemble_mass(const TriMesh& mesh);
/// Stiffness matrix int grad(psi_i) . grad(psi_j).
SpMat assemble_stiffness_full(const TriMesh& mesh);
SpMat assemble_stiffness(const TriMesh& mesh);

/// Extra forcing s(x, t) added to the right-hand side as int s psi_j.
using SourceFn = std::function<double(const Vec2&, double)>;

struct LoadOptions {
  double quench_floor = 0.01;  // QuenchReached when min(1 + U) <= quench_floor
  const SourceFn* source = nullptr;
  double time = 0.0;
};

/// F_j = -int psi_j / (1 + u_h)^2 + int (grad u_h . Xdot_h) psi_j over interior j.
/// U holds interior values; xdot holds one velocity per mesh vertex (may be empty).
Eigen::VectorXd assemble_load(const TriMesh& mesh, const Eigen::VectorXd& U, const std::vector<Vec2>& xdot,
                              const LoadOptions& opts = {});

/// dF/dU: the nonlinear part int 2 psi_i psi_j / (1 + u_h)^3 plus the convection matrix.
SpMat assemble_load_jacobian(const TriMesh& mesh, const Eigen::VectorXd& U, const std::vector<Vec2>& xdot);

struct DaeResidual {
  Eigen::VectorXd r1;  // M Udot - eps^2 B V - F
  Eigen::VectorXd r2;  // M V + B U
};

DaeResidual dae_residual(const TriMesh& mesh, const std::vector<Vec2>& xdot, const Eigen::VectorXd& U,
                         const Eigen::VectorXd& Udot, const Eigen::VectorXd& V, double eps,
                         const LoadOptions& opts = {});

/// Interior vector extended by zeros on the boundary vertices.
Eigen::VectorXd extend_by_zero(const TriMesh& mesh, const Eigen::VectorXd& interior);

/// Mesh at theta in [0, 1] on the linear vertex path a -> b (arc-lengths of a kept).
TriMesh interpolate_mesh(const TriMesh& a, const TriMesh& b, double theta);
/// Constant vertex velocities (b - a) / dt.
std::vector<Vec2> mesh_velocity(const TriMesh& a, const TriMesh& b, double dt);

/// L2 norm of the difference between the P1 function (interior values, zero boundary) and f,
/// using a degree-4 quadrature rule per element.
double l2_error(const TriMesh& mesh, const Eigen::VectorXd& U, const std::function<double(const Vec2&)>& f);

}  // namespace mems
