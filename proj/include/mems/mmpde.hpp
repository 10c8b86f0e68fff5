#pragma once

#include "mems/core.hpp"
#include "mems/geometry.hpp"
#include "mems/mesh.hpp"
#include "mems/metric.hpp"

#include <array>
#include <vector>

namespace mems {

/// Mesh energy density with d = 2 and exponent 3/2:
/// G = (1/3) sqrt(det M) tr(J M^{-1} J^T)^{3/2} + (2^{3/2}/3) sqrt(det M) (det J / sqrt(det M))^{3/2}.
double energy_density(const Mat2& J, const Mat2& M);
/// dG/dJ (shaped like J^T) and dG/d(det J).
Mat2 energy_dG_dJ(const Mat2& J, const Mat2& M);
double energy_dG_ddetJ(const Mat2& J, const Mat2& M);

/// I_h = sum_K |K| G(J_K, M_K).
double energy(const TriMesh& phys, const TriMesh& comp, const MetricField& metric);

/// Local velocities v_0, v_1, v_2 of an element (without the |K| factor).
std::array<Vec2, 3> local_velocities(const ElementPair& pair, const Mat2& M);

/// sum_K |K| v^K_i per vertex, i.e. -(dI_h/dxi_i)^T.
std::vector<Vec2> assemble_velocities(const TriMesh& phys, const TriMesh& comp, const MetricField& metric);

/// Balancing factor P_i = det(M(x_i))^{1/4} with M(x_i) averaged from adjacent elements.
std::vector<double> balance_factors(const TriMesh& phys, const MetricField& metric);

struct MoveOptions {
  double tau = 0.01;
  double interval = 1.0;  // flow time per move; the simulator passes the PDE step size
  double rtol = 1e-6;
  double atol = 1e-6;
  int max_tau_doublings = 10;
  int max_steps = 20000;
};

struct MoveResult {
  TriMesh mesh;           // new physical mesh
  TriMesh comp;           // computational mesh at the end of the flow
  double energy_start = 0.0;
  double energy_end = 0.0;
  double tau_used = 0.0;
  double max_speed = 0.0;  // max |dxi/dt| at the start of the flow
  int steps = 0;
  int rejected = 0;
};

/// Integrates the computational-mesh gradient flow starting from the reference mesh with the
/// physical mesh frozen, then maps the reference vertices through the resulting piecewise
/// linear correspondence to obtain the new physical mesh. Boundary vertices slide along
/// their curves and corners stay fixed. Retries with tau doubled when the new mesh tangles.
MoveResult move_mesh(const Domain& domain, const TriMesh& phys, const TriMesh& ref_comp,
                     const MetricField& metric, const MoveOptions& opts = {});

/// Minimum over elements and theta in [0, 1] of the signed area along the linear path a -> b.
double min_area_along_path(const TriMesh& a, const TriMesh& b);

}  // namespace mems
