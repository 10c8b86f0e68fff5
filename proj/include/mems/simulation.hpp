#pragma once

#include "mems/core.hpp"
#include "mems/geometry.hpp"
#include "mems/mesh.hpp"
#include "mems/metric.hpp"
#include "mems/mmpde.hpp"

#include <functional>
#include <iosfwd>
#include <vector>

namespace mems {

struct Trough {
  Vec2 point;          // refined (quadratic-fit) location
  double value = 0.0;  // U at the refined location (never above the vertex value)
  int vertex = -1;
};

/// Accepted-step diagnostics.
struct StepInfo {
  int step = 0;
  double t = 0.0;
  double dt = 0.0;
  double min_u = 0.0;
  double energy = 0.0;    // I_h at the end of the mesh flow
  double min_area = 0.0;  // smallest element area along the slab's vertex path
  double tau = 0.0;       // tau actually used by the mesh mover
  int mesh_steps = 0;
  int newton = 0;
  int rejected = 0;
};

struct SimulationConfig {
  double eps = 0.02;
  int target_N = 6240;
  MeshOptions mesh;
  bool adapt = true;  // false keeps the initial mesh fixed
  double tau = 0.01;
  double mesh_rtol = 1e-6;
  double mesh_dt_floor = 1e-6;  // smallest flow interval handed to the mesh mover
  MetricOptions metric;
  double rtol = 1e-6;
  double atol = 1e-8;
  double dt0 = 1e-4;
  double cq = 0.1;             // dt <= cq (1 + min U)^3
  double stop_level = -0.99;   // run ends once min U reaches this value
  double trough_level = -0.9;
  double quench_floor = 1e-3;
  double t_max = 1.0;
  int max_steps = 100000;
  int max_halvings = 10;
  std::ostream* log = nullptr;
  /// Called after every accepted step with the current mesh and full nodal U.
  std::function<void(const StepInfo&, const TriMesh&, const Eigen::VectorXd&)> observer;
};

struct TouchdownReport {
  double eps = 0.0;
  int N = 0;
  bool touched = false;
  double t_touch = 0.0;           // interpolated time where min U crosses stop_level
  double t_final = 0.0;
  double min_u = 0.0;
  std::vector<Trough> points;     // troughs at or below stop_level
  std::vector<Trough> troughs;    // troughs at or below trough_level
  int steps = 0;
  int rejected = 0;
  double min_area = 0.0;          // smallest element area over all accepted slabs
  TriMesh mesh;                   // final mesh
  Eigen::VectorXd u;              // final U on every vertex
  Eigen::VectorXd v;              // final V on every vertex
  std::vector<StepInfo> history;
};

/// Raised when the mesh mover or the PDE integrator gives up; carries the last valid state.
struct SimulationFailure : SolveError {
  SimulationFailure(const std::string& what, TouchdownReport last) : SolveError(what), checkpoint(std::move(last)) {}
  TouchdownReport checkpoint;
};

/// Alternates metric construction, mesh movement over the PDE step and one Radau IIA step of
/// the mixed DAE on the linearly moving mesh, until min U <= stop_level.
TouchdownReport run_simulation(const Domain& domain, const SimulationConfig& cfg);
TouchdownReport run_simulation(const Domain& domain, const TriMesh& initial, const SimulationConfig& cfg);

/// Discrete local minima of u (full nodal vector) at or below level, merged within 3 local h,
/// sorted by value. Each point is refined by a quadratic fit over the vertex patch.
std::vector<Trough> extract_troughs(const TriMesh& mesh, const Eigen::VectorXd& u, double level);

/// Mean length of the edges incident to vertex i.
double local_mesh_size(const TriMesh& mesh, int i);

/// Writes one run-log line per step (header on first use).
void write_step_log(std::ostream& out, const StepInfo& info, bool header);

}  // namespace mems
