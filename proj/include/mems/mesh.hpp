#pragma once

#include "mems/core.hpp"
#include "mems/geometry.hpp"

#include <array>
#include <iosfwd>
#include <memory>
#include <string>
#include <utility>
#include <vector>

namespace mems {

/// Per-vertex boundary membership. curve < 0 marks an interior vertex.
struct BoundaryMarker {
  int curve = -1;
  double s = 0.0;
  bool corner = false;
  bool on_boundary() const { return curve >= 0; }
};

/// Connectivity and boundary data shared (immutably) by every snapshot of a mesh.
struct MeshTopology {
  std::vector<std::array<int, 3>> triangles;
  std::vector<BoundaryMarker> markers;
  int n_interior = 0;
  // Derived adjacency.
  std::vector<std::vector<int>> vertex_triangles;
  std::vector<std::vector<int>> vertex_neighbors;
  std::vector<std::array<int, 3>> triangle_neighbors;  // opposite vertex i; -1 on the boundary
  std::vector<std::pair<int, int>> edges;

  void build_adjacency(int n_vertices);
};

/// Triangle mesh with fixed connectivity. Interior vertices are numbered first.
class TriMesh {
 public:
  TriMesh() = default;
  TriMesh(std::vector<Vec2> vertices, std::shared_ptr<const MeshTopology> topo);
  TriMesh(std::vector<Vec2> vertices, std::vector<double> arc, std::shared_ptr<const MeshTopology> topo);
  /// Builds topology from raw arrays. Reorders vertices so interior ones come first
  /// and orients all triangles counterclockwise.
  static TriMesh from_arrays(std::vector<Vec2> vertices, std::vector<std::array<int, 3>> triangles,
                             std::vector<BoundaryMarker> markers);

  int num_vertices() const { return static_cast<int>(vertices_.size()); }
  int num_triangles() const { return static_cast<int>(topo_->triangles.size()); }
  int num_interior() const { return topo_->n_interior; }

  const std::vector<Vec2>& vertices() const { return vertices_; }
  const Vec2& vertex(int i) const { return vertices_[i]; }
  const std::array<int, 3>& triangle(int k) const { return topo_->triangles[k]; }
  const std::vector<std::array<int, 3>>& triangles() const { return topo_->triangles; }
  const BoundaryMarker& marker(int i) const { return topo_->markers[i]; }
  /// Current arc-length of a boundary vertex on its curve (NaN for interior vertices).
  double arc_length(int i) const { return arc_[i]; }
  const std::vector<double>& arc_lengths() const { return arc_; }
  const MeshTopology& topology() const { return *topo_; }
  const std::shared_ptr<const MeshTopology>& topology_ptr() const { return topo_; }

  double signed_area(int k) const;
  double min_signed_area() const;
  Vec2 centroid(int k) const;
  bool shares_topology(const TriMesh& other) const { return topo_ == other.topo_; }

  /// Same connectivity, new vertex positions (boundary arc-lengths kept or replaced).
  TriMesh with_vertices(std::vector<Vec2> vertices) const;
  TriMesh with_vertices(std::vector<Vec2> vertices, std::vector<double> arc) const;

 private:
  std::vector<Vec2> vertices_;
  std::vector<double> arc_;
  std::shared_ptr<const MeshTopology> topo_;
};

enum class MeshMode { Auto, Structured, Unstructured };
/// Structured quads are split either into 4 triangles through a center vertex
/// (Cross) or into 2 along the lower-left/upper-right diagonal (Diagonal).
enum class QuadSplit { Cross, Diagonal };

struct MeshOptions {
  MeshMode mode = MeshMode::Auto;
  QuadSplit split = QuadSplit::Cross;
  int nx = 0;  // structured cell counts; 0 picks them from target_N
  int ny = 0;
  int smoothing_rounds = 3;
  unsigned seed = 12345;
};

/// Quasi-uniform triangulation of the domain with approximately target_N triangles.
/// Axis-aligned rectangles default to structured grids, everything else to an
/// unstructured Delaunay mesh.
TriMesh generate_initial_mesh(const Domain& domain, int target_N, const MeshOptions& opts = {});
TriMesh structured_rect_mesh(const Domain& domain, int nx, int ny, QuadSplit split);
/// Cell counts (nx, ny) whose triangle count is closest to target_N for the given split.
std::pair<int, int> structured_cells(const Domain& domain, int target_N, QuadSplit split);

/// Plain Delaunay triangulation of a point set (counterclockwise triangles).
std::vector<std::array<int, 3>> delaunay(const std::vector<Vec2>& points);

struct ElementPair {
  Mat2 E;
  Mat2 E_hat;
  Mat2 J;  // E_hat * E^{-1}
  double area = 0.0;
  double area_c = 0.0;
};

ElementPair element_pair(const TriMesh& phys, const TriMesh& comp, int k);
ElementPair element_pair(const Vec2& x0, const Vec2& x1, const Vec2& x2, const Vec2& xi0,
                         const Vec2& xi1, const Vec2& xi2);

/// Point location by walking from the last hit, with a brute-force fallback.
class PointLocator {
 public:
  explicit PointLocator(const TriMesh& mesh);
  /// Containing triangle (or -1) and barycentric coordinates.
  int locate(const Vec2& x, Eigen::Vector3d* bary = nullptr, double tol = 1e-12);
  /// Triangle nearest to x, with (possibly extrapolated) barycentric coordinates.
  int locate_nearest(const Vec2& x, Eigen::Vector3d* bary);

 private:
  const TriMesh& mesh_;
  int last_ = 0;
};

Eigen::Vector3d barycentric(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& x);

double interpolate_linear(const TriMesh& mesh, const Eigen::VectorXd& nodal, const Vec2& x);
double interpolate_linear(PointLocator& loc, const TriMesh& mesh, const Eigen::VectorXd& nodal,
                          const Vec2& x);

/// VTK legacy ASCII unstructured grid with optional point scalars.
void write_vtk(std::ostream& out, const TriMesh& mesh,
               const std::vector<std::pair<std::string, const Eigen::VectorXd*>>& point_data = {},
               const std::string& title = "mems mesh");
void write_vtk(const std::string& path, const TriMesh& mesh,
               const std::vector<std::pair<std::string, const Eigen::VectorXd*>>& point_data = {},
               const std::string& title = "mems mesh");

}  // namespace mems
