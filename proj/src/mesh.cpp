#include "mems/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <numeric>
#include <ostream>
#include <random>

namespace mems {

namespace {

double orient(const Vec2& a, const Vec2& b, const Vec2& c) { return cross(b - a, c - a); }

double point_segment_distance(const Vec2& x, const Vec2& a, const Vec2& b) {
  const Vec2 e = b - a;
  const double ee = e.squaredNorm();
  const double t = ee > 0.0 ? std::clamp((x - a).dot(e) / ee, 0.0, 1.0) : 0.0;
  return (a + t * e - x).norm();
}

}  // namespace

// ---------------------------------------------------------------------------
// Topology

void MeshTopology::build_adjacency(int n_vertices) {
  vertex_triangles.assign(n_vertices, {});
  vertex_neighbors.assign(n_vertices, {});
  triangle_neighbors.assign(triangles.size(), {-1, -1, -1});
  edges.clear();
  std::map<std::pair<int, int>, std::pair<int, int>> edge_map;  // edge -> (triangle, local index)
  for (int k = 0; k < static_cast<int>(triangles.size()); ++k) {
    const auto& t = triangles[k];
    for (int i = 0; i < 3; ++i) {
      vertex_triangles[t[i]].push_back(k);
      const int a = t[(i + 1) % 3], b = t[(i + 2) % 3];
      const auto key = std::minmax(a, b);
      auto it = edge_map.find(key);
      if (it == edge_map.end()) {
        edge_map.emplace(key, std::make_pair(k, i));
      } else {
        triangle_neighbors[k][i] = it->second.first;
        triangle_neighbors[it->second.first][it->second.second] = k;
      }
    }
  }
  edges.reserve(edge_map.size());
  for (const auto& [e, _] : edge_map) {
    edges.push_back(e);
    vertex_neighbors[e.first].push_back(e.second);
    vertex_neighbors[e.second].push_back(e.first);
  }
  for (auto& nb : vertex_neighbors) std::sort(nb.begin(), nb.end());
}

TriMesh::TriMesh(std::vector<Vec2> vertices, std::shared_ptr<const MeshTopology> topo)
    : vertices_(std::move(vertices)), topo_(std::move(topo)) {
  if (!topo_ || topo_->markers.size() != vertices_.size())
    throw MeshGenError("TriMesh: vertex count does not match topology");
  arc_.resize(vertices_.size());
  for (std::size_t i = 0; i < arc_.size(); ++i)
    arc_[i] = topo_->markers[i].on_boundary() ? topo_->markers[i].s : std::numeric_limits<double>::quiet_NaN();
}

TriMesh::TriMesh(std::vector<Vec2> vertices, std::vector<double> arc, std::shared_ptr<const MeshTopology> topo)
    : vertices_(std::move(vertices)), arc_(std::move(arc)), topo_(std::move(topo)) {
  if (!topo_ || topo_->markers.size() != vertices_.size() || arc_.size() != vertices_.size())
    throw MeshGenError("TriMesh: vertex count does not match topology");
}

TriMesh TriMesh::from_arrays(std::vector<Vec2> vertices, std::vector<std::array<int, 3>> triangles,
                             std::vector<BoundaryMarker> markers) {
  const int nv = static_cast<int>(vertices.size());
  if (static_cast<int>(markers.size()) != nv) throw MeshGenError("marker count does not match vertices");
  std::vector<int> perm;
  perm.reserve(nv);
  for (int i = 0; i < nv; ++i)
    if (!markers[i].on_boundary()) perm.push_back(i);
  const int n_int = static_cast<int>(perm.size());
  for (int i = 0; i < nv; ++i)
    if (markers[i].on_boundary()) perm.push_back(i);
  std::vector<int> inv(nv);
  for (int i = 0; i < nv; ++i) inv[perm[i]] = i;
  auto topo = std::make_shared<MeshTopology>();
  std::vector<Vec2> v(nv);
  topo->markers.resize(nv);
  for (int i = 0; i < nv; ++i) {
    v[i] = vertices[perm[i]];
    topo->markers[i] = markers[perm[i]];
  }
  topo->n_interior = n_int;
  topo->triangles.reserve(triangles.size());
  for (auto t : triangles) {
    for (int& x : t) {
      if (x < 0 || x >= nv) throw MeshGenError("triangle references a missing vertex");
      x = inv[x];
    }
    const double a = orient(v[t[0]], v[t[1]], v[t[2]]);
    if (a == 0.0) throw MeshGenError("zero-area triangle");
    if (a < 0.0) std::swap(t[1], t[2]);
    topo->triangles.push_back(t);
  }
  topo->build_adjacency(nv);
  return TriMesh(std::move(v), std::move(topo));
}

double TriMesh::signed_area(int k) const {
  const auto& t = triangle(k);
  return 0.5 * orient(vertices_[t[0]], vertices_[t[1]], vertices_[t[2]]);
}

double TriMesh::min_signed_area() const {
  double m = std::numeric_limits<double>::infinity();
  for (int k = 0; k < num_triangles(); ++k) m = std::min(m, signed_area(k));
  return m;
}

Vec2 TriMesh::centroid(int k) const {
  const auto& t = triangle(k);
  return (vertices_[t[0]] + vertices_[t[1]] + vertices_[t[2]]) / 3.0;
}

TriMesh TriMesh::with_vertices(std::vector<Vec2> vertices) const { return TriMesh(std::move(vertices), arc_, topo_); }

TriMesh TriMesh::with_vertices(std::vector<Vec2> vertices, std::vector<double> arc) const {
  return TriMesh(std::move(vertices), std::move(arc), topo_);
}

// ---------------------------------------------------------------------------
// Structured rectangles

std::pair<int, int> structured_cells(const Domain& domain, int target_N, QuadSplit split) {
  const Vec2 ext = domain.bbox_max() - domain.bbox_min();
  const double aspect = ext.x() / ext.y();
  const double per_cell = split == QuadSplit::Cross ? 4.0 : 2.0;
  const double cells = std::max(1.0, target_N / per_cell);
  std::pair<int, int> best{1, 1};
  double best_score = std::numeric_limits<double>::infinity();
  const int ny_max = static_cast<int>(std::ceil(std::sqrt(cells) * 4.0)) + 1;
  for (int ny = 1; ny <= ny_max; ++ny) {
    for (int nx : {static_cast<int>(std::floor(cells / ny)), static_cast<int>(std::ceil(cells / ny))}) {
      if (nx < 1) continue;
      // Count mismatch dominates; aspect mismatch breaks ties among near-exact counts.
      const double score = 100.0 * std::abs(per_cell * nx * ny - target_N) / target_N +
                           std::abs(std::log(static_cast<double>(nx) / ny / aspect));
      if (score < best_score) {
        best_score = score;
        best = {nx, ny};
      }
    }
  }
  return best;
}

TriMesh structured_rect_mesh(const Domain& domain, int nx, int ny, QuadSplit split) {
  if (!domain.is_axis_rectangle()) throw MeshGenError("structured meshes need an axis-aligned rectangle");
  if (nx < 1 || ny < 1) throw MeshGenError("structured mesh needs nx, ny >= 1");
  const Vec2 lo = domain.bbox_min(), hi = domain.bbox_max();
  const Curve& outer = domain.outer();
  std::vector<Vec2> v;
  std::vector<BoundaryMarker> m;
  auto grid = [&](int i, int j) { return j * (nx + 1) + i; };
  for (int j = 0; j <= ny; ++j) {
    for (int i = 0; i <= nx; ++i) {
      const Vec2 p(i == nx ? hi.x() : lo.x() + (hi.x() - lo.x()) * i / nx,
                   j == ny ? hi.y() : lo.y() + (hi.y() - lo.y()) * j / ny);
      v.push_back(p);
      BoundaryMarker bm;
      if (i == 0 || i == nx || j == 0 || j == ny) {
        bm.curve = 0;
        outer.closest_point(p, &bm.s);
        bm.corner = (i == 0 || i == nx) && (j == 0 || j == ny);
      }
      m.push_back(bm);
    }
  }
  std::vector<std::array<int, 3>> tris;
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const int a = grid(i, j), b = grid(i + 1, j), c = grid(i + 1, j + 1), d = grid(i, j + 1);
      if (split == QuadSplit::Diagonal) {
        tris.push_back({a, b, c});
        tris.push_back({a, c, d});
      } else {
        const int mid = static_cast<int>(v.size());
        v.push_back(0.25 * (v[a] + v[b] + v[c] + v[d]));
        m.push_back({});
        tris.push_back({a, b, mid});
        tris.push_back({b, c, mid});
        tris.push_back({c, d, mid});
        tris.push_back({d, a, mid});
      }
    }
  }
  return TriMesh::from_arrays(std::move(v), std::move(tris), std::move(m));
}

// ---------------------------------------------------------------------------
// Delaunay (Bowyer-Watson with walking point location)

std::vector<std::array<int, 3>> delaunay(const std::vector<Vec2>& points) {
  const int n = static_cast<int>(points.size());
  if (n < 3) return {};
  Vec2 lo = points[0], hi = points[0];
  for (const auto& p : points) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  const Vec2 c = 0.5 * (lo + hi);
  const double span = std::max((hi - lo).maxCoeff(), 1e-12);
  std::vector<Vec2> P = points;
  P.push_back(c + Vec2(-20.0 * span, -20.0 * span));
  P.push_back(c + Vec2(20.0 * span, -20.0 * span));
  P.push_back(c + Vec2(0.0, 20.0 * span));

  struct Tri {
    std::array<int, 3> v;
    std::array<int, 3> nb;
    bool alive;
  };
  std::vector<Tri> T;
  T.reserve(static_cast<std::size_t>(n) * 7 + 8);
  T.push_back({{n, n + 1, n + 2}, {-1, -1, -1}, true});

  auto in_circle = [&](const Tri& t, const Vec2& d) {
    const Vec2 a = P[t.v[0]] - d, b = P[t.v[1]] - d, cc = P[t.v[2]] - d;
    const double det = (a.squaredNorm()) * cross(b, cc) - (b.squaredNorm()) * cross(a, cc) +
                       (cc.squaredNorm()) * cross(a, b);
    return det > 0.0;
  };

  // Insert in bucket (snake) order for walking locality.
  const int nb = std::max(1, static_cast<int>(std::sqrt(n / 4.0)));
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  auto key = [&](int i) {
    const int bx = std::min(nb - 1, static_cast<int>((P[i].x() - lo.x()) / (hi.x() - lo.x() + 1e-300) * nb));
    const int by = std::min(nb - 1, static_cast<int>((P[i].y() - lo.y()) / (hi.y() - lo.y() + 1e-300) * nb));
    return std::make_pair(by, (by % 2) ? -bx : bx);
  };
  std::sort(order.begin(), order.end(), [&](int a, int b) { return key(a) < key(b); });

  std::vector<char> in_cavity;
  std::vector<int> cavity, stack;
  struct BEdge {
    int a, b, out, out_slot;
  };
  std::vector<BEdge> bedges;
  int last = 0;
  unsigned rot = 0;
  for (int pi : order) {
    const Vec2& p = P[pi];
    // Walk to the containing triangle.
    int t = last;
    if (!T[t].alive) t = static_cast<int>(T.size()) - 1;
    for (std::size_t steps = 0;; ++steps) {
      bool moved = false;
      ++rot;
      for (int r = 0; r < 3; ++r) {
        const int i = static_cast<int>((r + rot) % 3);
        const Tri& tr = T[t];
        if (orient(P[tr.v[(i + 1) % 3]], P[tr.v[(i + 2) % 3]], p) < 0.0 && tr.nb[i] >= 0) {
          t = tr.nb[i];
          moved = true;
          break;
        }
      }
      if (!moved) break;
      if (steps > T.size()) {
        // Degenerate walk: fall back to a linear scan.
        for (int k = 0; k < static_cast<int>(T.size()); ++k) {
          if (!T[k].alive) continue;
          const Tri& tr = T[k];
          if (orient(P[tr.v[0]], P[tr.v[1]], p) >= 0 && orient(P[tr.v[1]], P[tr.v[2]], p) >= 0 &&
              orient(P[tr.v[2]], P[tr.v[0]], p) >= 0) {
            t = k;
            break;
          }
        }
        break;
      }
    }
    // Grow the cavity of triangles whose circumcircle contains p.
    in_cavity.resize(T.size(), 0);
    cavity.assign(1, t);
    in_cavity[t] = 1;
    stack.assign(1, t);
    while (!stack.empty()) {
      const int k = stack.back();
      stack.pop_back();
      for (int i = 0; i < 3; ++i) {
        const int nbk = T[k].nb[i];
        if (nbk < 0 || in_cavity[nbk]) continue;
        if (in_circle(T[nbk], p)) {
          in_cavity[nbk] = 1;
          cavity.push_back(nbk);
          stack.push_back(nbk);
        }
      }
    }
    bedges.clear();
    for (int k : cavity) {
      for (int i = 0; i < 3; ++i) {
        const int o = T[k].nb[i];
        if (o >= 0 && in_cavity[o]) continue;
        int slot = -1;
        if (o >= 0)
          for (int j = 0; j < 3; ++j)
            if (T[o].nb[j] == k) slot = j;
        bedges.push_back({T[k].v[(i + 1) % 3], T[k].v[(i + 2) % 3], o, slot});
      }
    }
    for (int k : cavity) {
      T[k].alive = false;
      in_cavity[k] = 0;
    }
    const int first_new = static_cast<int>(T.size());
    for (const auto& e : bedges) {
      const int id = static_cast<int>(T.size());
      T.push_back({{e.a, e.b, pi}, {-1, -1, e.out}, true});
      if (e.out >= 0) T[e.out].nb[e.out_slot] = id;
    }
    const int count = static_cast<int>(bedges.size());
    for (int x = 0; x < count; ++x) {
      Tri& tx = T[first_new + x];
      for (int y = 0; y < count; ++y) {
        if (x == y) continue;
        const Tri& ty = T[first_new + y];
        if (ty.v[0] == tx.v[1]) tx.nb[0] = first_new + y;  // shares edge (b, p)
        if (ty.v[1] == tx.v[0]) tx.nb[1] = first_new + y;  // shares edge (p, a)
      }
    }
    last = static_cast<int>(T.size()) - 1;
  }
  std::vector<std::array<int, 3>> out;
  for (const auto& t : T) {
    if (!t.alive) continue;
    if (t.v[0] >= n || t.v[1] >= n || t.v[2] >= n) continue;
    out.push_back(t.v);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Unstructured meshes

namespace {

struct PointSet {
  std::vector<Vec2> pts;
  std::vector<BoundaryMarker> markers;
  int n_boundary = 0;
  std::vector<std::vector<int>> loops;  // boundary point indices per curve, in arc-length order
};

PointSet boundary_points(const Domain& domain, double h) {
  PointSet ps;
  for (int cid = 0; cid < static_cast<int>(domain.curves().size()); ++cid) {
    const Curve& c = domain.curve(cid);
    std::vector<int> loop;
    auto add = [&](double s, bool corner) {
      loop.push_back(static_cast<int>(ps.pts.size()));
      ps.pts.push_back(c.point_at(s));
      ps.markers.push_back({cid, c.wrap(s), corner});
    };
    if (c.kind() == CurveKind::Polygon) {
      const auto& S = c.polyline_s();
      for (std::size_t e = 0; e + 1 < S.size(); ++e) {
        const double len = S[e + 1] - S[e];
        const int m = std::max(1, static_cast<int>(std::ceil(len / h - 1e-9)));
        for (int j = 0; j < m; ++j) add(S[e] + len * j / m, j == 0);
      }
    } else {
      const int m = std::max(8, static_cast<int>(std::ceil(c.length() / h - 1e-9)));
      for (int j = 0; j < m; ++j) add(c.length() * j / m, false);
    }
    ps.loops.push_back(std::move(loop));
  }
  ps.n_boundary = static_cast<int>(ps.pts.size());
  // Curves closer than the spacing cannot be resolved.
  for (int i = 0; i < ps.n_boundary; ++i) {
    for (int cid = 0; cid < static_cast<int>(domain.curves().size()); ++cid) {
      if (cid == ps.markers[i].curve) continue;
      if (domain.curve(cid).distance(ps.pts[i]) < 0.75 * h)
        throw MeshGenError("boundary curves are closer than the requested mesh spacing");
    }
  }
  return ps;
}

std::vector<std::array<int, 3>> inside_triangles(const Domain& domain, const std::vector<Vec2>& pts, double h) {
  std::vector<std::array<int, 3>> out;
  for (const auto& t : delaunay(pts)) {
    const double a = orient(pts[t[0]], pts[t[1]], pts[t[2]]);
    if (std::abs(a) < 1e-10 * h * h) continue;
    if (!domain.contains((pts[t[0]] + pts[t[1]] + pts[t[2]]) / 3.0)) continue;
    out.push_back(t);
  }
  return out;
}

TriMesh unstructured_at_spacing(const Domain& domain, double h, const MeshOptions& opts) {
  PointSet ps = boundary_points(domain, h);
  const double margin = 0.55 * h;
  std::mt19937 rng(opts.seed);
  std::uniform_real_distribution<double> jitter(-1e-6 * h, 1e-6 * h);
  const Vec2 lo = domain.bbox_min(), hi = domain.bbox_max();
  const double dy = h * std::sqrt(3.0) / 2.0;
  for (int j = 0;; ++j) {
    const double y = lo.y() + (j + 0.5) * dy;
    if (y > hi.y()) break;
    for (int i = 0;; ++i) {
      const double x = lo.x() + (i + ((j % 2) ? 0.25 : 0.75)) * h;
      if (x > hi.x()) break;
      const Vec2 p(x + jitter(rng), y + jitter(rng));
      if (domain.signed_distance(p) >= margin) {
        ps.pts.push_back(p);
        ps.markers.push_back({});
      }
    }
  }
  // Laplacian smoothing of interior points on the current Delaunay triangulation.
  for (int round = 0; round < opts.smoothing_rounds; ++round) {
    const auto tris = inside_triangles(domain, ps.pts, h);
    std::vector<std::vector<int>> nbrs(ps.pts.size());
    for (const auto& t : tris)
      for (int i = 0; i < 3; ++i) {
        nbrs[t[i]].push_back(t[(i + 1) % 3]);
        nbrs[t[i]].push_back(t[(i + 2) % 3]);
      }
    for (int sweep = 0; sweep < 4; ++sweep) {
      for (std::size_t i = ps.n_boundary; i < ps.pts.size(); ++i) {
        if (nbrs[i].empty()) continue;
        Vec2 avg = Vec2::Zero();
        for (int j : nbrs[i]) avg += ps.pts[j];
        avg /= static_cast<double>(nbrs[i].size());
        if (domain.signed_distance(avg) >= margin) ps.pts[i] = avg;
      }
    }
  }
  auto tris = inside_triangles(domain, ps.pts, h);
  // Conformity: consecutive boundary points must be joined by a mesh edge.
  std::map<std::pair<int, int>, int> edge_count;
  for (const auto& t : tris)
    for (int i = 0; i < 3; ++i) ++edge_count[std::minmax(t[i], t[(i + 1) % 3])];
  for (const auto& loop : ps.loops) {
    for (std::size_t k = 0; k < loop.size(); ++k) {
      const auto e = std::minmax(loop[k], loop[(k + 1) % loop.size()]);
      auto it = edge_count.find(e);
      if (it == edge_count.end() || it->second != 1)
        throw MeshGenError("generated triangulation does not conform to the boundary");
    }
  }
  // Drop points not used by any triangle.
  std::vector<int> used(ps.pts.size(), -1);
  std::vector<Vec2> v;
  std::vector<BoundaryMarker> m;
  for (auto& t : tris)
    for (int& x : t) {
      if (used[x] < 0) {
        used[x] = static_cast<int>(v.size());
        v.push_back(ps.pts[x]);
        m.push_back(ps.markers[x]);
      }
      x = used[x];
    }
  for (int i = 0; i < ps.n_boundary; ++i)
    if (used[i] < 0) throw MeshGenError("boundary point left outside the triangulation");
  return TriMesh::from_arrays(std::move(v), std::move(tris), std::move(m));
}

}  // namespace

TriMesh generate_initial_mesh(const Domain& domain, int target_N, const MeshOptions& opts) {
  if (target_N < 2) throw MeshGenError("target_N must be at least 2");
  MeshMode mode = opts.mode;
  if (mode == MeshMode::Auto) mode = domain.is_axis_rectangle() ? MeshMode::Structured : MeshMode::Unstructured;
  if (mode == MeshMode::Structured) {
    auto [nx, ny] = structured_cells(domain, target_N, opts.split);
    if (opts.nx > 0) nx = opts.nx;
    if (opts.ny > 0) ny = opts.ny;
    return structured_rect_mesh(domain, nx, ny, opts.split);
  }
  if (target_N < 50) throw MeshGenError("unstructured meshes need target_N >= 50");
  double h = std::sqrt(4.0 * domain.area() / (std::sqrt(3.0) * target_N));
  TriMesh best;
  double best_err = std::numeric_limits<double>::infinity();
  for (int attempt = 0; attempt < 8; ++attempt) {
    TriMesh m = unstructured_at_spacing(domain, h, opts);
    const double ratio = static_cast<double>(m.num_triangles()) / target_N;
    if (std::abs(ratio - 1.0) < best_err) {
      best_err = std::abs(ratio - 1.0);
      best = m;
    }
    if (best_err <= 0.03) break;
    h *= std::sqrt(ratio);
  }
  if (best_err > 0.1) throw MeshGenError("could not reach the requested triangle count within 10%");
  return best;
}

// ---------------------------------------------------------------------------
// Element maps and point location

ElementPair element_pair(const Vec2& x0, const Vec2& x1, const Vec2& x2, const Vec2& xi0, const Vec2& xi1,
                         const Vec2& xi2) {
  ElementPair p;
  p.E.col(0) = x1 - x0;
  p.E.col(1) = x2 - x0;
  p.E_hat.col(0) = xi1 - xi0;
  p.E_hat.col(1) = xi2 - xi0;
  const double d = p.E.determinant(), dh = p.E_hat.determinant();
  if (d <= 1e-14 || dh <= 1e-14) throw DegenerateElement("element edge matrix is singular or inverted");
  p.area = 0.5 * d;
  p.area_c = 0.5 * dh;
  p.J = p.E_hat * p.E.inverse();
  return p;
}

ElementPair element_pair(const TriMesh& phys, const TriMesh& comp, int k) {
  if (phys.num_triangles() != comp.num_triangles()) throw DegenerateElement("meshes do not share connectivity");
  const auto& t = phys.triangle(k);
  if (t != comp.triangle(k)) throw DegenerateElement("meshes do not share connectivity");
  return element_pair(phys.vertex(t[0]), phys.vertex(t[1]), phys.vertex(t[2]), comp.vertex(t[0]),
                      comp.vertex(t[1]), comp.vertex(t[2]));
}

Eigen::Vector3d barycentric(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& x) {
  const double area = orient(a, b, c);
  Eigen::Vector3d l;
  l[0] = orient(x, b, c) / area;
  l[1] = orient(a, x, c) / area;
  l[2] = 1.0 - l[0] - l[1];
  return l;
}

PointLocator::PointLocator(const TriMesh& mesh) : mesh_(mesh) {}

int PointLocator::locate(const Vec2& x, Eigen::Vector3d* bary, double tol) {
  const auto& nb = mesh_.topology().triangle_neighbors;
  const int nt = mesh_.num_triangles();
  if (nt == 0) return -1;
  int k = (last_ >= 0 && last_ < nt) ? last_ : 0;
  for (int steps = 0; steps < nt; ++steps) {
    const auto& t = mesh_.triangle(k);
    const Eigen::Vector3d l = barycentric(mesh_.vertex(t[0]), mesh_.vertex(t[1]), mesh_.vertex(t[2]), x);
    int worst = 0;
    l.minCoeff(&worst);
    if (l[worst] >= -tol) {
      last_ = k;
      if (bary) *bary = l;
      return k;
    }
    if (nb[k][worst] < 0) break;
    k = nb[k][worst];
  }
  for (k = 0; k < nt; ++k) {
    const auto& t = mesh_.triangle(k);
    const Eigen::Vector3d l = barycentric(mesh_.vertex(t[0]), mesh_.vertex(t[1]), mesh_.vertex(t[2]), x);
    if (l.minCoeff() >= -tol) {
      last_ = k;
      if (bary) *bary = l;
      return k;
    }
  }
  return -1;
}

int PointLocator::locate_nearest(const Vec2& x, Eigen::Vector3d* bary) {
  int best = -1;
  double best_d = std::numeric_limits<double>::infinity();
  for (int k = 0; k < mesh_.num_triangles(); ++k) {
    const auto& t = mesh_.triangle(k);
    const Vec2 &a = mesh_.vertex(t[0]), &b = mesh_.vertex(t[1]), &c = mesh_.vertex(t[2]);
    const Eigen::Vector3d l = barycentric(a, b, c, x);
    const double d = l.minCoeff() >= 0.0 ? 0.0
                                          : std::min({point_segment_distance(x, a, b), point_segment_distance(x, b, c),
                                                      point_segment_distance(x, c, a)});
    if (d < best_d) {
      best_d = d;
      best = k;
      if (bary) *bary = l;
    }
  }
  return best;
}

double interpolate_linear(PointLocator& loc, const TriMesh& mesh, const Eigen::VectorXd& nodal, const Vec2& x) {
  if (nodal.size() != mesh.num_vertices()) throw DomainError("interpolate_linear: nodal vector size mismatch");
  Eigen::Vector3d l;
  const int k = loc.locate(x, &l, 1e-10);
  if (k < 0) throw OutsideMesh("point lies outside the mesh");
  const auto& t = mesh.triangle(k);
  return l[0] * nodal[t[0]] + l[1] * nodal[t[1]] + l[2] * nodal[t[2]];
}

double interpolate_linear(const TriMesh& mesh, const Eigen::VectorXd& nodal, const Vec2& x) {
  PointLocator loc(mesh);
  return interpolate_linear(loc, mesh, nodal, x);
}

// ---------------------------------------------------------------------------
// VTK output

void write_vtk(std::ostream& out, const TriMesh& mesh,
               const std::vector<std::pair<std::string, const Eigen::VectorXd*>>& point_data,
               const std::string& title) {
  out << "# vtk DataFile Version 3.0\n" << title << "\nASCII\nDATASET UNSTRUCTURED_GRID\n";
  out << std::setprecision(12);
  out << "POINTS " << mesh.num_vertices() << " double\n";
  for (const auto& p : mesh.vertices()) out << p.x() << ' ' << p.y() << " 0\n";
  const int nt = mesh.num_triangles();
  out << "CELLS " << nt << ' ' << 4 * nt << '\n';
  for (const auto& t : mesh.triangles()) out << "3 " << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
  out << "CELL_TYPES " << nt << '\n';
  for (int k = 0; k < nt; ++k) out << "5\n";
  if (point_data.empty()) return;
  out << "POINT_DATA " << mesh.num_vertices() << '\n';
  for (const auto& [name, data] : point_data) {
    if (!data || data->size() != mesh.num_vertices()) throw DomainError("write_vtk: point data size mismatch");
    out << "SCALARS " << name << " double 1\nLOOKUP_TABLE default\n";
    for (int i = 0; i < data->size(); ++i) out << (*data)[i] << '\n';
  }
}

void write_vtk(const std::string& path, const TriMesh& mesh,
               const std::vector<std::pair<std::string, const Eigen::VectorXd*>>& point_data,
               const std::string& title) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path);
  write_vtk(out, mesh, point_data, title);
}

}  // namespace mems
