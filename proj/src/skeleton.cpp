#include "mems/skeleton.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <map>
#include <ostream>
#include <utility>

namespace mems {

namespace {

// Background grid centred on the bounding box, so that a symmetric domain gets a symmetric grid.
struct Grid {
  Vec2 centre;
  double h = 0.0;
  int mx = 0, my = 0;  // indices run over [-mx, mx] x [-my, my]
  int nx() const { return 2 * mx + 1; }
  int ny() const { return 2 * my + 1; }
  int index(int i, int j) const { return j * nx() + i; }
  Vec2 point(int i, int j) const { return centre + h * Vec2(i - mx, j - my); }
};

Grid make_grid(const Domain& domain, double h) {
  Grid g;
  g.h = h;
  g.centre = 0.5 * (domain.bbox_min() + domain.bbox_max());
  const Vec2 half = 0.5 * (domain.bbox_max() - domain.bbox_min());
  g.mx = static_cast<int>(std::ceil(half.x() / h - 1e-9)) + 1;
  g.my = static_cast<int>(std::ceil(half.y() / h - 1e-9)) + 1;
  return g;
}

double cluster_tolerance(double d, double h) { return std::min(1.5 * h, 0.3 * d); }

struct RidgeInfo {
  bool ridge = false;
  bool ring = false;
  int n = 0;
  double mean_kappa = 0.0;
};

// Near the tip of a branch ending inside a smooth lobe both feet lie in one run of the
// distance threshold. Separate local minima of the distance along the polyline recover them.
void smooth_ridge(const Domain& domain, const Vec2& x, double thr, double prune_cos, RidgeInfo* r) {
  struct Foot {
    Vec2 dir;
    double kappa;
  };
  std::vector<Foot> feet;
  for (const Curve& c : domain.curves()) {
    if (c.kind() != CurveKind::Polar) continue;
    const auto& P = c.polyline();
    const auto& S = c.polyline_s();
    const int nseg = static_cast<int>(P.size()) - 1;
    std::vector<double> dist(nseg), tm(nseg);
    for (int i = 0; i < nseg; ++i) {
      const Vec2 e = P[i + 1] - P[i];
      tm[i] = std::clamp((x - P[i]).dot(e) / e.squaredNorm(), 0.0, 1.0);
      dist[i] = (P[i] + tm[i] * e - x).norm();
    }
    for (int i = 0; i < nseg; ++i) {
      const double prev = dist[(i + nseg - 1) % nseg], next = dist[(i + 1) % nseg];
      if (dist[i] > thr || dist[i] > prev || dist[i] >= next) continue;
      const Vec2 foot = P[i] + tm[i] * (P[i + 1] - P[i]);
      feet.push_back({(foot - x).normalized(), c.curvature_at(S[i] + tm[i] * (S[i + 1] - S[i]))});
    }
  }
  for (size_t a = 0; a < feet.size(); ++a)
    for (size_t b = a + 1; b < feet.size(); ++b)
      if (feet[a].dir.dot(feet[b].dir) <= prune_cos) {
        r->ridge = true;
        r->n = static_cast<int>(feet.size());
        r->mean_kappa = 0.0;
        for (const auto& f : feet) r->mean_kappa += f.kappa;
        r->mean_kappa /= r->n;
        return;
      }
}

RidgeInfo ridge_info(const Domain& domain, const Vec2& x, double d, double h, double prune_cos) {
  RidgeInfo r;
  const ClosestPoints cp = domain.closest_boundary_points(x, cluster_tolerance(d, h) / d);
  r.n = static_cast<int>(cp.points.size());
  r.ring = cp.degenerate;
  for (const auto& p : cp.points) r.mean_kappa += p.curvature;
  if (r.n > 0) r.mean_kappa /= r.n;
  if (cp.degenerate) {
    r.ridge = true;
    return r;
  }
  for (int a = 0; a < r.n && !r.ridge; ++a)
    for (int b = a + 1; b < r.n; ++b) {
      const Vec2 da = (cp.points[a].location - x).normalized();
      const Vec2 db = (cp.points[b].location - x).normalized();
      if (da.dot(db) <= prune_cos) {
        r.ridge = true;
        break;
      }
    }
  if (!r.ridge) smooth_ridge(domain, x, d + cluster_tolerance(d, h), prune_cos, &r);
  return r;
}

// Zhang-Suen thinning of a binary image; foreground is 1.
void thin(std::vector<char>& img, int nx, int ny) {
  auto at = [&](int i, int j) -> int {
    if (i < 0 || j < 0 || i >= nx || j >= ny) return 0;
    return img[j * nx + i];
  };
  bool changed = true;
  std::vector<int> del;
  while (changed) {
    changed = false;
    for (int pass = 0; pass < 2; ++pass) {
      del.clear();
      for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i) {
          if (!img[j * nx + i]) continue;
          // p2..p9 clockwise from north
          const int p[8] = {at(i, j + 1), at(i + 1, j + 1), at(i + 1, j),     at(i + 1, j - 1),
                            at(i, j - 1), at(i - 1, j - 1), at(i - 1, j), at(i - 1, j + 1)};
          int b = 0, a = 0;
          for (int k = 0; k < 8; ++k) {
            b += p[k];
            if (!p[k] && p[(k + 1) % 8]) ++a;
          }
          if (b < 2 || b > 6 || a != 1) continue;
          if (pass == 0) {
            if (p[0] * p[2] * p[4] != 0 || p[2] * p[4] * p[6] != 0) continue;
          } else {
            if (p[0] * p[2] * p[6] != 0 || p[0] * p[4] * p[6] != 0) continue;
          }
          del.push_back(j * nx + i);
        }
      for (int k : del) img[k] = 0;
      if (!del.empty()) changed = true;
    }
  }
}

// m-adjacency: a diagonal neighbour only counts when no shared 4-neighbour is set.
std::vector<std::vector<int>> pixel_graph(const std::vector<char>& img, int nx, int ny) {
  std::vector<std::vector<int>> adj(img.size());
  auto on = [&](int i, int j) { return i >= 0 && j >= 0 && i < nx && j < ny && img[j * nx + i]; };
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      if (!on(i, j)) continue;
      for (int dj = -1; dj <= 1; ++dj)
        for (int di = -1; di <= 1; ++di) {
          if ((di == 0 && dj == 0) || !on(i + di, j + dj)) continue;
          if (di != 0 && dj != 0 && (on(i + di, j) || on(i, j + dj))) continue;
          adj[j * nx + i].push_back((j + dj) * nx + i + di);
        }
    }
  return adj;
}

// Splits the pixel graph into chains between nodes of degree != 2; loops are traced whole.
std::vector<std::vector<int>> trace_chains(const std::vector<std::vector<int>>& adj, const std::vector<char>& img) {
  std::vector<std::vector<int>> chains;
  std::map<std::pair<int, int>, bool> used;
  auto edge = [](int a, int b) { return std::make_pair(std::min(a, b), std::max(a, b)); };
  auto walk = [&](int start, int next) {
    std::vector<int> chain{start};
    int prev = start, cur = next;
    used[edge(prev, cur)] = true;
    while (true) {
      chain.push_back(cur);
      if (adj[cur].size() != 2 || cur == start) break;
      const int nxt = adj[cur][0] == prev ? adj[cur][1] : adj[cur][0];
      if (used[edge(cur, nxt)]) break;
      used[edge(cur, nxt)] = true;
      prev = cur;
      cur = nxt;
    }
    return chain;
  };
  const int n = static_cast<int>(img.size());
  for (int v = 0; v < n; ++v) {
    if (!img[v] || adj[v].size() == 2) continue;
    if (adj[v].empty()) {
      chains.push_back({v});
      continue;
    }
    for (int w : adj[v])
      if (!used[edge(v, w)]) chains.push_back(walk(v, w));
  }
  for (int v = 0; v < n; ++v) {
    if (!img[v] || adj[v].size() != 2) continue;
    if (!used[edge(v, adj[v][0])]) chains.push_back(walk(v, adj[v][0]));
  }
  return chains;
}

bool has_convex_corner(const Domain& domain) {
  for (const Curve& c : domain.curves()) {
    if (c.kind() != CurveKind::Polygon) continue;
    const auto& P = c.polyline();
    const auto& S = c.polyline_s();
    const int n = static_cast<int>(P.size()) - 1;
    for (int k = 0; k < n; ++k) {
      if (!c.is_corner(S[k], 1e-9)) continue;
      const Vec2 a = P[k] - P[(k + n - 1) % n];
      const Vec2 b = P[k + 1] - P[k];
      if (cross(a, b) > 0.0) return true;
    }
  }
  return false;
}

void check_resolution(const Domain& domain, double h) {
  if (!(h > 0.0)) throw ResolutionError("grid spacing must be positive");
  const Vec2 ext = domain.bbox_max() - domain.bbox_min();
  if (h * 8.0 > std::min(ext.x(), ext.y())) throw ResolutionError("grid spacing too coarse for the domain");
  const auto& curves = domain.curves();
  for (size_t a = 1; a < curves.size(); ++a) {
    // Gap between hole a and every other curve, measured from the hole's samples.
    double gap = std::numeric_limits<double>::infinity();
    for (const auto& s : curves[a].samples())
      for (size_t b = 0; b < curves.size(); ++b)
        if (b != a) gap = std::min(gap, curves[b].distance(s.point));
    if (gap < 2.0 * h)
      throw ResolutionError("grid spacing " + std::to_string(h) + " cannot separate hole " + std::to_string(a) +
                            " from the rest of the boundary (gap " + std::to_string(gap) + ")");
  }
}

}  // namespace

int SkeletonSet::num_vertices() const {
  int n = 0;
  for (const auto& b : branches) n += static_cast<int>(b.points.size());
  return n;
}

std::vector<Vec2> SkeletonSet::vertices() const {
  std::vector<Vec2> v;
  for (const auto& b : branches) v.insert(v.end(), b.points.begin(), b.points.end());
  return v;
}

double SkeletonSet::min_distance() const {
  if (meets_boundary) return 0.0;
  double m = std::numeric_limits<double>::infinity();
  for (const auto& b : branches)
    for (double d : b.distance) m = std::min(m, d);
  return m;
}

double SkeletonSet::max_distance() const {
  double m = 0.0;
  for (const auto& b : branches)
    for (double d : b.distance) m = std::max(m, d);
  return m;
}

SkeletonSet compute_skeleton(const Domain& domain, double grid_h, const SkeletonOptions& opts) {
  check_resolution(domain, grid_h);
  const Grid g = make_grid(domain, grid_h);
  const int nx = g.nx(), ny = g.ny();
  const double prune_cos = std::cos(opts.prune_angle_deg * kPi / 180.0);
  std::vector<char> img(static_cast<size_t>(nx) * ny, 0);
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      const Vec2 x = g.point(i, j);
      const double d = domain.signed_distance(x);
      if (d <= 0.25 * grid_h) continue;
      if (ridge_info(domain, x, d, grid_h, prune_cos).ridge) img[g.index(i, j)] = 1;
    }
  thin(img, nx, ny);
  const auto adj = pixel_graph(img, nx, ny);
  const auto chains = trace_chains(adj, img);

  SkeletonSet sk;
  sk.grid_h = grid_h;
  sk.meets_boundary = has_convex_corner(domain);
  std::map<int, RidgeInfo> info;
  for (const auto& chain : chains) {
    SkeletonBranch br;
    for (int v : chain) {
      const Vec2 x = g.point(v % nx, v / nx);
      const double d = domain.boundary_distance(x);
      auto it = info.find(v);
      if (it == info.end()) it = info.emplace(v, ridge_info(domain, x, d, grid_h, prune_cos)).first;
      br.points.push_back(x);
      br.distance.push_back(d);
      br.contributors.push_back(it->second.n);
      br.mean_curvature.push_back(it->second.mean_kappa);
      br.ring.push_back(it->second.ring);
    }
    sk.branches.push_back(std::move(br));
  }
  if (sk.branches.empty()) throw ResolutionError("no skeleton points resolved at grid spacing " + std::to_string(grid_h));
  return sk;
}

std::vector<std::vector<Vec2>> firefront(const Domain& domain, double dist, double grid_h) {
  if (!(dist > 0.0)) throw EmptyResult("firefront distance must be positive");
  if (!(grid_h > 0.0)) throw ResolutionError("grid spacing must be positive");
  const Grid g = make_grid(domain, grid_h);
  const int nx = g.nx(), ny = g.ny();
  std::vector<double> f(static_cast<size_t>(nx) * ny);
  double fmax = -std::numeric_limits<double>::infinity();
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      f[g.index(i, j)] = domain.signed_distance(g.point(i, j)) - dist;
      fmax = std::max(fmax, f[g.index(i, j)]);
    }
  if (fmax < 0.0) throw EmptyResult("distance " + std::to_string(dist) + " exceeds the inradius");

  // Edge ids: 2 * node for the edge to (i+1, j), 2 * node + 1 for the edge to (i, j+1).
  auto crossing = [&](int a, int b) {
    const double fa = f[a], fb = f[b];
    const double s = fa / (fa - fb);
    const Vec2 pa = g.point(a % nx, a / nx), pb = g.point(b % nx, b / nx);
    return Vec2(pa + s * (pb - pa));
  };
  std::map<int, Vec2> pos;
  std::map<int, std::vector<int>> links;
  auto add = [&](int e0, int e1) {
    links[e0].push_back(e1);
    links[e1].push_back(e0);
  };
  for (int j = 0; j + 1 < ny; ++j)
    for (int i = 0; i + 1 < nx; ++i) {
      const int v[4] = {g.index(i, j), g.index(i + 1, j), g.index(i + 1, j + 1), g.index(i, j + 1)};
      const int e[4] = {2 * v[0], 2 * v[1] + 1, 2 * v[3], 2 * v[0] + 1};  // bottom, right, top, left
      int code = 0;
      for (int k = 0; k < 4; ++k)
        if (f[v[k]] >= 0.0) code |= 1 << k;
      if (code == 0 || code == 15) continue;
      std::vector<int> cut;
      for (int k = 0; k < 4; ++k) {
        const int a = v[k], b = v[(k + 1) % 4];
        if ((f[a] >= 0.0) != (f[b] >= 0.0)) {
          cut.push_back(e[k]);
          if (!pos.count(e[k])) pos[e[k]] = crossing(a, b);
        }
      }
      if (cut.size() == 2) {
        add(cut[0], cut[1]);
      } else if (cut.size() == 4) {
        // Saddle: decide by the cell-centre average.
        const double c = 0.25 * (f[v[0]] + f[v[1]] + f[v[2]] + f[v[3]]);
        const bool centre_in = c >= 0.0;
        const bool v0_in = f[v[0]] >= 0.0;
        if (centre_in == v0_in) {
          add(cut[0], cut[1]);
          add(cut[2], cut[3]);
        } else {
          add(cut[0], cut[3]);
          add(cut[1], cut[2]);
        }
      }
    }

  std::vector<std::vector<Vec2>> lines;
  std::map<int, bool> done;
  auto follow = [&](int start) {
    std::vector<int> ids{start};
    done[start] = true;
    int prev = -1, cur = start;
    while (true) {
      int nxt = -1;
      for (int w : links[cur])
        if (w != prev && !done[w]) {
          nxt = w;
          break;
        }
      if (nxt < 0) {
        // Close the loop when the chain returns to its start.
        for (int w : links[cur])
          if (w == start && ids.size() > 2) ids.push_back(start);
        break;
      }
      done[nxt] = true;
      ids.push_back(nxt);
      prev = cur;
      cur = nxt;
    }
    std::vector<Vec2> line;
    for (int id : ids) line.push_back(pos[id]);
    return line;
  };
  for (const auto& [id, l] : links)
    if (l.size() == 1 && !done[id]) lines.push_back(follow(id));
  for (const auto& [id, l] : links)
    if (!done[id]) lines.push_back(follow(id));
  return lines;
}

double arrival_time(const SkeletonSet& skeleton, double eps, double z0) {
  if (!(eps > 0.0)) throw DomainError("arrival_time: eps must be positive");
  const double dmin = skeleton.min_distance();
  if (dmin <= 0.0) return 0.0;
  const double t_end = std::nextafter(kQuenchTime, 0.0);
  auto reach = [&](double t) { return z0 * phi(t, eps); };
  if (z0 * std::sqrt(eps) < dmin) throw NoArrival("the firefront never reaches the skeleton before quench");
  if (reach(0.0) >= dmin) return 0.0;
  double lo = 0.0, hi = t_end;
  if (reach(hi) < dmin) hi = kQuenchTime;
  for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
    const double mid = 0.5 * (lo + hi);
    (reach(mid) >= dmin ? hi : lo) = mid;
  }
  return hi;
}

double distance_to_skeleton(const SkeletonSet& skeleton, const Vec2& x) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& b : skeleton.branches)
    for (const auto& p : b.points) best = std::min(best, (p - x).norm());
  return best;
}

namespace {

struct Candidate {
  Vec2 point;
  double distance;
  double kappa;
  int n;
  bool ring;
};

PredictedPoint score_candidate(const Candidate& c, double t, double eps, const ProfileConstants& pc) {
  PredictedPoint p;
  p.point = c.point;
  p.distance = c.distance;
  p.mean_curvature = c.kappa;
  p.contributors = c.n;
  p.ring = c.ring;
  p.score = predicted_min_value(std::vector<double>(std::max(c.n, 1), c.kappa), t, eps, pc);
  return p;
}

void rank(std::vector<PredictedPoint>& pts) {
  std::sort(pts.begin(), pts.end(), [](const PredictedPoint& a, const PredictedPoint& b) {
    if (std::abs(a.score - b.score) > 1e-12) return a.score < b.score;
    if (a.point.x() != b.point.x()) return a.point.x() < b.point.x();
    return a.point.y() < b.point.y();
  });
}

std::vector<Candidate> dedupe(const std::vector<Candidate>& in, double radius) {
  std::vector<Candidate> out;
  for (const auto& c : in) {
    bool dup = false;
    for (const auto& o : out)
      if ((o.point - c.point).norm() <= radius) dup = true;
    if (!dup) out.push_back(c);
  }
  return out;
}

}  // namespace

TouchdownPrediction predict_touchdown(const Domain& domain, const SkeletonSet& sk, double eps,
                                      const ProfileConstants& pc, const PredictOptions& opts) {
  if (!(eps > 0.0)) throw DomainError("predict_touchdown: eps must be positive");
  TouchdownPrediction pred;
  pred.t_estimate = opts.t_estimate;
  const double T = std::min(opts.t_estimate, std::nextafter(kQuenchTime, 0.0));
  pred.target_distance = pc.z0 * phi(T, eps);
  const double h = sk.grid_h;
  try {
    pred.t_s = arrival_time(sk, eps, pc.z0);
  } catch (const NoArrival&) {
    pred.t_s = std::numeric_limits<double>::infinity();
  }
  pred.regime = opts.t_estimate < pred.t_s ? Regime::PreSkeleton : Regime::OnSkeleton;
  const double prune_cos = std::cos(25.0 * kPi / 180.0);

  if (pred.regime == Regime::OnSkeleton) {
    std::vector<Candidate> cands;
    const double dstar = pred.target_distance;
    if (dstar <= sk.max_distance()) {
      // Crossings of the level d = d* along every branch.
      for (const auto& b : sk.branches) {
        const size_t n = b.points.size();
        for (size_t k = 0; k < n; ++k) {
          const double fk = b.distance[k] - dstar;
          if (std::abs(fk) <= 1e-14) {
            cands.push_back({b.points[k], b.distance[k], b.mean_curvature[k], b.contributors[k], b.ring[k]});
            continue;
          }
          if (k + 1 >= n) continue;
          const double fn = b.distance[k + 1] - dstar;
          if (fk * fn >= 0.0) continue;
          const double s = fk / (fk - fn);
          const Vec2 x = b.points[k] + s * (b.points[k + 1] - b.points[k]);
          const double d = domain.boundary_distance(x);
          const RidgeInfo ri = ridge_info(domain, x, d, h, prune_cos);
          cands.push_back({x, d, ri.mean_kappa, ri.n, ri.ring});
        }
      }
    }
    if (cands.empty()) {
      // The firefront has swept the whole skeleton: it collapses on the set of maximal distance.
      // One candidate per connected piece of that set, at its centroid snapped to the skeleton.
      const double dmax = sk.max_distance();
      std::vector<Vec2> top;
      for (const auto& b : sk.branches)
        for (size_t k = 0; k < b.points.size(); ++k)
          if (b.distance[k] >= dmax - 0.5 * h) top.push_back(b.points[k]);
      std::vector<int> comp(top.size(), -1);
      int ncomp = 0;
      for (size_t a = 0; a < top.size(); ++a) {
        if (comp[a] >= 0) continue;
        std::vector<size_t> stack{a};
        comp[a] = ncomp;
        while (!stack.empty()) {
          const size_t u = stack.back();
          stack.pop_back();
          for (size_t v = 0; v < top.size(); ++v)
            if (comp[v] < 0 && (top[u] - top[v]).norm() <= 2.0 * h) {
              comp[v] = ncomp;
              stack.push_back(v);
            }
        }
        ++ncomp;
      }
      const auto all = sk.vertices();
      for (int c = 0; c < ncomp; ++c) {
        Vec2 m = Vec2::Zero();
        int cnt = 0;
        for (size_t a = 0; a < top.size(); ++a)
          if (comp[a] == c) {
            m += top[a];
            ++cnt;
          }
        m /= cnt;
        Vec2 best = all.front();
        for (const auto& p : all)
          if ((p - m).norm() < (best - m).norm()) best = p;
        const double d = domain.boundary_distance(best);
        const RidgeInfo ri = ridge_info(domain, best, d, h, prune_cos);
        cands.push_back({best, d, ri.mean_kappa, ri.n, ri.ring});
      }
    }
    for (const auto& c : dedupe(cands, 2.0 * h)) {
      pred.points.push_back(score_candidate(c, T, eps, pc));
      if (c.ring) pred.ring = true;
    }
  } else {
    // Firefront points over the boundary-curvature maxima.
    const double dstar = pred.target_distance;
    double kmax = -std::numeric_limits<double>::infinity(), kmin = std::numeric_limits<double>::infinity();
    for (const Curve& c : domain.curves())
      for (const auto& s : c.samples())
        if (std::isfinite(s.curvature)) {
          kmax = std::max(kmax, s.curvature);
          kmin = std::min(kmin, s.curvature);
        }
    std::vector<Candidate> cands;
    if (kmax - kmin <= 1e-9 * std::max(1.0, std::abs(kmax))) {
      // Constant curvature: every point of the firefront is equivalent.
      pred.ring = true;
      const Curve& c = domain.outer();
      const CurveSample& s = c.samples().front();
      cands.push_back({s.point + dstar * s.inward_normal, dstar, s.curvature, 1, true});
    } else {
      for (const Curve& c : domain.curves()) {
        const auto& S = c.samples();
        const int n = static_cast<int>(S.size()) - 1;  // closed table
        for (int k = 0; k < n; ++k) {
          const double kp = S[(k + n - 1) % n].curvature, kk = S[k].curvature, kn = S[(k + 1) % n].curvature;
          if (!std::isfinite(kk) || kk < kp || kk <= kn) continue;
          const Vec2 x = S[k].point + dstar * S[k].inward_normal;
          if (domain.signed_distance(x) <= 0.0) continue;
          cands.push_back({x, dstar, kk, 1, false});
        }
      }
    }
    for (const auto& c : dedupe(cands, 2.0 * h)) pred.points.push_back(score_candidate(c, T, eps, pc));
  }
  rank(pred.points);
  return pred;
}

TouchdownPrediction predict_touchdown(const Domain& domain, double eps, const ProfileConstants& constants,
                                      const PredictOptions& opts) {
  return predict_touchdown(domain, compute_skeleton(domain, opts.grid_h), eps, constants, opts);
}

void write_skeleton_csv(std::ostream& out, const SkeletonSet& sk) {
  out << "# mems-skeleton v1\n";
  out << "branch,x,y,d,N,mean_kappa\n";
  out << std::setprecision(10);
  for (size_t b = 0; b < sk.branches.size(); ++b) {
    const auto& br = sk.branches[b];
    for (size_t k = 0; k < br.points.size(); ++k)
      out << b << ',' << br.points[k].x() << ',' << br.points[k].y() << ',' << br.distance[k] << ','
          << br.contributors[k] << ',' << br.mean_curvature[k] << '\n';
  }
}

void write_polylines_csv(std::ostream& out, const std::vector<std::vector<Vec2>>& lines, const Domain& domain) {
  out << "# mems-polyline v1\n";
  out << "branch,x,y,d\n";
  out << std::setprecision(10);
  for (size_t b = 0; b < lines.size(); ++b)
    for (const auto& p : lines[b]) out << b << ',' << p.x() << ',' << p.y() << ',' << domain.boundary_distance(p) << '\n';
}

void write_prediction_report(std::ostream& out, const TouchdownPrediction& p, double eps) {
  out << "# mems-prediction v1\n";
  out << std::setprecision(8);
  out << "eps " << eps << '\n';
  out << "regime " << (p.regime == Regime::OnSkeleton ? "on-skeleton" : "pre-skeleton") << '\n';
  out << "t_s " << p.t_s << '\n';
  out << "t_estimate " << p.t_estimate << '\n';
  out << "target_distance " << p.target_distance << '\n';
  out << "ring " << (p.ring ? 1 : 0) << '\n';
  out << "candidates " << p.points.size() << '\n';
  out << "# rank x y d N mean_kappa score\n";
  for (size_t k = 0; k < p.points.size(); ++k) {
    const auto& c = p.points[k];
    out << k + 1 << ' ' << c.point.x() << ' ' << c.point.y() << ' ' << c.distance << ' ' << c.contributors << ' '
        << c.mean_curvature << ' ' << c.score << '\n';
  }
}

}  // namespace mems
