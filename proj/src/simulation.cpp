#include "mems/simulation.hpp"

#include "mems/fem.hpp"
#include "mems/radau.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <iomanip>
#include <limits>
#include <ostream>
#include <set>

namespace mems {

namespace {

// [[A, B], [C, D]] for square n x n blocks (empty blocks allowed).
SpMat block2(int n, const SpMat* A, const SpMat* B, const SpMat* C, const SpMat* D) {
  std::vector<Eigen::Triplet<double>> trip;
  auto add = [&](const SpMat* S, int r0, int c0, double scale) {
    if (!S) return;
    for (int k = 0; k < S->outerSize(); ++k)
      for (SpMat::InnerIterator it(*S, k); it; ++it) trip.emplace_back(r0 + it.row(), c0 + it.col(), scale * it.value());
  };
  add(A, 0, 0, 1.0);
  add(B, 0, n, 1.0);
  add(C, n, 0, 1.0);
  add(D, n, n, 1.0);
  SpMat out(2 * n, 2 * n);
  out.setFromTriplets(trip.begin(), trip.end());
  return out;
}

// The mixed DAE  M U' = eps^2 B V + F(U),  0 = M V + B U  on the mesh path a -> b over [t0, t0 + dt].
class SlabSystem : public DaeSystem {
 public:
  SlabSystem(const TriMesh& a, const TriMesh& b, double t0, double dt, double eps, double floor)
      : a_(a), b_(b), t0_(t0), dt_(dt), eps2_(eps * eps), n_(a.num_interior()), xdot_(mesh_velocity(a, b, dt)) {
    opts_.quench_floor = floor;
    bool still = true;
    for (const auto& v : xdot_) still = still && v.squaredNorm() == 0.0;
    if (still) xdot_.clear();
  }

  int size() const override { return 2 * n_; }

  // V = Delta_h U is algebraic; its error is the discrete Laplacian of the U error and is
  // left out of the step-size test.
  Eigen::VectorXd error_mask() const override {
    Eigen::VectorXd m = Eigen::VectorXd::Zero(2 * n_);
    m.head(n_).setOnes();
    return m;
  }

  SpMat mass(double t) override { return entry(t).Mblock; }

  bool rhs(double t, const Eigen::VectorXd& y, Eigen::VectorXd* f) override {
    const Entry& e = entry(t);
    const Eigen::VectorXd U = y.head(n_), V = y.tail(n_);
    Eigen::VectorXd F;
    try {
      F = assemble_load(e.mesh, U, xdot_, opts_);
    } catch (const QuenchReached&) {
      return false;
    }
    f->resize(2 * n_);
    f->head(n_) = eps2_ * (e.B * V) + F;
    f->tail(n_) = e.M * V + e.B * U;
    return f->allFinite();
  }

  SpMat jacobian(double t, const Eigen::VectorXd& y) override {
    const Entry& e = entry(t);
    const SpMat dF = assemble_load_jacobian(e.mesh, y.head(n_), xdot_);
    const SpMat eB = eps2_ * e.B;
    return block2(n_, &dF, &eB, &e.B, &e.M);
  }

 private:
  struct Entry {
    double t;
    TriMesh mesh;
    SpMat M, B, Mblock;
  };

  const Entry& entry(double t) {
    for (const auto& e : cache_)
      if (e.t == t) return e;
    const double theta = std::clamp((t - t0_) / dt_, 0.0, 1.0);
    Entry e{t, interpolate_mesh(a_, b_, theta), {}, {}, {}};
    e.M = assemble_mass(e.mesh);
    e.B = assemble_stiffness(e.mesh);
    e.Mblock = block2(n_, &e.M, nullptr, nullptr, nullptr);
    if (cache_.size() >= 6) cache_.pop_front();
    cache_.push_back(std::move(e));
    return cache_.back();
  }

  const TriMesh& a_;
  const TriMesh& b_;
  double t0_, dt_, eps2_;
  int n_;
  std::vector<Vec2> xdot_;
  LoadOptions opts_;
  std::deque<Entry> cache_;
};

double wrap_diff(double d, double L) {
  d = std::fmod(d, L);
  if (d > 0.5 * L) d -= L;
  if (d <= -0.5 * L) d += L;
  return d;
}

// Point theta along a -> b with sliding boundary vertices kept on their curves.
TriMesh truncate_path(const Domain& domain, const TriMesh& a, const TriMesh& b, double theta) {
  std::vector<Vec2> x(a.num_vertices());
  std::vector<double> arc = a.arc_lengths();
  for (int i = 0; i < a.num_vertices(); ++i) {
    const auto& m = a.marker(i);
    if (!m.on_boundary() || m.corner) {
      x[i] = (1.0 - theta) * a.vertex(i) + theta * b.vertex(i);
      continue;
    }
    const Curve& c = domain.curve(m.curve);
    const double s = c.wrap(a.arc_length(i) + theta * wrap_diff(b.arc_length(i) - a.arc_length(i), c.length()));
    x[i] = c.point_at(s);
    arc[i] = s;
  }
  return a.with_vertices(std::move(x), std::move(arc));
}

// Quadratic least-squares fit over the vertices within a disc around x0 (grown from vertex i).
bool refine_minimum(const TriMesh& mesh, const Eigen::VectorXd& u, int i, const Vec2& x0, double radius, Vec2* x,
                    double* value) {
  const auto& nb = mesh.topology().vertex_neighbors;
  std::set<int> patch;
  std::vector<int> front{i};
  std::set<int> seen{i};
  while (!front.empty()) {
    std::vector<int> next;
    for (int j : front) {
      if ((mesh.vertex(j) - x0).norm() > radius) continue;
      patch.insert(j);
      for (int k : nb[j])
        if (seen.insert(k).second) next.push_back(k);
    }
    front.swap(next);
  }
  const Vec2 c = x0;
  double hs = 0.0;
  for (int j : patch) hs = std::max(hs, (mesh.vertex(j) - c).norm());
  if (patch.size() < 6 || hs <= 0.0) return false;
  Eigen::MatrixXd A(patch.size(), 6);
  Eigen::VectorXd b(patch.size());
  int r = 0;
  for (int j : patch) {
    const Vec2 d = (mesh.vertex(j) - c) / hs;
    A.row(r) << 1.0, d.x(), d.y(), 0.5 * d.x() * d.x(), d.x() * d.y(), 0.5 * d.y() * d.y();
    b[r++] = u[j];
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(A);
  if (qr.rank() < 6) return false;
  const Eigen::VectorXd co = qr.solve(b);
  Mat2 H;
  H << co[3], co[4], co[4], co[5];
  const Vec2 g(co[1], co[2]);
  if (H.determinant() <= 0.0 || H.trace() <= 0.0) return false;
  const Vec2 d = -H.inverse() * g;
  if (d.norm() > 1.0) return false;
  *x = c + hs * d;
  *value = co[0] + 0.5 * g.dot(d);
  return true;
}

}  // namespace

double local_mesh_size(const TriMesh& mesh, int i) {
  const auto& nb = mesh.topology().vertex_neighbors[i];
  if (nb.empty()) return 0.0;
  double s = 0.0;
  for (int j : nb) s += (mesh.vertex(j) - mesh.vertex(i)).norm();
  return s / static_cast<double>(nb.size());
}

std::vector<Trough> extract_troughs(const TriMesh& mesh, const Eigen::VectorXd& u, double level) {
  if (u.size() != mesh.num_vertices()) throw DomainError("extract_troughs: one value per vertex expected");
  const auto& nb = mesh.topology().vertex_neighbors;
  std::vector<int> minima;
  for (int i = 0; i < mesh.num_vertices(); ++i) {
    if (u[i] > level) continue;
    bool is_min = true;
    for (int j : nb[i])
      if (u[j] < u[i] || (u[j] == u[i] && j < i)) is_min = false;
    if (is_min) minima.push_back(i);
  }
  std::sort(minima.begin(), minima.end(), [&](int a, int b) { return u[a] < u[b] || (u[a] == u[b] && a < b); });
  std::vector<Trough> out;
  for (int i : minima) {
    const double hi = local_mesh_size(mesh, i);
    bool merged = false;
    for (const auto& t : out)
      if ((mesh.vertex(t.vertex) - mesh.vertex(i)).norm() <= 3.0 * std::max(hi, local_mesh_size(mesh, t.vertex)))
        merged = true;
    if (merged) continue;
    Trough t;
    t.vertex = i;
    t.point = mesh.vertex(i);
    t.value = u[i];
    // Refit on a disc centred at the current estimate until it settles.
    const double radius = 2.5 * hi;
    Vec2 x0 = t.point;
    for (int it = 0; it < 20; ++it) {
      Vec2 x;
      double val;
      if (!refine_minimum(mesh, u, i, x0, radius, &x, &val)) break;
      if ((x - mesh.vertex(i)).norm() > radius) break;
      t.point = x;
      t.value = std::min(val, u[i]);
      const bool settled = (x - x0).norm() <= 1e-10 * radius;
      x0 = x;
      if (settled) break;
    }
    out.push_back(t);
  }
  return out;
}

void write_step_log(std::ostream& out, const StepInfo& s, bool header) {
  if (header) out << "# step t dt min_u I_h min_area tau mesh_steps newton rejected\n";
  out << s.step << ' ' << std::setprecision(12) << s.t << ' ' << std::setprecision(6) << s.dt << ' '
      << std::setprecision(10) << s.min_u << ' ' << std::setprecision(8) << s.energy << ' ' << s.min_area << ' '
      << s.tau << ' ' << s.mesh_steps << ' ' << s.newton << ' ' << s.rejected << '\n';
}

TouchdownReport run_simulation(const Domain& domain, const SimulationConfig& cfg) {
  return run_simulation(domain, generate_initial_mesh(domain, cfg.target_N, cfg.mesh), cfg);
}

TouchdownReport run_simulation(const Domain& domain, const TriMesh& initial, const SimulationConfig& cfg) {
  if (!(cfg.eps > 0.0)) throw DomainError("run_simulation: eps must be positive");
  const int n = initial.num_interior();
  const std::vector<Curve> holes = domain.holes();
  const TriMesh& ref = initial;  // reference computational mesh
  TriMesh mesh = initial;
  Eigen::VectorXd y = Eigen::VectorXd::Zero(2 * n);
  double t = 0.0, dt = cfg.dt0;
  RadauOptions ro;
  ro.rtol = cfg.rtol;
  ro.atol = cfg.atol;
  Radau5 radau(ro);

  TouchdownReport rep;
  rep.eps = cfg.eps;
  rep.N = initial.num_triangles();
  rep.min_area = initial.min_signed_area();
  auto snapshot = [&](TouchdownReport& r) {
    r.t_final = t;
    r.mesh = mesh;
    r.u = extend_by_zero(mesh, y.head(n));
    r.v = extend_by_zero(mesh, y.tail(n));
    r.min_u = n > 0 ? y.head(n).minCoeff() : 0.0;
  };
  auto fail = [&](const std::string& why) {
    TouchdownReport last = rep;
    snapshot(last);
    throw SimulationFailure(why, std::move(last));
  };

  double prev_min = 0.0;
  bool last_rejected = false;
  while (true) {
    if (rep.steps >= cfg.max_steps) fail("run_simulation: step limit reached");
    if (t >= cfg.t_max) fail("run_simulation: t_max reached before touchdown");
    const double min_u = n > 0 ? y.head(n).minCoeff() : 0.0;
    dt = std::min({dt, cfg.cq * std::pow(1.0 + min_u, 3), cfg.t_max - t});

    // Mesh for the end of the slab.
    TriMesh target = mesh;
    StepInfo info;
    if (cfg.adapt) {
      MetricField metric = metric_tensor(mesh, extend_by_zero(mesh, y.head(n)), cfg.metric);
      if (!holes.empty()) metric = hole_adjusted_metric(metric, mesh, holes);
      MoveOptions mo;
      mo.tau = cfg.tau;
      mo.rtol = cfg.mesh_rtol;
      mo.atol = cfg.mesh_rtol;
      mo.interval = std::max(dt, cfg.mesh_dt_floor);
      try {
        MoveResult mv = move_mesh(domain, mesh, ref, metric, mo);
        target = std::move(mv.mesh);
        info.energy = mv.energy_end;
        info.tau = mv.tau_used;
        info.mesh_steps = mv.steps;
      } catch (const MeshTangled& e) {
        fail(e.what());
      }
    }
    const double interval = std::max(dt, cfg.mesh_dt_floor);
    if (dt < interval) target = truncate_path(domain, mesh, target, dt / interval);

    RadauStep st;
    int halvings = 0, rejected = 0;
    while (true) {
      if (dt < 1e-15) fail("run_simulation: step size underflow");
      SlabSystem sys(mesh, target, t, dt, cfg.eps, cfg.quench_floor);
      st = radau.step(sys, t, y, dt);
      double shrink = 1.0;
      if (!st.converged) {
        if (++halvings > cfg.max_halvings) fail("Newton iteration diverged after repeated step halving");
        shrink = 0.5;
      } else if (st.err > 1.0) {
        shrink = std::min(st.factor, 0.9);
      } else {
        break;
      }
      ++rejected;
      target = truncate_path(domain, mesh, target, shrink);
      dt *= shrink;
    }

    const double path_min = min_area_along_path(mesh, target);
    if (!(path_min > 0.0)) fail("mesh path became singular");
    t += dt;
    y = st.y;
    mesh = std::move(target);
    rep.min_area = std::min(rep.min_area, path_min);
    rep.rejected += rejected;
    ++rep.steps;

    const double new_min = n > 0 ? y.head(n).minCoeff() : 0.0;
    info.step = rep.steps;
    info.t = t;
    info.dt = dt;
    info.min_u = new_min;
    info.min_area = path_min;
    info.newton = st.newton_iters;
    info.rejected = rejected;
    rep.history.push_back(info);
    if (cfg.log) write_step_log(*cfg.log, info, rep.steps == 1);
    if (cfg.observer) cfg.observer(info, mesh, extend_by_zero(mesh, y.head(n)));

    if (new_min <= cfg.stop_level) {
      const double frac = (prev_min - cfg.stop_level) / (prev_min - new_min);
      rep.t_touch = t - dt + std::clamp(frac, 0.0, 1.0) * dt;
      rep.touched = true;
      break;
    }
    prev_min = new_min;
    dt *= (rejected > 0 || last_rejected) ? std::min(1.0, st.factor) : st.factor;
    last_rejected = rejected > 0;
  }
  snapshot(rep);
  rep.troughs = extract_troughs(rep.mesh, rep.u, cfg.trough_level);
  for (const auto& tr : rep.troughs)
    if (tr.value <= cfg.stop_level && rep.u[tr.vertex] <= cfg.stop_level) rep.points.push_back(tr);
  return rep;
}

}  // namespace mems
