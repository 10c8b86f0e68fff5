#include "mems/mmpde.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace mems {

namespace {

constexpr double kTwoThreeHalves = 2.8284271247461903;  // 2^{3/2}
constexpr double kSqrt2 = 1.4142135623730951;

using Vec6 = Eigen::Matrix<double, 6, 1>;
using Mat6 = Eigen::Matrix<double, 6, 6>;

double det2(const Mat2& A) { return A(0, 0) * A(1, 1) - A(0, 1) * A(1, 0); }

Mat2 inv2(const Mat2& A) {
  Mat2 r;
  r << A(1, 1), -A(0, 1), -A(1, 0), A(0, 0);
  return r / det2(A);
}

// Per-element data that stays fixed while the computational mesh flows.
struct ElemData {
  Mat2 Einv;
  double detE = 0.0;
  double area = 0.0;
  Mat2 Minv;
  double sqrt_det_M = 0.0;
  double det_M_m14 = 0.0;  // det(M)^{-1/4}
};

ElemData make_elem(const Vec2& x0, const Vec2& x1, const Vec2& x2, const Mat2& M) {
  ElemData e;
  Mat2 E;
  E.col(0) = x1 - x0;
  E.col(1) = x2 - x0;
  e.detE = det2(E);
  if (e.detE <= 1e-14) throw DegenerateElement("physical element is degenerate or inverted");
  e.Einv = inv2(E);
  e.area = 0.5 * e.detE;
  const double dM = det2(M);
  e.Minv = inv2(M);
  e.sqrt_det_M = std::sqrt(dM);
  e.det_M_m14 = std::pow(dM, -0.25);
  return e;
}

// |K| * (v0, v1, v2); false when the computational element is inverted.
bool elem_velocity(const ElemData& e, const Vec2& xi0, const Vec2& xi1, const Vec2& xi2, Vec6* out) {
  Mat2 Eh;
  Eh.col(0) = xi1 - xi0;
  Eh.col(1) = xi2 - xi0;
  const double detEh = det2(Eh);
  if (!(detEh > 0.0)) return false;
  const Mat2 J = Eh * e.Einv;
  const double detJ = detEh / e.detE;
  const double tr = (J * e.Minv * J.transpose()).trace();
  const Mat2 dGdJ = e.sqrt_det_M * std::sqrt(tr) * e.Minv * J.transpose();
  const double dGddet = kSqrt2 * e.det_M_m14 * std::sqrt(detJ);
  const Mat2 V = -e.Einv * dGdJ - dGddet * detJ * inv2(Eh);
  const Vec2 v1 = V.row(0).transpose(), v2 = V.row(1).transpose();
  const Vec2 v0 = -(v1 + v2);
  *out << v0, v1, v2;
  *out *= e.area;
  return true;
}

std::vector<ElemData> element_data(const TriMesh& phys, const MetricField& metric) {
  if (static_cast<int>(metric.M.size()) != phys.num_triangles())
    throw DomainError("metric does not match the mesh");
  std::vector<ElemData> out(phys.num_triangles());
  for (int k = 0; k < phys.num_triangles(); ++k) {
    const auto& t = phys.triangle(k);
    out[k] = make_elem(phys.vertex(t[0]), phys.vertex(t[1]), phys.vertex(t[2]), metric.M[k]);
  }
  return out;
}

double wrap_diff(double d, double L) {
  d = std::fmod(d, L);
  if (d > 0.5 * L) d -= L;
  if (d <= -0.5 * L) d += L;
  return d;
}

// Gradient flow of the computational vertices in reduced coordinates:
// interior vertices carry (x, y), sliding boundary vertices their arc-length.
class Flow {
 public:
  Flow(const Domain& domain, const TriMesh& phys, const TriMesh& ref, const MetricField& metric, double tau)
      : domain_(domain), ref_(ref), elems_(element_data(phys, metric)) {
    const std::vector<double> P = balance_factors(phys, metric);
    const int nv = ref.num_vertices();
    kind_.assign(nv, 2);
    index_.assign(nv, -1);
    scale_.resize(nv);
    int n = 0;
    for (int i = 0; i < nv; ++i) {
      scale_[i] = P[i] / tau;
      const auto& m = ref.marker(i);
      if (!m.on_boundary()) {
        kind_[i] = 0;
        index_[i] = n;
        n += 2;
      } else if (!m.corner) {
        kind_[i] = 1;
        index_[i] = n;
        n += 1;
      }
    }
    n_ = n;
  }

  int size() const { return n_; }

  Eigen::VectorXd initial() const {
    Eigen::VectorXd y(n_);
    for (int i = 0; i < ref_.num_vertices(); ++i) {
      if (kind_[i] == 0) y.segment<2>(index_[i]) = ref_.vertex(i);
      if (kind_[i] == 1) y[index_[i]] = ref_.arc_length(i);
    }
    return y;
  }

  std::vector<Vec2> positions(const Eigen::VectorXd& y) const {
    std::vector<Vec2> xi(ref_.num_vertices());
    for (int i = 0; i < ref_.num_vertices(); ++i) {
      if (kind_[i] == 0)
        xi[i] = y.segment<2>(index_[i]);
      else if (kind_[i] == 1)
        xi[i] = domain_.curve(ref_.marker(i).curve).point_at(y[index_[i]]);
      else
        xi[i] = ref_.vertex(i);
    }
    return xi;
  }

  std::vector<double> arcs(const Eigen::VectorXd& y) const {
    std::vector<double> s = ref_.arc_lengths();
    for (int i = 0; i < ref_.num_vertices(); ++i)
      if (kind_[i] == 1) s[i] = domain_.curve(ref_.marker(i).curve).wrap(y[index_[i]]);
    return s;
  }

  Vec2 tangent(int i, const Eigen::VectorXd& y) const {
    return domain_.curve(ref_.marker(i).curve).tangent_at(y[index_[i]]);
  }

  bool rhs(const Eigen::VectorXd& y, Eigen::VectorXd* f) const {
    const auto xi = positions(y);
    std::vector<Vec2> g(xi.size(), Vec2::Zero());
    for (int k = 0; k < ref_.num_triangles(); ++k) {
      const auto& t = ref_.triangle(k);
      Vec6 v;
      if (!elem_velocity(elems_[k], xi[t[0]], xi[t[1]], xi[t[2]], &v)) return false;
      for (int a = 0; a < 3; ++a) g[t[a]] += v.segment<2>(2 * a);
    }
    f->setZero(n_);
    for (int i = 0; i < ref_.num_vertices(); ++i) {
      if (kind_[i] == 0) f->segment<2>(index_[i]) = scale_[i] * g[i];
      if (kind_[i] == 1) (*f)[index_[i]] = scale_[i] * tangent(i, y).dot(g[i]);
    }
    return true;
  }

  /// Symmetrized Jacobian of the unscaled reduced velocity g (f = diag(P/tau) g).
  bool jacobian(const Eigen::VectorXd& y, Eigen::SparseMatrix<double>* Jm) const {
    const auto xi = positions(y);
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(static_cast<std::size_t>(ref_.num_triangles()) * 36);
    std::vector<Vec2> tang(xi.size(), Vec2::Zero());
    for (int i = 0; i < ref_.num_vertices(); ++i)
      if (kind_[i] == 1) tang[i] = tangent(i, y);
    for (int k = 0; k < ref_.num_triangles(); ++k) {
      const auto& t = ref_.triangle(k);
      std::array<Vec2, 3> p{xi[t[0]], xi[t[1]], xi[t[2]]};
      const double scale = std::sqrt(std::abs(cross(p[1] - p[0], p[2] - p[0])));
      const double delta = 1e-6 * std::max(scale, 1e-12);
      Mat6 D;
      for (int a = 0; a < 3; ++a) {
        for (int c = 0; c < 2; ++c) {
          Vec6 vp, vm;
          auto q = p;
          q[a][c] += delta;
          if (!elem_velocity(elems_[k], q[0], q[1], q[2], &vp)) return false;
          q[a][c] -= 2.0 * delta;
          if (!elem_velocity(elems_[k], q[0], q[1], q[2], &vm)) return false;
          D.col(2 * a + c) = (vp - vm) / (2.0 * delta);
        }
      }
      for (int b = 0; b < 3; ++b) {
        const int vb = t[b];
        if (kind_[vb] == 2) continue;
        for (int a = 0; a < 3; ++a) {
          const int va = t[a];
          if (kind_[va] == 2) continue;
          // 2x2 block d(g_b)/d(xi_a), then reduce rows and columns.
          const Mat2 B = D.block<2, 2>(2 * b, 2 * a);
          if (kind_[vb] == 0 && kind_[va] == 0) {
            for (int r = 0; r < 2; ++r)
              for (int c = 0; c < 2; ++c) trip.emplace_back(index_[vb] + r, index_[va] + c, B(r, c));
          } else if (kind_[vb] == 0) {
            const Vec2 col = B * tang[va];
            for (int r = 0; r < 2; ++r) trip.emplace_back(index_[vb] + r, index_[va], col[r]);
          } else if (kind_[va] == 0) {
            const Vec2 row = B.transpose() * tang[vb];
            for (int c = 0; c < 2; ++c) trip.emplace_back(index_[vb], index_[va] + c, row[c]);
          } else {
            trip.emplace_back(index_[vb], index_[va], tang[vb].dot(B * tang[va]));
          }
        }
      }
    }
    Eigen::SparseMatrix<double> H(n_, n_);
    H.setFromTriplets(trip.begin(), trip.end());
    *Jm = 0.5 * (H + Eigen::SparseMatrix<double>(H.transpose()));
    return true;
  }

  /// Inverse row scaling tau / P_i per unknown.
  Eigen::VectorXd inverse_scale() const {
    Eigen::VectorXd d(n_);
    for (int i = 0; i < ref_.num_vertices(); ++i) {
      if (kind_[i] == 0) d.segment<2>(index_[i]).setConstant(1.0 / scale_[i]);
      if (kind_[i] == 1) d[index_[i]] = 1.0 / scale_[i];
    }
    return d;
  }

 private:
  const Domain& domain_;
  const TriMesh& ref_;
  std::vector<ElemData> elems_;
  std::vector<int> kind_;  // 0 interior, 1 sliding, 2 pinned
  std::vector<int> index_;
  std::vector<double> scale_;
  int n_ = 0;
};

// Integrates y' = f(y) = S g(y) over [0, T] with the two-stage Rosenbrock method ROS2
// (L-stable, order two for any Jacobian approximation). With S = diag(P/tau) and a
// symmetrized dg/dy the stage matrix S^{-1} - gamma h dg/dy is symmetric, so the stages
// are solved with a sparse LDL^T factorization.
bool integrate_flow(const Flow& flow, double T, const MoveOptions& opts, Eigen::VectorXd* y, int* steps,
                    int* rejected) {
  const double gamma = 1.0 + 1.0 / std::sqrt(2.0);
  const int n = flow.size();
  if (n == 0) return true;
  const Eigen::VectorXd dinv = flow.inverse_scale();
  Eigen::SparseMatrix<double> J, Dinv(n, n), A;
  {
    std::vector<Eigen::Triplet<double>> d;
    for (int i = 0; i < n; ++i) d.emplace_back(i, i, dinv[i]);
    Dinv.setFromTriplets(d.begin(), d.end());
  }
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt;
  bool analyzed = false;
  Eigen::VectorXd f0(n), f1(n), k1(n), k2(n), ynew(n), ftmp(n);
  double t = 0.0, h = std::min(T, 1e-3 * opts.tau);
  bool have_f0 = false;
  *steps = 0;
  *rejected = 0;
  while (t < T * (1.0 - 1e-12)) {
    if (*steps + *rejected > opts.max_steps) return false;
    h = std::min(h, T - t);
    if (!have_f0) {
      if (!flow.rhs(*y, &f0)) return false;
      have_f0 = true;
    }
    if (!flow.jacobian(*y, &J)) return false;
    A = Dinv - (gamma * h) * J;
    if (!analyzed) {
      ldlt.analyzePattern(A);
      analyzed = true;
    }
    ldlt.factorize(A);
    if (ldlt.info() != Eigen::Success) {
      h *= 0.25;
      ++*rejected;
      continue;
    }
    // Stage right-hand sides are scaled by S^{-1}: S^{-1} f = g.
    k1 = ldlt.solve(dinv.cwiseProduct(f0));
    bool ok = flow.rhs(*y + h * k1, &f1);
    if (ok) {
      k2 = ldlt.solve(dinv.cwiseProduct(f1 - 2.0 * k1));
      ynew = *y + 1.5 * h * k1 + 0.5 * h * k2;
      ok = k1.allFinite() && k2.allFinite() && flow.rhs(ynew, &ftmp);
    }
    if (!ok) {
      h *= 0.25;
      ++*rejected;
      continue;
    }
    double err = 0.0;
    for (int i = 0; i < n; ++i) {
      const double e = 0.5 * h * (k1[i] + k2[i]);
      const double sc = opts.atol + opts.rtol * std::max(std::abs((*y)[i]), std::abs(ynew[i]));
      err += (e / sc) * (e / sc);
    }
    err = std::sqrt(err / n);
    const double fac = std::clamp(0.9 / std::sqrt(std::max(err, 1e-10)), 0.2, 5.0);
    if (err <= 1.0) {
      t += h;
      *y = ynew;
      f0 = ftmp;
      ++*steps;
    } else {
      ++*rejected;
    }
    h *= fac;
  }
  return true;
}

// New physical mesh Psi_h(ref): reference vertices located in the flowed computational
// mesh and mapped through the piecewise linear correspondence with the physical mesh.
TriMesh map_reference(const Domain& domain, const TriMesh& phys, const TriMesh& ref, const TriMesh& comp) {
  const int nv = ref.num_vertices();
  std::vector<Vec2> x(nv);
  std::vector<double> arc = phys.arc_lengths();
  PointLocator loc(comp);
  for (int j = 0; j < ref.num_interior(); ++j) {
    Eigen::Vector3d l;
    int k = loc.locate(ref.vertex(j), &l, 1e-12);
    if (k < 0) k = loc.locate_nearest(ref.vertex(j), &l);
    const auto& t = comp.triangle(k);
    x[j] = l[0] * phys.vertex(t[0]) + l[1] * phys.vertex(t[1]) + l[2] * phys.vertex(t[2]);
  }
  // Boundary: 1D interpolation of arc-length along every curve.
  for (int cid = 0; cid < static_cast<int>(domain.curves().size()); ++cid) {
    const Curve& c = domain.curve(cid);
    const double L = c.length();
    std::vector<int> ids;
    for (int i = ref.num_interior(); i < nv; ++i)
      if (ref.marker(i).curve == cid) ids.push_back(i);
    if (ids.empty()) continue;
    std::sort(ids.begin(), ids.end(), [&](int a, int b) { return comp.arc_length(a) < comp.arc_length(b); });
    const int m = static_cast<int>(ids.size());
    for (int i : ids) {
      if (ref.marker(i).corner) {
        x[i] = phys.vertex(i);
        arc[i] = phys.arc_length(i);
        continue;
      }
      const double sq = ref.arc_length(i);
      // Bracket sq between consecutive computational arc-lengths (cyclically).
      auto it = std::upper_bound(ids.begin(), ids.end(), sq,
                                 [&](double v, int id) { return v < comp.arc_length(id); });
      const int hi = static_cast<int>(it - ids.begin()) % m;
      const int lo = (hi - 1 + m) % m;
      const double sc_lo = comp.arc_length(ids[lo]);
      double dc = comp.arc_length(ids[hi]) - sc_lo;
      if (dc <= 0.0) dc += L;
      double off = sq - sc_lo;
      if (off < 0.0) off += L;
      const double theta = dc > 0.0 ? off / dc : 0.0;
      const double sp_lo = phys.arc_length(ids[lo]);
      const double dp = wrap_diff(phys.arc_length(ids[hi]) - sp_lo, L);
      const double s = c.wrap(sp_lo + theta * dp);
      x[i] = c.point_at(s);
      arc[i] = s;
    }
  }
  return phys.with_vertices(std::move(x), std::move(arc));
}

}  // namespace

double energy_density(const Mat2& J, const Mat2& M) {
  const double sdm = std::sqrt(det2(M));
  const double tr = (J * inv2(M) * J.transpose()).trace();
  const double dJ = det2(J);
  if (dJ < 0.0) throw DegenerateElement("energy_density: inverted element");
  return sdm * (std::pow(tr, 1.5) / 3.0 + kTwoThreeHalves / 3.0 * std::pow(dJ / sdm, 1.5));
}

Mat2 energy_dG_dJ(const Mat2& J, const Mat2& M) {
  const Mat2 Minv = inv2(M);
  const double tr = (J * Minv * J.transpose()).trace();
  return std::sqrt(det2(M)) * std::sqrt(tr) * Minv * J.transpose();
}

double energy_dG_ddetJ(const Mat2& J, const Mat2& M) {
  const double dJ = det2(J);
  if (dJ < 0.0) throw DegenerateElement("energy_dG_ddetJ: inverted element");
  return kSqrt2 * std::pow(det2(M), -0.25) * std::sqrt(dJ);
}

double energy(const TriMesh& phys, const TriMesh& comp, const MetricField& metric) {
  double I = 0.0;
  for (int k = 0; k < phys.num_triangles(); ++k) {
    const ElementPair p = element_pair(phys, comp, k);
    I += p.area * energy_density(p.J, metric.M[k]);
  }
  return I;
}

std::array<Vec2, 3> local_velocities(const ElementPair& pair, const Mat2& M) {
  const double detE = det2(pair.E), detEh = det2(pair.E_hat);
  if (detE <= 1e-14 || detEh <= 1e-14) throw DegenerateElement("local_velocities: degenerate element");
  const Mat2 V = -inv2(pair.E) * energy_dG_dJ(pair.J, M) - energy_dG_ddetJ(pair.J, M) * (detEh / detE) * inv2(pair.E_hat);
  const Vec2 v1 = V.row(0).transpose(), v2 = V.row(1).transpose();
  return {-(v1 + v2), v1, v2};
}

std::vector<Vec2> assemble_velocities(const TriMesh& phys, const TriMesh& comp, const MetricField& metric) {
  std::vector<Vec2> g(phys.num_vertices(), Vec2::Zero());
  for (int k = 0; k < phys.num_triangles(); ++k) {
    const ElementPair p = element_pair(phys, comp, k);
    const auto v = local_velocities(p, metric.M[k]);
    const auto& t = phys.triangle(k);
    for (int a = 0; a < 3; ++a) g[t[a]] += p.area * v[a];
  }
  return g;
}

std::vector<double> balance_factors(const TriMesh& phys, const MetricField& metric) {
  const auto Mv = vertex_metrics(phys, metric);
  std::vector<double> P(Mv.size());
  for (std::size_t i = 0; i < Mv.size(); ++i) P[i] = std::pow(det2(Mv[i]), 0.25);
  return P;
}

double min_area_along_path(const TriMesh& a, const TriMesh& b) {
  double m = std::numeric_limits<double>::infinity();
  for (int k = 0; k < a.num_triangles(); ++k) {
    const auto& t = a.triangle(k);
    auto area_at = [&](double th) {
      const Vec2 p0 = (1 - th) * a.vertex(t[0]) + th * b.vertex(t[0]);
      const Vec2 p1 = (1 - th) * a.vertex(t[1]) + th * b.vertex(t[1]);
      const Vec2 p2 = (1 - th) * a.vertex(t[2]) + th * b.vertex(t[2]);
      return 0.5 * cross(p1 - p0, p2 - p0);
    };
    const double a0 = area_at(0.0), am = area_at(0.5), a1 = area_at(1.0);
    const double c = 2.0 * (a0 + a1 - 2.0 * am);
    const double bb = a1 - a0 - c;
    double lo = std::min(a0, a1);
    if (c > 0.0) {
      const double th = -bb / (2.0 * c);
      if (th > 0.0 && th < 1.0) lo = std::min(lo, a0 + bb * th + c * th * th);
    }
    m = std::min(m, lo);
  }
  return m;
}

MoveResult move_mesh(const Domain& domain, const TriMesh& phys, const TriMesh& ref_comp, const MetricField& metric,
                     const MoveOptions& opts) {
  if (!(opts.tau > 0.0)) throw DomainError("move_mesh: tau must be positive");
  if (phys.triangles() != ref_comp.triangles()) throw DomainError("move_mesh: meshes do not share connectivity");
  MoveResult res;
  res.energy_start = energy(phys, ref_comp, metric);
  double tau = opts.tau;
  for (int attempt = 0; attempt <= opts.max_tau_doublings; ++attempt, tau *= 2.0) {
    Flow flow(domain, phys, ref_comp, metric, tau);
    Eigen::VectorXd y = flow.initial();
    Eigen::VectorXd f0;
    if (attempt == 0 && flow.rhs(y, &f0)) {
      res.max_speed = 0.0;
      for (int i = 0; i + 1 < f0.size(); ++i) res.max_speed = std::max(res.max_speed, std::abs(f0[i]));
    }
    if (!integrate_flow(flow, opts.interval, opts, &y, &res.steps, &res.rejected)) continue;
    TriMesh comp = ref_comp.with_vertices(flow.positions(y), flow.arcs(y));
    if (comp.min_signed_area() <= 0.0) continue;
    TriMesh next = map_reference(domain, phys, ref_comp, comp);
    if (next.min_signed_area() <= 0.0 || min_area_along_path(phys, next) <= 0.0) continue;
    res.energy_end = energy(phys, comp, metric);
    res.mesh = std::move(next);
    res.comp = std::move(comp);
    res.tau_used = tau;
    return res;
  }
  throw MeshTangled("mesh movement produced an invalid mesh even after increasing tau");
}

}  // namespace mems
