// Acceptance checks. Prints one PASS/FAIL line per criterion and exits nonzero if any fails.
// Long simulations run concurrently on a small thread pool.

#include "mems/fem.hpp"
#include "mems/metric.hpp"
#include "mems/mmpde.hpp"
#include "mems/profiles.hpp"
#include "mems/radau.hpp"
#include "mems/simulation.hpp"
#include "mems/skeleton.hpp"

#include <Eigen/SparseLU>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <mutex>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

using namespace mems;

namespace {

int failures = 0;

void report(const char* id, const char* title, bool ok, const std::string& detail) {
  std::printf("%s %s %s: %s\n", ok ? "PASS" : "FAIL", id, title, detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

template <typename... Args>
std::string fmt(const char* f, Args... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// ---- simulations ----------------------------------------------------------

struct RunKey {
  std::string domain;
  double eps;
  int N;
  double tau = 0.01;  // not part of the identity of a run
  bool operator<(const RunKey& o) const {
    return std::tie(domain, eps, N) < std::tie(o.domain, o.eps, o.N);
  }
};

struct RunResult {
  bool ok = false;
  std::string error;
  TouchdownReport report;
  double seconds = 0.0;
};

std::map<RunKey, RunResult> run_all(const std::vector<RunKey>& keys) {
  std::map<RunKey, RunResult> out;
  for (const auto& k : keys) out[k];
  std::atomic<size_t> next{0};
  std::mutex io;
  auto worker = [&] {
    for (size_t i; (i = next++) < keys.size();) {
      const RunKey& k = keys[i];
      RunResult r;
      const auto t0 = std::chrono::steady_clock::now();
      try {
        SimulationConfig cfg;
        cfg.eps = k.eps;
        cfg.target_N = k.N;
        cfg.tau = k.tau;
        r.report = run_simulation(Domain::preset(k.domain), cfg);
        r.ok = r.report.touched;
        if (!r.ok) r.error = "no touchdown before t_max";
      } catch (const std::exception& e) {
        r.error = e.what();
      }
      r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      std::lock_guard<std::mutex> lock(io);
      std::fprintf(stderr, "  run %s eps=%g N=%d: %s in %.0f s\n", k.domain.c_str(), k.eps, k.N,
                   r.ok ? "touchdown" : r.error.c_str(), r.seconds);
      out[k] = std::move(r);
    }
  };
  const unsigned nthreads = std::max(1u, std::min<unsigned>(std::thread::hardware_concurrency(), keys.size()));
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < nthreads; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  return out;
}

// Largest distance from a point of one set to the nearest point of the other.
double set_distance(const std::vector<Trough>& a, const std::vector<Trough>& b) {
  auto one = [](const std::vector<Trough>& p, const std::vector<Trough>& q) {
    double worst = 0.0;
    for (const auto& x : p) {
      double best = 1e300;
      for (const auto& y : q) best = std::min(best, (x.point - y.point).norm());
      worst = std::max(worst, best);
    }
    return worst;
  };
  return std::max(one(a, b), one(b, a));
}

double polyline_distance(const std::vector<Vec2>& line, const Vec2& x) {
  double best = 1e300;
  for (size_t k = 0; k < line.size(); ++k) {
    best = std::min(best, (line[k] - x).norm());
    if (k + 1 < line.size()) {
      const Vec2 e = line[k + 1] - line[k];
      const double t = std::clamp((x - line[k]).dot(e) / e.squaredNorm(), 0.0, 1.0);
      best = std::min(best, (line[k] + t * e - x).norm());
    }
  }
  return best;
}

// Dense samples of the exact medial axis of (-1,1) x (-0.8,0.8).
std::vector<Vec2> rect_axis() {
  std::vector<Vec2> pts;
  for (int k = 0; k <= 1000; ++k) {
    const double s = k / 1000.0;
    pts.emplace_back(-0.2 + 0.4 * s, 0.0);
    for (const Vec2 sg : {Vec2(1, 1), Vec2(1, -1), Vec2(-1, 1), Vec2(-1, -1)})
      pts.push_back(Vec2(0.2 + 0.8 * s, 0.8 * s).cwiseProduct(sg));
  }
  return pts;
}

double hausdorff(const std::vector<Vec2>& a, const std::vector<Vec2>& b) {
  auto one = [](const std::vector<Vec2>& p, const std::vector<Vec2>& q) {
    double worst = 0.0;
    for (const auto& x : p) {
      double best = 1e300;
      for (const auto& y : q) best = std::min(best, (x - y).norm());
      worst = std::max(worst, best);
    }
    return worst;
  };
  return std::max(one(a, b), one(b, a));
}

// ---- fast criteria --------------------------------------------------------

void check_profiles() {
  const ProfileConstants c = solve_profiles().constants;
  const bool ok = std::abs(c.z0 - 2.89) <= 0.02 && std::abs(c.w0_at_z0 + 1.0822) <= 0.002 &&
                  std::abs(c.w1bar_at_z0 + 0.1186) <= 0.002 && std::abs(c.alpha - 0.3533) <= 0.005;
  report("A1", "profile constants", ok,
         fmt("z0=%.4f w0(z0)=%.5f w1bar(z0)=%.5f alpha=%.4f", c.z0, c.w0_at_z0, c.w1bar_at_z0, c.alpha));
  const double rate = fit_wkb_decay(solve_w0());
  const double omega = wkb_rate_exact();
  report("A2", "WKB decay rate", std::abs(rate - omega) <= 0.05 * omega,
         fmt("fitted %.5f, omega %.5f, rel. diff %.2f%%", rate, omega, 100 * std::abs(rate - omega) / omega));
}

void check_quench() {
  const double T = zero_d_quench_time();
  report("A3", "flat quench time", std::abs(T - 1.0 / 3.0) <= 1e-5, fmt("T=%.9f, |T-1/3|=%.2e", T, std::abs(T - 1.0 / 3.0)));
}

void check_mmpde_gradient() {
  std::mt19937 rng(2024);
  std::uniform_real_distribution<double> u01(0, 1), upm(-1, 1), shift(-0.05, 0.05);
  double worst = 0.0;
  int meshes = 0;
  while (meshes < 20) {
    std::vector<Vec2> p(8);
    for (auto& x : p) x = {u01(rng), u01(rng)};
    auto tris = delaunay(p);
    if (tris.size() != 10) continue;
    const TriMesh phys = TriMesh::from_arrays(p, tris, std::vector<BoundaryMarker>(p.size()));
    if (phys.min_signed_area() < 1e-3) continue;
    MetricField f;
    for (int k = 0; k < phys.num_triangles(); ++k) {
      Mat2 A;
      A << upm(rng), upm(rng), upm(rng), upm(rng);
      f.M.push_back(A * A.transpose() + 0.3 * Mat2::Identity());
    }
    std::vector<Vec2> xi = phys.vertices();
    for (auto& x : xi) x += Vec2(shift(rng), shift(rng));
    if (phys.with_vertices(xi).min_signed_area() <= 0.0) continue;
    const auto v = assemble_velocities(phys, phys.with_vertices(xi), f);
    const double h = 1e-6;
    double err = 0.0, scale = 0.0;
    for (int i = 0; i < phys.num_vertices(); ++i)
      for (int c = 0; c < 2; ++c) {
        auto a = xi, b = xi;
        a[i][c] += h;
        b[i][c] -= h;
        const double g = (energy(phys, phys.with_vertices(a), f) - energy(phys, phys.with_vertices(b), f)) / (2 * h);
        err = std::max(err, std::abs(v[i][c] + g));
        scale = std::max(scale, std::abs(g));
      }
    worst = std::max(worst, err / scale);
    ++meshes;
  }
  report("A8", "MMPDE velocities vs finite differences", worst <= 1e-6,
         fmt("max relative deviation %.2e over %d meshes", worst, meshes));
}

double biharmonic_error(int n) {
  const TriMesh m = structured_rect_mesh(Domain::rectangle(0, 0, 1, 1), n, n, QuadSplit::Diagonal);
  const SpMat M = assemble_mass(m), B = assemble_stiffness(m);
  const int ni = m.num_interior();
  auto exact = [](const Vec2& x) { return std::sin(kPi * x.x()) * std::sin(kPi * x.y()); };
  const SourceFn src = [&](const Vec2& x, double) { return 4.0 * std::pow(kPi, 4) * exact(x); };
  LoadOptions with, without;
  with.source = &src;
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(ni);
  const Eigen::VectorXd g = assemble_load(m, zero, {}, with) - assemble_load(m, zero, {}, without);
  std::vector<Eigen::Triplet<double>> t;
  for (int k = 0; k < M.outerSize(); ++k)
    for (SpMat::InnerIterator it(M, k); it; ++it) t.emplace_back(it.row(), it.col(), it.value());
  for (int k = 0; k < B.outerSize(); ++k)
    for (SpMat::InnerIterator it(B, k); it; ++it) {
      t.emplace_back(it.row(), ni + it.col(), it.value());
      t.emplace_back(ni + it.row(), it.col(), it.value());
    }
  SpMat K(2 * ni, 2 * ni);
  K.setFromTriplets(t.begin(), t.end());
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(2 * ni);
  rhs.tail(ni) = -g;
  Eigen::SparseLU<SpMat> lu(K);
  return l2_error(m, lu.solve(rhs).tail(ni), exact);
}

void check_fem_order() {
  const double e1 = biharmonic_error(16), e2 = biharmonic_error(32), e3 = biharmonic_error(64);
  const double p1 = std::log2(e1 / e2), p2 = std::log2(e2 / e3);
  report("A10", "FEM L2 convergence", p1 >= 1.9 && p2 >= 1.9,
         fmt("errors %.3e %.3e %.3e, orders %.3f %.3f", e1, e2, e3, p1, p2));
}

void check_metric() {
  double worst = 0.0;
  for (const char* name : {"rect", "rect-hole", "rect-4holes", "polar-asym"}) {
    const TriMesh m = generate_initial_mesh(Domain::preset(name), 3000);
    for (double amp : {0.3, 0.9, 5.0}) {
      Eigen::VectorXd u(m.num_vertices());
      for (int i = 0; i < m.num_vertices(); ++i) {
        const Vec2& x = m.vertex(i);
        u[i] = -amp * std::exp(-8.0 * (x - Vec2(0.3, -0.2)).squaredNorm()) + 0.1 * std::sin(3 * x.x()) * x.y();
      }
      const MetricField f = metric_tensor(m, u);
      // |Omega| of the discrete constraint is the area of the triangulated domain.
      double s = 0.0, area = 0.0;
      for (int k = 0; k < m.num_triangles(); ++k) {
        s += m.signed_area(k) * std::sqrt(f.M[k].determinant());
        area += m.signed_area(k);
      }
      worst = std::max(worst, std::abs(s - 2.0 * area) / area);
    }
  }
  const Domain hd = Domain::preset("rect-hole");
  const Curve hole = hd.holes().front();
  double beta_dev = 0.0;
  for (double m : {1.0, 1.7, 3.25, 40.0})
    for (int k = 0; k < 16; ++k) {
      const Vec2 x = hole.point_at(hole.length() * k / 16.0);
      beta_dev = std::max(beta_dev, std::abs(hole_beta(hole.distance(x), m) - 0.5 * m) / m);
    }
  report("A11", "metric normalization and hole term", worst <= 1e-6 && beta_dev <= 1e-14,
         fmt("max |sigma - 2|Omega||/|Omega| = %.2e, hole beta deviation %.1e", worst, beta_dev));
}

}  // namespace

int main() {
  const auto t0 = std::chrono::steady_clock::now();
  check_profiles();
  check_quench();
  check_mmpde_gradient();
  check_fem_order();
  check_metric();

  const std::vector<double> multiplicity_eps = {0.02, 0.068, 0.1};
  const std::vector<double> skeleton_eps = {1e-4, 1e-3, 5e-3, 0.01, 0.02};
  const std::vector<double> polar_eps = {0.02, 0.024, 0.04, 0.092};
  std::vector<RunKey> keys;
  for (double e : multiplicity_eps) keys.push_back({"rect", e, 6240});
  for (double e : multiplicity_eps) keys.push_back({"rect", e, 15680});
  for (double e : skeleton_eps)
    if (e != 0.02) keys.push_back({"rect", e, 6240, e < 1e-3 ? 0.1 : 0.01});
  for (double e : polar_eps) keys.push_back({"polar-asym", e, 6240});
  keys.push_back({"rect-4holes", 0.02, 8000});
  // Longest runs first so a multi-core pool stays busy.
  std::stable_sort(keys.begin(), keys.end(), [](const RunKey& a, const RunKey& b) { return a.eps < b.eps; });
  std::fprintf(stderr, "running %zu simulations\n", keys.size());
  const auto runs = run_all(keys);

  // Multiplicity on the rectangle.
  {
    const int expected[3] = {4, 2, 1};
    bool ok = true;
    std::string detail;
    for (int k = 0; k < 3; ++k) {
      const RunResult& r = runs.at({"rect", multiplicity_eps[k], 6240});
      const int n = r.ok ? static_cast<int>(r.report.points.size()) : -1;
      ok = ok && n == expected[k];
      detail += fmt("eps=%g: %d points%s; ", multiplicity_eps[k], n, r.ok ? "" : (" [" + r.error + "]").c_str());
    }
    const RunResult& r02 = runs.at({"rect", 0.02, 6240});
    const double t = r02.ok ? r02.report.t_touch : std::nan("");
    ok = ok && t >= 0.30 && t <= 0.32;
    report("A4", "rectangle touchdown multiplicity", ok, detail + fmt("t_touch(0.02)=%.5f", t));
  }

  // Mesh refinement.
  {
    bool ok = true;
    std::string detail;
    for (double e : multiplicity_eps) {
      const RunResult& a = runs.at({"rect", e, 6240});
      const RunResult& b = runs.at({"rect", e, 15680});
      if (!a.ok || !b.ok) {
        ok = false;
        detail += fmt("eps=%g: run failed; ", e);
        continue;
      }
      const bool same = a.report.points.size() == b.report.points.size();
      const double dist = set_distance(a.report.points, b.report.points);
      ok = ok && same && dist <= 0.05;
      detail += fmt("eps=%g: %zu vs %zu points, max offset %.4f; ", e, a.report.points.size(), b.report.points.size(), dist);
    }
    report("A5", "touchdown locations under mesh refinement", ok, detail);
  }

  // Skeleton agreement on the rectangle.
  {
    const double h = 0.01;
    const SkeletonSet sk = compute_skeleton(Domain::preset("rect"), h);
    const double hd = hausdorff(sk.vertices(), rect_axis());
    bool ok = hd <= 2 * h;
    std::string detail = fmt("Hausdorff to exact axis %.4f (limit %.3f); ", hd, 2 * h);
    for (double e : skeleton_eps) {
      const RunResult& r = runs.at({"rect", e, 6240});
      if (!r.ok) {
        ok = false;
        detail += fmt("eps=%g: %s; ", e, r.error.c_str());
        continue;
      }
      double worst = 0.0;
      for (const auto& p : r.report.points) worst = std::max(worst, distance_to_skeleton(sk, p.point));
      ok = ok && !r.report.points.empty() && worst <= 0.05;
      detail += fmt("eps=%g: %zu points, max distance %.4f; ", e, r.report.points.size(), worst);
    }
    report("A6", "rectangle touchdown on the skeleton", ok, detail);
  }

  // Branch switching on the asymmetric domain.
  {
    const Domain d = Domain::preset("polar-asym");
    const SkeletonSet sk = compute_skeleton(d, 0.01);
    bool ok = true;
    std::string detail;
    std::vector<int> branch_ids;
    for (double e : {0.02, 0.024, 0.04}) {
      const RunResult& r = runs.at({"polar-asym", e, 6240});
      if (!r.ok || r.report.points.empty()) {
        ok = false;
        detail += fmt("eps=%g: %s; ", e, r.ok ? "no trough" : r.error.c_str());
        continue;
      }
      const Vec2 x = r.report.points.front().point;
      int best = -1;
      double bd = 1e300;
      for (size_t b = 0; b < sk.branches.size(); ++b) {
        const double dist = polyline_distance(sk.branches[b].points, x);
        if (dist < bd) bd = dist, best = static_cast<int>(b);
      }
      ok = ok && bd <= 0.08;
      branch_ids.push_back(best);
      detail += fmt("eps=%g: (%.3f,%.3f) on branch %d at %.4f; ", e, x.x(), x.y(), best, bd);
    }
    std::sort(branch_ids.begin(), branch_ids.end());
    ok = ok && branch_ids.size() == 3 && std::unique(branch_ids.begin(), branch_ids.end()) == branch_ids.end();
    // Centre: deepest skeleton point.
    Vec2 centre = Vec2::Zero();
    double dmax = -1.0;
    for (const auto& b : sk.branches)
      for (size_t k = 0; k < b.points.size(); ++k)
        if (b.distance[k] > dmax) dmax = b.distance[k], centre = b.points[k];
    const RunResult& r = runs.at({"polar-asym", 0.092, 6240});
    if (r.ok) {
      const size_t n = r.report.troughs.size();
      const double off = n ? (r.report.troughs.front().point - centre).norm() : 1e300;
      ok = ok && n == 1 && r.report.points.size() == 1 && off <= 0.08;
      detail += fmt("eps=0.092: %zu trough(s), %.4f from the centre (%.3f,%.3f)", n, off, centre.x(), centre.y());
    } else {
      ok = false;
      detail += "eps=0.092: " + r.error;
    }
    report("A7", "asymmetric domain branch switching", ok, detail);
  }

  // Mesh validity along the multiplicity and asymmetric runs.
  {
    bool ok = true;
    double amin = 1e300;
    int steps = 0;
    for (const auto& [k, r] : runs) {
      const bool listed = (k.domain == "rect" && k.N == 6240 &&
                           std::find(multiplicity_eps.begin(), multiplicity_eps.end(), k.eps) != multiplicity_eps.end()) ||
                          k.domain == "polar-asym";
      if (!listed) continue;
      if (!r.ok) {
        ok = false;
        continue;
      }
      for (const auto& s : r.report.history) {
        amin = std::min(amin, s.min_area);
        ++steps;
      }
    }
    ok = ok && amin > 0.0;
    report("A9", "positive element areas", ok, fmt("min signed area %.3e over %d accepted steps", amin, steps));
  }

  // Reduced four-hole run.
  {
    const RunResult& r = runs.at({"rect-4holes", 0.02, 8000});
    const SkeletonSet sk = compute_skeleton(Domain::preset("rect-4holes"), 0.01);
    bool ok = r.ok && r.report.min_area > 0.0 && !r.report.troughs.empty();
    double worst = 0.0;
    if (r.ok)
      for (const auto& t : r.report.troughs) worst = std::max(worst, distance_to_skeleton(sk, t.point));
    ok = ok && worst <= 0.08;
    report("A12", "reduced four-hole run", ok,
           r.ok ? fmt("N=%d, t_touch=%.5f, %zu troughs, max distance to skeleton %.4f, min area %.3e", r.report.N,
                      r.report.t_touch, r.report.troughs.size(), worst, r.report.min_area)
                : r.error);
  }

  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::printf("%d criteria failed, %.0f s\n", failures, secs);
  return failures == 0 ? 0 : 1;
}
