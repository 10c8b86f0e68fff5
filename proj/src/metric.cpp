#include "mems/metric.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <set>

namespace mems {

std::vector<double> MetricField::sqrt_det() const {
  std::vector<double> out(M.size());
  for (std::size_t k = 0; k < M.size(); ++k) out[k] = std::sqrt(M[k].determinant());
  return out;
}

double MetricField::max_sqrt_det() const {
  double m = 0.0;
  for (const auto& Mk : M) m = std::max(m, std::sqrt(Mk.determinant()));
  return m;
}

Mat2 abs_sym(const Mat2& H) {
  Eigen::SelfAdjointEigenSolver<Mat2> es;
  es.computeDirect(0.5 * (H + H.transpose()));
  const Eigen::Vector2d l = es.eigenvalues().cwiseAbs();
  const Mat2 A = es.eigenvectors() * l.asDiagonal() * es.eigenvectors().transpose();
  return 0.5 * (A + A.transpose());
}

namespace {

// Hessians below this size are round-off from fitting a flat field.
constexpr double kZeroHessian = 1e-9;

// Fit returns false when the patch does not determine a quadratic.
bool fit_quadratic(const TriMesh& mesh, const Eigen::VectorXd& u, int i, const std::vector<int>& patch, Mat2* H) {
  if (patch.size() < 6) return false;
  const Vec2 xi = mesh.vertex(i);
  double hs = 0.0;
  for (int j : patch) hs = std::max(hs, (mesh.vertex(j) - xi).norm());
  if (hs <= 0.0) return false;
  Eigen::MatrixXd A(patch.size(), 6);
  Eigen::VectorXd b(patch.size());
  for (std::size_t r = 0; r < patch.size(); ++r) {
    const Vec2 d = (mesh.vertex(patch[r]) - xi) / hs;
    A.row(r) << 1.0, d.x(), d.y(), 0.5 * d.x() * d.x(), d.x() * d.y(), 0.5 * d.y() * d.y();
    b[r] = u[patch[r]];
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(A);
  qr.setThreshold(1e-10);
  if (qr.rank() < 6) return false;
  const Eigen::VectorXd c = qr.solve(b);
  *H << c[3], c[4], c[4], c[5];
  *H /= hs * hs;
  return true;
}

}  // namespace

std::vector<Mat2> recover_vertex_hessians(const TriMesh& mesh, const Eigen::VectorXd& u) {
  if (u.size() != mesh.num_vertices()) throw DomainError("recover_hessian: nodal vector size mismatch");
  const auto& nb = mesh.topology().vertex_neighbors;
  std::vector<Mat2> H(mesh.num_vertices(), Mat2::Zero());
  for (int i = 0; i < mesh.num_vertices(); ++i) {
    std::vector<int> patch{i};
    patch.insert(patch.end(), nb[i].begin(), nb[i].end());
    if (fit_quadratic(mesh, u, i, patch, &H[i])) continue;
    std::set<int> ring2(patch.begin(), patch.end());
    for (int j : nb[i]) ring2.insert(nb[j].begin(), nb[j].end());
    patch.assign(ring2.begin(), ring2.end());
    if (!fit_quadratic(mesh, u, i, patch, &H[i]))
      throw RankError("Hessian recovery: vertex patch is degenerate even with two rings");
  }
  return H;
}

std::vector<Mat2> recover_hessian(const TriMesh& mesh, const Eigen::VectorXd& u, bool smoothing) {
  std::vector<Mat2> Hv = recover_vertex_hessians(mesh, u);
  if (smoothing) {
    const auto& nb = mesh.topology().vertex_neighbors;
    std::vector<Mat2> S(Hv.size());
    for (std::size_t i = 0; i < Hv.size(); ++i) {
      Mat2 acc = Hv[i];
      for (int j : nb[i]) acc += Hv[j];
      S[i] = acc / static_cast<double>(nb[i].size() + 1);
    }
    Hv.swap(S);
  }
  std::vector<Mat2> He(mesh.num_triangles());
  for (int k = 0; k < mesh.num_triangles(); ++k) {
    const auto& t = mesh.triangle(k);
    He[k] = (Hv[t[0]] + Hv[t[1]] + Hv[t[2]]) / 3.0;
  }
  return He;
}

Mat2 metric_from_hessian(const Mat2& H, double alpha) {
  const Mat2 A = Mat2::Identity() + abs_sym(H) / alpha;
  return std::pow(A.determinant(), -1.0 / 6.0) * A;
}

MetricField metric_from_hessians(const TriMesh& mesh, const std::vector<Mat2>& H, const MetricOptions& opts) {
  const int nt = mesh.num_triangles();
  if (static_cast<int>(H.size()) != nt) throw DomainError("metric: one Hessian per element expected");
  std::vector<double> area(nt);
  std::vector<Mat2> absH(nt);
  double omega = 0.0, hmax = 0.0;
  for (int k = 0; k < nt; ++k) {
    area[k] = mesh.signed_area(k);
    omega += area[k];
    absH[k] = abs_sym(H[k]);
    hmax = std::max(hmax, absH[k].norm());
  }
  MetricField out;
  out.M.assign(nt, Mat2::Identity());
  if (!(hmax > kZeroHessian) || !std::isfinite(hmax)) {
    out.fallback = true;
    out.sigma = omega;
    return out;
  }
  // sigma(alpha) = sum |K| det(I + |H|/alpha)^{1/3}, decreasing from +inf to |Omega|.
  auto sigma = [&](double alpha) {
    double s = 0.0;
    for (int k = 0; k < nt; ++k) {
      const Mat2& a = absH[k];
      const double det = (1.0 + a(0, 0) / alpha) * (1.0 + a(1, 1) / alpha) - a(0, 1) * a(1, 0) / (alpha * alpha);
      s += area[k] * std::cbrt(det);
    }
    return s;
  };
  const double target = 2.0 * omega;
  double hi = hmax, lo = hmax;
  for (int it = 0; it < 2000 && sigma(hi) > target; ++it) hi *= 2.0;
  for (int it = 0; it < 2000 && sigma(lo) < target; ++it) lo *= 0.5;
  double alpha = std::sqrt(lo * hi), s = sigma(alpha);
  for (int it = 0; it < 300 && std::abs(s - target) > 0.1 * opts.tolerance * omega; ++it) {
    if (s > target)
      lo = alpha;
    else
      hi = alpha;
    alpha = std::sqrt(lo * hi);
    s = sigma(alpha);
  }
  out.alpha = alpha;
  out.sigma = 0.0;
  for (int k = 0; k < nt; ++k) {
    out.M[k] = metric_from_hessian(H[k], alpha);
    out.sigma += area[k] * std::sqrt(out.M[k].determinant());
  }
  return out;
}

MetricField metric_tensor(const TriMesh& mesh, const Eigen::VectorXd& u, const MetricOptions& opts) {
  return metric_from_hessians(mesh, recover_hessian(mesh, u, opts.smoothing), opts);
}

double hole_beta(double gap, double max_sqrt_det) {
  return 1.0 / (std::exp(4.0 * gap) - 1.0 + 2.0 / max_sqrt_det);
}

MetricField hole_adjusted_metric(const MetricField& metric, const TriMesh& mesh, const std::vector<Curve>& holes) {
  MetricField out = metric;
  if (holes.empty()) return out;
  const double m = metric.max_sqrt_det();
  out.sigma = 0.0;
  for (int k = 0; k < mesh.num_triangles(); ++k) {
    const Vec2 c = mesh.centroid(k);
    double beta = 0.0;
    for (const auto& h : holes) beta += hole_beta(h.distance(c), m);
    out.M[k] += beta * Mat2::Identity();
    out.sigma += mesh.signed_area(k) * std::sqrt(out.M[k].determinant());
  }
  return out;
}

std::vector<Mat2> vertex_metrics(const TriMesh& mesh, const MetricField& metric) {
  const auto& vt = mesh.topology().vertex_triangles;
  std::vector<Mat2> out(mesh.num_vertices(), Mat2::Identity());
  for (int i = 0; i < mesh.num_vertices(); ++i) {
    if (vt[i].empty()) continue;
    Mat2 acc = Mat2::Zero();
    for (int k : vt[i]) acc += metric.M[k];
    out[i] = acc / static_cast<double>(vt[i].size());
  }
  return out;
}

}  // namespace mems
