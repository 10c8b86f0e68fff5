#include "mems/profiles.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <ostream>
#include <sstream>

namespace mems {

double outer_u0(double t) {
  if (!(t >= 0.0) || t >= kQuenchTime) throw DomainError("outer_u0: t must lie in [0, 1/3)");
  return -1.0 + std::cbrt(1.0 - 3.0 * t);
}

double outer_u0_dt(double t) {
  if (!(t >= 0.0) || t >= kQuenchTime) throw DomainError("outer_u0_dt: t must lie in [0, 1/3)");
  const double c = std::cbrt(1.0 - 3.0 * t);
  return -1.0 / (c * c);
}

double phi(double t, double eps) {
  if (!(eps > 0.0)) throw DomainError("phi: eps must be positive");
  if (!(t >= 0.0) || t > kQuenchTime) throw DomainError("phi: t must lie in [0, 1/3]");
  const double f = 1.0 - std::cbrt(std::max(0.0, 1.0 - 3.0 * t));
  return std::sqrt(eps) * std::pow(f, 0.25);
}

double wkb_rate_exact() { return 3.0 * std::pow(2.0, -11.0 / 3.0); }

double LayerProfile::eval(double zq, int k) const {
  if (k < 0 || k > 3) throw DomainError("LayerProfile::eval: derivative order must be 0..3");
  if (zq >= z.back()) return k == 0 ? far_field_limit : 0.0;
  if (zq < 0.0) zq = 0.0;
  const double h = z[1] - z[0];
  std::size_t i = static_cast<std::size_t>(zq / h);
  i = std::min(i, z.size() - 2);
  const double t = (zq - z[i]) / h;
  const double t2 = t * t, t3 = t2 * t;
  const double h00 = 2 * t3 - 3 * t2 + 1, h10 = t3 - 2 * t2 + t;
  const double h01 = -2 * t3 + 3 * t2, h11 = t3 - t2;
  return h00 * y[i][k] + h10 * h * y[i][k + 1] + h01 * y[i + 1][k] + h11 * h * y[i + 1][k + 1];
}

namespace {

using Mat4 = Eigen::Matrix4d;
using Vec4 = Eigen::Vector4d;

struct LinearBvp {
  // y' = A(z) y + b(z) for y = (w, w', w'', w''').
  std::function<Mat4(double)> A;
  std::function<Vec4(double, int, bool)> b;  // z, interval index, is-midpoint
  // Two boundary rows at z = 0 and two at z = L: (coefficient row, value).
  std::array<std::pair<Vec4, double>, 2> left, right;
};

Mat4 layer_matrix(double z, double c0) {
  Mat4 A = Mat4::Zero();
  A(0, 1) = A(1, 2) = A(2, 3) = 1.0;
  A(3, 0) = -c0;
  A(3, 1) = 0.25 * z;
  return A;
}

// Hermite-Simpson collocation on a uniform grid; returns nodal states.
std::vector<Vec4> solve_bvp(const LinearBvp& p, double L, int n) {
  const double h = L / n;
  const int N = 4 * (n + 1);
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<std::size_t>(n) * 40 + 16);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(N);
  int row = 0;
  for (const auto& [c, v] : p.left) {
    for (int j = 0; j < 4; ++j)
      if (c[j] != 0.0) trip.emplace_back(row, j, c[j]);
    rhs[row++] = v;
  }
  const Mat4 I = Mat4::Identity();
  for (int i = 0; i < n; ++i) {
    const double zi = i * h, zp = zi + h, zm = zi + 0.5 * h;
    const Mat4 Ai = p.A(zi), Ap = p.A(zp), Am = p.A(zm);
    const Vec4 bi = p.b(zi, i, false), bp = p.b(zp, i + 1, false), bm = p.b(zm, i, true);
    const Mat4 Ci = -I - h / 6.0 * (Ai + 4.0 * Am * (0.5 * I + h / 8.0 * Ai));
    const Mat4 Cp = I - h / 6.0 * (Ap + 4.0 * Am * (0.5 * I - h / 8.0 * Ap));
    const Vec4 r = h / 6.0 * (bi + 4.0 * (Am * (h / 8.0) * (bi - bp) + bm) + bp);
    for (int a = 0; a < 4; ++a) {
      for (int c = 0; c < 4; ++c) {
        if (Ci(a, c) != 0.0) trip.emplace_back(row + a, 4 * i + c, Ci(a, c));
        if (Cp(a, c) != 0.0) trip.emplace_back(row + a, 4 * (i + 1) + c, Cp(a, c));
      }
      rhs[row + a] = r[a];
    }
    row += 4;
  }
  for (const auto& [c, v] : p.right) {
    for (int j = 0; j < 4; ++j)
      if (c[j] != 0.0) trip.emplace_back(row, 4 * n + j, c[j]);
    rhs[row++] = v;
  }
  Eigen::SparseMatrix<double> K(N, N);
  K.setFromTriplets(trip.begin(), trip.end());
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  lu.compute(K);
  if (lu.info() != Eigen::Success) throw SolveError("boundary-layer BVP: singular collocation system");
  Eigen::VectorXd sol = lu.solve(rhs);
  if (lu.info() != Eigen::Success || !sol.allFinite())
    throw SolveError("boundary-layer BVP: linear solve failed");
  std::vector<Vec4> out(n + 1);
  for (int i = 0; i <= n; ++i) out[i] = sol.segment<4>(4 * i);
  return out;
}

Vec4 unit(int j) {
  Vec4 v = Vec4::Zero();
  v[j] = 1.0;
  return v;
}

}  // namespace

LayerProfile solve_w0(double L, int n) {
  if (!(L > 0.0) || n < 8) throw DomainError("solve_w0: need L > 0 and n >= 8");
  LinearBvp p;
  p.A = [](double z) { return layer_matrix(z, 1.0); };
  p.b = [](double, int, bool) { return Vec4(0.0, 0.0, 0.0, -1.0); };
  p.left = {{{unit(0), 0.0}, {unit(2), 0.0}}};
  p.right = {{{unit(0), -1.0}, {unit(1), 0.0}}};
  const auto Y = solve_bvp(p, L, n);
  LayerProfile out;
  out.far_field_limit = -1.0;
  const double h = L / n;
  for (int i = 0; i <= n; ++i) {
    const double z = i * h;
    const Vec4& v = Y[i];
    out.z.push_back(z);
    out.y.push_back({v[0], v[1], v[2], v[3], 0.25 * z * v[1] - v[0] - 1.0});
  }
  return out;
}

LayerProfile solve_w1bar(const LayerProfile& w0) {
  const int n = static_cast<int>(w0.z.size()) - 1;
  const double L = w0.length();
  const double h = L / n;
  // Forcing 2 w0''' at nodes and at the Hermite-Simpson midpoints of the w0 solve.
  auto w0_state = [&](int i) { return Vec4(w0.y[i][0], w0.y[i][1], w0.y[i][2], w0.y[i][3]); };
  auto w0_mid3 = [&](int i) {
    const Vec4 fi(w0.y[i][1], w0.y[i][2], w0.y[i][3], w0.y[i][4]);
    const Vec4 fp(w0.y[i + 1][1], w0.y[i + 1][2], w0.y[i + 1][3], w0.y[i + 1][4]);
    const Vec4 m = 0.5 * (w0_state(i) + w0_state(i + 1)) + h / 8.0 * (fi - fp);
    return m[3];
  };
  LinearBvp p;
  p.A = [](double z) { return layer_matrix(z, 1.25); };
  p.b = [&](double, int i, bool mid) {
    return Vec4(0.0, 0.0, 0.0, 2.0 * (mid ? w0_mid3(i) : w0.y[i][3]));
  };
  p.left = {{{unit(0), 0.0}, {unit(2), w0.y[0][1]}}};
  p.right = {{{unit(0), 0.0}, {unit(1), 0.0}}};
  const auto Y = solve_bvp(p, L, n);
  LayerProfile out;
  out.far_field_limit = 0.0;
  for (int i = 0; i <= n; ++i) {
    const double z = i * h;
    const Vec4& v = Y[i];
    out.z.push_back(z);
    out.y.push_back({v[0], v[1], v[2], v[3], 0.25 * z * v[1] - 1.25 * v[0] + 2.0 * w0.y[i][3]});
  }
  return out;
}

ProfileConstants extract_constants(const LayerProfile& w0, const LayerProfile& w1bar) {
  std::size_t imin = 0;
  for (std::size_t i = 1; i < w0.z.size(); ++i)
    if (w0.y[i][0] < w0.y[imin][0]) imin = i;
  // Newton on w0'(z) = 0 starting at the discrete minimizer.
  double z = w0.z[imin];
  for (int it = 0; it < 50; ++it) {
    const double d = w0.eval(z, 1) / w0.eval(z, 2);
    z -= d;
    if (std::abs(d) < 1e-14) break;
  }
  ProfileConstants c;
  c.z0 = z;
  c.w0_at_z0 = w0.eval(z, 0);
  c.w0_pp_at_z0 = w0.eval(z, 2);
  c.w1bar_at_z0 = w1bar.eval(z, 0);
  c.w1bar_p_at_z0 = w1bar.eval(z, 1);
  c.alpha = -c.w1bar_p_at_z0 / c.w0_pp_at_z0;
  c.w0_p_at_0 = w0.y[0][1];
  c.wkb_rate = wkb_rate_exact();
  return c;
}

Profiles solve_profiles(double L, int n) {
  Profiles p;
  p.L = L;
  p.n = n;
  p.w0 = solve_w0(L, n);
  p.w1bar = solve_w1bar(p.w0);
  p.constants = extract_constants(p.w0, p.w1bar);
  return p;
}

void save_profiles(const Profiles& p, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write profile cache " + path);
  out << "# mems-profiles v1\n" << std::setprecision(17) << p.L << ' ' << p.n << '\n';
  for (const LayerProfile* lp : {&p.w0, &p.w1bar}) {
    out << lp->far_field_limit << '\n';
    for (std::size_t i = 0; i < lp->z.size(); ++i) {
      out << lp->z[i];
      for (double v : lp->y[i]) out << ' ' << v;
      out << '\n';
    }
  }
}

Profiles load_profiles(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read profile cache " + path);
  std::string header;
  std::getline(in, header);
  if (header != "# mems-profiles v1") throw Error("profile cache " + path + ": bad header");
  Profiles p;
  in >> p.L >> p.n;
  for (LayerProfile* lp : {&p.w0, &p.w1bar}) {
    in >> lp->far_field_limit;
    lp->z.resize(p.n + 1);
    lp->y.resize(p.n + 1);
    for (int i = 0; i <= p.n; ++i) {
      in >> lp->z[i];
      for (double& v : lp->y[i]) in >> v;
    }
  }
  if (!in) throw Error("profile cache " + path + ": truncated");
  p.constants = extract_constants(p.w0, p.w1bar);
  return p;
}

Profiles load_or_solve_profiles(const std::string& dir, double L, int n) {
  std::ostringstream name;
  name << "profiles_L" << L << "_n" << n << ".txt";
  const std::filesystem::path path = std::filesystem::path(dir) / name.str();
  if (std::filesystem::exists(path)) {
    try {
      return load_profiles(path.string());
    } catch (const Error&) {
      // Stale or corrupt cache: fall through and rebuild.
    }
  }
  Profiles p = solve_profiles(L, n);
  std::filesystem::create_directories(dir);
  save_profiles(p, path.string());
  return p;
}

void write_profile_csv(std::ostream& out, const LayerProfile& p, const std::string& name) {
  out << "# mems-profile v1 (" << name << ")\n";
  out << "z," << name << '\n';
  out << std::setprecision(12);
  for (std::size_t i = 0; i < p.z.size(); ++i) out << p.z[i] << ',' << p.y[i][0] << '\n';
}

double fit_wkb_decay(const LayerProfile& w0, double z_lo, double z_hi) {
  // Extrema of w0 + 1 are the zeros of w0'.
  std::vector<double> zs, ls;
  for (std::size_t i = 0; i + 1 < w0.z.size(); ++i) {
    const double a = w0.z[i], b = w0.z[i + 1];
    if (b < z_lo || a > z_hi) continue;
    const double fa = w0.y[i][1], fb = w0.y[i + 1][1];
    if (fa == 0.0 || fa * fb >= 0.0) continue;
    double z = a - fa * (b - a) / (fb - fa);
    for (int it = 0; it < 30; ++it) {
      const double d = w0.eval(z, 1) / w0.eval(z, 2);
      z = std::clamp(z - d, a, b);
      if (std::abs(d) < 1e-15) break;
    }
    if (z < z_lo || z > z_hi) continue;
    zs.push_back(z);
    ls.push_back(-std::log(std::abs(w0.eval(z, 0) + 1.0)));
  }
  if (zs.size() < 4) throw SolveError("fit_wkb_decay: too few envelope peaks in the window");
  Eigen::MatrixXd X(zs.size(), 3);
  Eigen::VectorXd yv(zs.size());
  for (std::size_t i = 0; i < zs.size(); ++i) {
    X(i, 0) = std::pow(zs[i], 4.0 / 3.0);
    X(i, 1) = std::log(zs[i]);
    X(i, 2) = 1.0;
    yv[i] = ls[i];
  }
  const Eigen::VectorXd coef = X.colPivHouseholderQr().solve(yv);
  return coef[0];
}

double composite_solution(const Domain& domain, const Profiles& profiles, const Vec2& x, double t,
                          double eps, double rel_tol) {
  const double u0 = outer_u0(t);
  const double ph = phi(t, eps);
  if (ph <= 0.0) return u0;
  if (ph * profiles.w0.length() < domain.boundary_distance(x)) return u0;
  const ClosestPoints cps = domain.closest_boundary_points(x, rel_tol);
  double sum = 0.0;
  for (const auto& bp : cps.points) {
    const double z = (x - bp.location).norm() / ph;
    sum += 1.0 + profiles.w0(z) + ph * bp.curvature * profiles.w1bar(z);
  }
  return u0 - u0 * sum;
}

double predicted_min_shift(const std::vector<double>& kappas, double phi_value, const ProfileConstants& c) {
  if (kappas.empty()) throw DomainError("predicted_min_shift: need at least one curvature");
  double m = 0.0;
  for (double k : kappas) m += k;
  m /= static_cast<double>(kappas.size());
  return c.z0 - c.alpha * phi_value * m;
}

double predicted_min_value(const std::vector<double>& kappas, double t, double eps, const ProfileConstants& c) {
  const double u0 = outer_u0(std::min(t, std::nextafter(kQuenchTime, 0.0)));
  const double ph = phi(t, eps);
  double sum = 0.0;
  for (double k : kappas) sum += 1.0 + c.w0_at_z0 + ph * k * c.w1bar_at_z0;
  return u0 - u0 * sum;
}

}  // namespace mems
