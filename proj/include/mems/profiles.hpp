#pragma once

#include "mems/core.hpp"
#include "mems/geometry.hpp"

#include <array>
#include <iosfwd>
#include <string>
#include <vector>

namespace mems {

/// Quench time of the spatially flat solution.
inline constexpr double kQuenchTime = 1.0 / 3.0;

/// Flat (outer) solution u0(t) = -1 + (1 - 3t)^{1/3}.
double outer_u0(double t);
double outer_u0_dt(double t);
/// Boundary-layer width phi = eps^{1/2} |u0(t)|^{1/4}.
double phi(double t, double eps);

/// Tabulated solution of a fourth-order boundary-layer ODE on [0, L].
/// Each grid point stores w and its first four derivatives.
struct LayerProfile {
  std::vector<double> z;
  std::vector<std::array<double, 5>> y;
  double far_field_limit = 0.0;

  double length() const { return z.back(); }
  /// k-th derivative (k = 0..3) by cubic Hermite interpolation. Beyond L the
  /// far-field limit (k = 0) or zero (k > 0) is returned.
  double eval(double zq, int k = 0) const;
  double operator()(double zq) const { return eval(zq, 0); }
};

struct ProfileConstants {
  double z0 = 0.0;
  double w0_at_z0 = 0.0;
  double w1bar_at_z0 = 0.0;
  double alpha = 0.0;
  double wkb_rate = 0.0;
  double w0_pp_at_z0 = 0.0;
  double w1bar_p_at_z0 = 0.0;
  double w0_p_at_0 = 0.0;
};

/// WKB far-field decay rate omega = 3 * 2^{-11/3}.
double wkb_rate_exact();

/// w0'''' - (z/4) w0' + w0 = -1, w0(0) = w0''(0) = 0, w0(L) = -1, w0'(L) = 0.
LayerProfile solve_w0(double L = 30.0, int n = 6000);
/// w1'''' - (z/4) w1' + (5/4) w1 = 2 w0''', w1(0) = 0, w1''(0) = w0'(0), w1(L) = w1'(L) = 0.
LayerProfile solve_w1bar(const LayerProfile& w0);
ProfileConstants extract_constants(const LayerProfile& w0, const LayerProfile& w1bar);

struct Profiles {
  LayerProfile w0;
  LayerProfile w1bar;
  ProfileConstants constants;
  double L = 30.0;
  int n = 6000;
};

Profiles solve_profiles(double L = 30.0, int n = 6000);
/// Reads a cached solution keyed by (L, n) from `dir`, solving and writing it when absent.
Profiles load_or_solve_profiles(const std::string& dir, double L = 30.0, int n = 6000);
void save_profiles(const Profiles& p, const std::string& path);
Profiles load_profiles(const std::string& path);

/// Two-column (z, w) CSV with a version comment header.
void write_profile_csv(std::ostream& out, const LayerProfile& p, const std::string& name);

/// Least-squares decay rate of the oscillating tail |w0 + 1| over [z_lo, z_hi].
/// Envelope peaks are regressed on [z^{4/3}, log z, 1]; the z^{4/3} coefficient is returned.
double fit_wkb_decay(const LayerProfile& w0, double z_lo = 8.0, double z_hi = 20.0);

/// Composite asymptotic solution at x from the boundary layers of all nearest boundary points.
double composite_solution(const Domain& domain, const Profiles& profiles, const Vec2& x, double t,
                          double eps, double rel_tol = 1e-6);

/// z_min = z0 - alpha * phi * mean(kappas).
double predicted_min_shift(const std::vector<double>& kappas, double phi_value,
                           const ProfileConstants& c);
/// Predicted trough depth u0 - u0 * sum_j (1 + w0(z0) + phi kappa_j w1bar(z0)).
double predicted_min_value(const std::vector<double>& kappas, double t, double eps,
                           const ProfileConstants& c);

}  // namespace mems
