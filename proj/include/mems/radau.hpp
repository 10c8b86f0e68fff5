#pragma once

#include "mems/core.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include <array>
#include <complex>
#include <functional>
#include <limits>
#include <memory>

namespace mems {

/// Problem interface for the linearly implicit form  Mass(t) y' = f(t, y).
/// Algebraic components have zero rows in the mass matrix (index-1 DAEs).
class DaeSystem {
 public:
  virtual ~DaeSystem() = default;
  virtual int size() const = 0;
  virtual Eigen::SparseMatrix<double> mass(double t) = 0;
  /// Returns false when y is outside the admissible set (the step is then rejected).
  virtual bool rhs(double t, const Eigen::VectorXd& y, Eigen::VectorXd* f) = 0;
  virtual Eigen::SparseMatrix<double> jacobian(double t, const Eigen::VectorXd& y) = 0;
  /// Per-component weight in the local error test (1 = tested, 0 = excluded). Empty means all.
  virtual Eigen::VectorXd error_mask() const { return {}; }
};

struct RadauOptions {
  double rtol = 1e-6;
  double atol = 1e-8;
  int max_newton = 7;
  double safety = 0.9;
  double fac_min = 0.2;  // smallest step ratio after a rejection
  double fac_max = 8.0;  // largest step ratio after an acceptance
};

struct RadauStep {
  bool converged = false;  // Newton converged (and every stage was admissible)
  double err = 0.0;        // scaled local error estimate (accept when <= 1)
  double factor = 1.0;     // proposed h_new / h
  int newton_iters = 0;
  Eigen::VectorXd y;       // solution at t + h (valid when converged)
};

/// Three-stage Radau IIA collocation (order 5) with simplified Newton iterations on the
/// eigen-decomposed stage system and the classical embedded error estimate.
class Radau5 {
 public:
  explicit Radau5(RadauOptions opts = {});

  /// One attempt of size h from (t, y).
  RadauStep step(DaeSystem& sys, double t, const Eigen::VectorXd& y, double h);

  const RadauOptions& options() const { return opts_; }

  static const Eigen::Matrix3d& butcher_a();
  static const Eigen::Vector3d& nodes();

 private:
  RadauOptions opts_;
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu_real_;
  Eigen::SparseLU<Eigen::SparseMatrix<std::complex<double>>> lu_complex_;
  Eigen::Index pattern_nnz_ = -1;
  Eigen::Index pattern_n_ = -1;
  double faccon_ = 1.0;  // Newton contraction estimate carried between steps
  double hacc_ = 0.0;    // last accepted step and its error, for step prediction
  double erracc_ = 1e-2;
  Eigen::MatrixXd zprev_;  // stages of the last accepted step, for the Newton starting guess
  double hprev_ = 0.0;
  double tprev_end_ = std::numeric_limits<double>::quiet_NaN();
};

struct IntegrateResult {
  double t = 0.0;
  Eigen::VectorXd y;
  int steps = 0;
  int rejected = 0;
  double last_h = 0.0;
  bool stopped = false;  // the stop predicate fired
};

struct IntegrateOptions {
  double h0 = 1e-4;
  double h_min = 1e-14;
  bool fixed_step = false;  // take uniform steps of h0, no error control
  int max_steps = 1000000;
  int max_halvings = 10;    // consecutive Newton failures before giving up
  std::function<double(double, const Eigen::VectorXd&)> max_step;  // optional cap
  std::function<bool(double, const Eigen::VectorXd&)> stop;        // optional early exit
};

/// Adaptive (or fixed-step) integration over [t0, t1].
IntegrateResult radau_integrate(DaeSystem& sys, double t0, double t1, const Eigen::VectorXd& y0,
                                const IntegrateOptions& iopts = {}, const RadauOptions& ropts = {});

/// Plain ODE y' = f(t, y) with identity mass, for small problems and tests.
class OdeSystem : public DaeSystem {
 public:
  using Rhs = std::function<Eigen::VectorXd(double, const Eigen::VectorXd&)>;
  using Jac = std::function<Eigen::MatrixXd(double, const Eigen::VectorXd&)>;
  OdeSystem(int n, Rhs f, Jac j) : n_(n), f_(std::move(f)), j_(std::move(j)) {}
  int size() const override { return n_; }
  Eigen::SparseMatrix<double> mass(double) override;
  bool rhs(double t, const Eigen::VectorXd& y, Eigen::VectorXd* f) override;
  Eigen::SparseMatrix<double> jacobian(double t, const Eigen::VectorXd& y) override;

 private:
  int n_;
  Rhs f_;
  Jac j_;
};

/// 0-D quench problem du/dt = -(1 + u)^{-2}, u(0) = 0, integrated until 1 + u <= u_stop.
/// Returns the time reached; the exact quench time is 1/3.
double zero_d_quench_time(double u_stop = 1e-3, double rtol = 1e-10, double atol = 1e-12);

}  // namespace mems
