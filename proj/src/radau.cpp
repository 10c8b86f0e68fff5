#include "mems/radau.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace mems {

namespace {

using CMat = Eigen::SparseMatrix<std::complex<double>>;

// Eigen-structure of A^{-1}: T^{-1} A^{-1} T = [[gamma, 0, 0], [0, a, b], [0, -b, a]].
struct Tableau {
  Eigen::Matrix3d A, Ainv, T, Tinv;
  Eigen::Vector3d c;
  double gamma = 0.0;
  std::complex<double> lambda;  // a + i b
  Eigen::Vector3d dd;           // embedded error weights
};

const Tableau& tableau() {
  static const Tableau tab = [] {
    Tableau t;
    const double s6 = std::sqrt(6.0);
    t.c << (4.0 - s6) / 10.0, (4.0 + s6) / 10.0, 1.0;
    t.A << (88.0 - 7.0 * s6) / 360.0, (296.0 - 169.0 * s6) / 1800.0, (-2.0 + 3.0 * s6) / 225.0,
        (296.0 + 169.0 * s6) / 1800.0, (88.0 + 7.0 * s6) / 360.0, (-2.0 - 3.0 * s6) / 225.0,
        (16.0 - s6) / 36.0, (16.0 + s6) / 36.0, 1.0 / 9.0;
    t.Ainv = t.A.inverse();
    Eigen::EigenSolver<Eigen::Matrix3d> es(t.Ainv);
    int real_idx = 0;
    for (int i = 0; i < 3; ++i)
      if (std::abs(es.eigenvalues()[i].imag()) < std::abs(es.eigenvalues()[real_idx].imag())) real_idx = i;
    int cplx_idx = -1;
    for (int i = 0; i < 3; ++i)
      if (i != real_idx && es.eigenvalues()[i].imag() > 0.0) cplx_idx = i;
    t.gamma = es.eigenvalues()[real_idx].real();
    t.lambda = es.eigenvalues()[cplx_idx];
    t.T.col(0) = es.eigenvectors().col(real_idx).real();
    t.T.col(1) = es.eigenvectors().col(cplx_idx).real();
    t.T.col(2) = es.eigenvectors().col(cplx_idx).imag();
    t.Tinv = t.T.inverse();
    t.dd << -(13.0 + 7.0 * s6) / 3.0, (-13.0 + 7.0 * s6) / 3.0, -1.0 / 3.0;
    return t;
  }();
  return tab;
}

template <class Solver, class Mat>
void factor(Solver& lu, const Mat& A, bool reanalyze) {
  if (reanalyze) lu.analyzePattern(A);
  lu.factorize(A);
}

}  // namespace

const Eigen::Matrix3d& Radau5::butcher_a() { return tableau().A; }
const Eigen::Vector3d& Radau5::nodes() { return tableau().c; }

Radau5::Radau5(RadauOptions opts) : opts_(opts) {}

RadauStep Radau5::step(DaeSystem& sys, double t, const Eigen::VectorXd& y, double h) {
  const Tableau& tab = tableau();
  const int n = sys.size();
  RadauStep out;
  const double uround = std::numeric_limits<double>::epsilon();
  const double fnewt = std::max(10.0 * uround / opts_.rtol, std::min(0.03, std::sqrt(opts_.rtol)));

  Eigen::VectorXd f0;
  if (!sys.rhs(t, y, &f0)) return out;
  const Eigen::SparseMatrix<double> J = sys.jacobian(t, y);
  std::array<Eigen::SparseMatrix<double>, 3> Ms;
  for (int i = 0; i < 3; ++i) Ms[i] = sys.mass(t + tab.c[i] * h);
  const Eigen::SparseMatrix<double>& Mh = Ms[2];

  Eigen::SparseMatrix<double> E1 = (tab.gamma / h) * Mh - J;
  CMat E2 = (std::conj(tab.lambda) / h) * Mh.cast<std::complex<double>>() - J.cast<std::complex<double>>();
  E1.makeCompressed();
  E2.makeCompressed();
  const bool same_pattern = pattern_n_ == E1.rows() && pattern_nnz_ == E1.nonZeros();
  factor(lu_real_, E1, !same_pattern);
  factor(lu_complex_, E2, !same_pattern);
  if (lu_real_.info() != Eigen::Success || lu_complex_.info() != Eigen::Success) {
    pattern_n_ = -1;
    return out;
  }
  pattern_n_ = E1.rows();
  pattern_nnz_ = E1.nonZeros();

  Eigen::VectorXd scal = opts_.atol + opts_.rtol * y.array().abs();
  auto scaled_norm = [&](const Eigen::MatrixXd& Z) {
    double s = 0.0;
    for (int j = 0; j < Z.cols(); ++j) s += (Z.col(j).array() / scal.array()).square().sum();
    return std::sqrt(s / (static_cast<double>(Z.size())));
  };

  Eigen::MatrixXd Z = Eigen::MatrixXd::Zero(n, 3), F(n, 3), G(n, 3), R(n, 3), dW(n, 3);
  if (zprev_.rows() == n && t == tprev_end_ && hprev_ > 0.0) {
    // Start from the previous collocation polynomial, extrapolated past its step.
    const std::array<double, 4> s = {0.0, tab.c[0], tab.c[1], 1.0};
    auto poly = [&](double x) {
      Eigen::VectorXd p = Eigen::VectorXd::Zero(n);
      for (int j = 1; j < 4; ++j) {
        double l = 1.0;
        for (int m = 0; m < 4; ++m)
          if (m != j) l *= (x - s[m]) / (s[j] - s[m]);
        p += l * zprev_.col(j - 1);
      }
      return p;
    };
    const Eigen::VectorXd p1 = zprev_.col(2);
    for (int i = 0; i < 3; ++i) Z.col(i) = poly(1.0 + tab.c[i] * h / hprev_) - p1;
  }
  double faccon = std::pow(std::max(faccon_, uround), 0.8);
  double theta = 1.0, dynold = 0.0, thqold = 1.0;
  bool converged = false;
  for (int k = 0; k < opts_.max_newton; ++k) {
    for (int i = 0; i < 3; ++i) {
      Eigen::VectorXd fi;
      if (!sys.rhs(t + tab.c[i] * h, y + Z.col(i), &fi)) return out;
      F.col(i) = fi;
    }
    const Eigen::MatrixXd D = Z * tab.Ainv.transpose() / h;  // stage derivatives
    for (int i = 0; i < 3; ++i) G.col(i) = Ms[i] * D.col(i) - F.col(i);
    R = G * tab.Tinv.transpose();
    dW.col(0) = lu_real_.solve(-R.col(0));
    const Eigen::VectorXcd rc = -(R.col(1).cast<std::complex<double>>() +
                                  std::complex<double>(0.0, 1.0) * R.col(2).cast<std::complex<double>>());
    const Eigen::VectorXcd w = lu_complex_.solve(rc);
    dW.col(1) = w.real();
    dW.col(2) = w.imag();
    const Eigen::MatrixXd dZ = dW * tab.T.transpose();
    if (!dZ.allFinite()) return out;
    const double dyno = scaled_norm(dZ);
    out.newton_iters = k + 1;
    if (k >= 1) {
      const double thq = dyno / dynold;
      theta = (k == 1) ? thq : std::sqrt(thq * thqold);
      thqold = thq;
      if (theta >= 0.99) return out;
      faccon = theta / (1.0 - theta);
      const double dyth = faccon * dyno * std::pow(theta, opts_.max_newton - 1 - k) / fnewt;
      if (dyth >= 1.0) return out;
    }
    dynold = std::max(dyno, uround);
    Z += dZ;
    if (faccon * dyno <= fnewt) {
      converged = true;
      break;
    }
  }
  if (!converged) return out;
  faccon_ = faccon;

  out.y = y + Z.col(2);
  scal = opts_.atol + opts_.rtol * y.array().abs().max(out.y.array().abs());
  const Eigen::VectorXd F2 = Z * tab.dd / h;
  // M at the step start, consistent with f0 = f(t, y): the estimate then stays
  // free of O(h) mass-variation terms on moving meshes.
  const Eigen::VectorXd MF2 = sys.mass(t) * F2;
  Eigen::VectorXd e = lu_real_.solve(f0 + MF2);
  const Eigen::VectorXd mask = sys.error_mask();
  auto err_norm = [&](const Eigen::VectorXd& v) {
    if (mask.size() == 0) return std::sqrt((v.array() / scal.array()).square().mean());
    const double cnt = std::max(mask.sum(), 1.0);
    return std::sqrt(((v.array() / scal.array()).square() * mask.array()).sum() / cnt);
  };
  double err = err_norm(e);
  if (err >= 1.0) {
    // Second estimate, which damps the stiff components.
    Eigen::VectorXd f1;
    if (sys.rhs(t, y + e, &f1)) {
      e = lu_real_.solve(f1 + MF2);
      err = err_norm(e);
    }
  }
  if (!std::isfinite(err)) return out;
  out.converged = true;
  out.err = std::max(err, 1e-10);
  const double fac = std::min(opts_.safety, opts_.safety * (2 * opts_.max_newton + 1) /
                                                (out.newton_iters + 2 * opts_.max_newton));
  double quot = std::clamp(std::pow(out.err, 0.25) / fac, 1.0 / opts_.fac_max, 1.0 / opts_.fac_min);
  if (out.err <= 1.0) {
    // Gustafsson's predictive controller, using the previous accepted step.
    if (hacc_ > 0.0) {
      const double facgus = std::clamp(hacc_ / h * std::pow(out.err * out.err / erracc_, 0.25) / opts_.safety,
                                       1.0 / opts_.fac_max, 1.0 / opts_.fac_min);
      quot = std::max(quot, facgus);
    }
    hacc_ = h;
    erracc_ = std::max(1e-2, out.err);
    zprev_ = Z;
    hprev_ = h;
    tprev_end_ = t + h;
  }
  out.factor = 1.0 / quot;
  return out;
}

IntegrateResult radau_integrate(DaeSystem& sys, double t0, double t1, const Eigen::VectorXd& y0,
                                const IntegrateOptions& iopts, const RadauOptions& ropts) {
  Radau5 radau(ropts);
  IntegrateResult res;
  res.t = t0;
  res.y = y0;
  double h = iopts.h0;
  int halvings = 0;
  bool last_rejected = false;
  while (res.t < t1 - 1e-14 * std::max(1.0, std::abs(t1))) {
    if (res.steps + res.rejected >= iopts.max_steps) throw SolveError("radau_integrate: step limit reached");
    double hs = std::min(h, t1 - res.t);
    if (iopts.max_step) hs = std::min(hs, iopts.max_step(res.t, res.y));
    if (hs < iopts.h_min) throw SolveError("radau_integrate: step size underflow");
    RadauStep s = radau.step(sys, res.t, res.y, hs);
    if (!s.converged) {
      if (++halvings > iopts.max_halvings) throw NewtonDivergence("Newton iteration failed after repeated halving");
      h = 0.5 * hs;
      ++res.rejected;
      last_rejected = true;
      continue;
    }
    halvings = 0;
    if (iopts.fixed_step || s.err <= 1.0) {
      res.t += hs;
      res.y = s.y;
      ++res.steps;
      res.last_h = hs;
      h = iopts.fixed_step ? iopts.h0 : hs * (last_rejected ? std::min(1.0, s.factor) : s.factor);
      last_rejected = false;
      if (iopts.stop && iopts.stop(res.t, res.y)) {
        res.stopped = true;
        break;
      }
    } else {
      h = hs * std::min(1.0, s.factor);
      ++res.rejected;
      last_rejected = true;
    }
  }
  return res;
}

Eigen::SparseMatrix<double> OdeSystem::mass(double) {
  Eigen::SparseMatrix<double> I(n_, n_);
  I.setIdentity();
  return I;
}

bool OdeSystem::rhs(double t, const Eigen::VectorXd& y, Eigen::VectorXd* f) {
  *f = f_(t, y);
  return f->allFinite();
}

Eigen::SparseMatrix<double> OdeSystem::jacobian(double t, const Eigen::VectorXd& y) {
  return j_(t, y).sparseView(0.0, 0.0);
}

double zero_d_quench_time(double u_stop, double rtol, double atol) {
  OdeSystem ode(
      1,
      [](double, const Eigen::VectorXd& y) {
        Eigen::VectorXd f(1);
        f[0] = 1.0 + y[0] > 0.0 ? -1.0 / ((1.0 + y[0]) * (1.0 + y[0])) : std::numeric_limits<double>::quiet_NaN();
        return f;
      },
      [](double, const Eigen::VectorXd& y) {
        Eigen::MatrixXd j(1, 1);
        j(0, 0) = 2.0 / std::pow(1.0 + y[0], 3);
        return j;
      });
  IntegrateOptions io;
  io.h0 = 1e-4;
  io.max_step = [](double, const Eigen::VectorXd& y) { return 0.1 * std::pow(std::max(1.0 + y[0], 0.0), 3); };
  io.stop = [u_stop](double, const Eigen::VectorXd& y) { return 1.0 + y[0] <= u_stop; };
  RadauOptions ro;
  ro.rtol = rtol;
  ro.atol = atol;
  const IntegrateResult r = radau_integrate(ode, 0.0, 1.0, Eigen::VectorXd::Zero(1), io, ro);
  if (!r.stopped) throw SolveError("zero_d_quench_time: quench not reached");
  return r.t;
}

}  // namespace mems
