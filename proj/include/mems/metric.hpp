#pragma once

#include "mems/core.hpp"
#include "mems/geometry.hpp"
#include "mems/mesh.hpp"

#include <limits>
#include <vector>

namespace mems {

/// Per-element SPD metric tensors.
struct MetricField {
  std::vector<Mat2> M;
  double alpha = std::numeric_limits<double>::infinity();
  double sigma = 0.0;  // sum_K |K| sqrt(det M_K)
  bool fallback = false;

  std::vector<double> sqrt_det() const;
  double max_sqrt_det() const;
};

struct MetricOptions {
  bool smoothing = true;
  double tolerance = 1e-6;  // normalization residual relative to |Omega|
};

/// Symmetric absolute value V |Lambda| V^T.
Mat2 abs_sym(const Mat2& H);

/// Least-squares quadratic fit per vertex (1-ring, 2-ring when rank deficient).
std::vector<Mat2> recover_vertex_hessians(const TriMesh& mesh, const Eigen::VectorXd& u);
/// Per-element Hessians: optional Jacobi smoothing of vertex values, then element averages.
std::vector<Mat2> recover_hessian(const TriMesh& mesh, const Eigen::VectorXd& u, bool smoothing = true);

/// M_K = det(I + |H_K|/alpha)^{-1/6} (I + |H_K|/alpha) for a fixed alpha.
Mat2 metric_from_hessian(const Mat2& H, double alpha);
/// Chooses alpha so that sum_K |K| sqrt(det M_K) = 2 sum_K |K|.
MetricField metric_from_hessians(const TriMesh& mesh, const std::vector<Mat2>& H,
                                 const MetricOptions& opts = {});
MetricField metric_tensor(const TriMesh& mesh, const Eigen::VectorXd& u, const MetricOptions& opts = {});

/// Concentration term for one hole at boundary gap g = rho - R.
double hole_beta(double gap, double max_sqrt_det);
/// Adds sum over holes of beta(centroid) * I to every element metric.
MetricField hole_adjusted_metric(const MetricField& metric, const TriMesh& mesh, const std::vector<Curve>& holes);

/// Vertex metric: average over the adjacent elements.
std::vector<Mat2> vertex_metrics(const TriMesh& mesh, const MetricField& metric);

}  // namespace mems
