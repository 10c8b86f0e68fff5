#pragma once

#include "mems/core.hpp"
#include "mems/geometry.hpp"
#include "mems/profiles.hpp"

#include <iosfwd>
#include <limits>
#include <string>
#include <vector>

namespace mems {

struct SkeletonBranch {
  std::vector<Vec2> points;
  std::vector<double> distance;        // dist(x, boundary)
  std::vector<int> contributors;       // number of closest-point clusters N
  std::vector<double> mean_curvature;  // mean boundary curvature over the contributors
  std::vector<bool> ring;              // a whole curve is equidistant (disk centre)
};

struct SkeletonSet {
  std::vector<SkeletonBranch> branches;
  double grid_h = 0.0;
  /// The medial axis reaches the boundary (a convex corner exists); arrival is then immediate.
  bool meets_boundary = false;

  int num_vertices() const;
  std::vector<Vec2> vertices() const;
  /// Smallest boundary distance over the vertices, or 0 when the skeleton meets the boundary.
  double min_distance() const;
  double max_distance() const;
};

struct SkeletonOptions {
  double prune_angle_deg = 25.0;
};

/// Ridge set of the boundary-distance field sampled on a grid of spacing grid_h, thinned to
/// one-pixel curves and traced into polylines.
SkeletonSet compute_skeleton(const Domain& domain, double grid_h, const SkeletonOptions& opts = {});

/// Level set {dist(x, boundary) = dist} contoured on the background grid.
std::vector<std::vector<Vec2>> firefront(const Domain& domain, double dist, double grid_h);

/// Smallest t with z0 phi(t; eps) reaching the skeleton.
double arrival_time(const SkeletonSet& skeleton, double eps, double z0);

enum class Regime { PreSkeleton, OnSkeleton };

struct PredictedPoint {
  Vec2 point;
  double distance = 0.0;
  double mean_curvature = 0.0;
  int contributors = 0;
  double score = 0.0;  // predicted minimum value; lower ranks first
  bool ring = false;   // degenerate: the candidate stands for a whole ring of points
};

struct TouchdownPrediction {
  Regime regime = Regime::OnSkeleton;
  std::vector<PredictedPoint> points;  // ranked
  double t_s = std::numeric_limits<double>::infinity();  // infinity when the skeleton is never reached
  double t_estimate = kQuenchTime;
  double target_distance = 0.0;  // z0 phi(T_estimate)
  bool ring = false;
};

struct PredictOptions {
  double grid_h = 0.01;
  double t_estimate = kQuenchTime;
};

TouchdownPrediction predict_touchdown(const Domain& domain, const SkeletonSet& skeleton, double eps,
                                      const ProfileConstants& constants, const PredictOptions& opts = {});
TouchdownPrediction predict_touchdown(const Domain& domain, double eps, const ProfileConstants& constants,
                                      const PredictOptions& opts = {});

/// Distance from x to the nearest skeleton vertex.
double distance_to_skeleton(const SkeletonSet& skeleton, const Vec2& x);

void write_skeleton_csv(std::ostream& out, const SkeletonSet& skeleton);
void write_polylines_csv(std::ostream& out, const std::vector<std::vector<Vec2>>& lines, const Domain& domain);
void write_prediction_report(std::ostream& out, const TouchdownPrediction& p, double eps);

}  // namespace mems
