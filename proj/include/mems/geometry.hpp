#pragma once

#include "mems/core.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace mems {

enum class CurveKind { Polygon, Circle, Polar };

/// One Fourier term of a polar boundary r(theta) = a0 + sum(a_k cos k theta + b_k sin k theta).
struct PolarTerm {
  int k = 0;
  double cos_coeff = 0.0;
  double sin_coeff = 0.0;
};

struct CurveSample {
  Vec2 point;
  Vec2 tangent;
  Vec2 inward_normal;
  double curvature = 0.0;
  double arc_length = 0.0;
};

/// A closed boundary curve oriented so that the domain lies on its left:
/// outer boundaries run counterclockwise, holes clockwise. Curvature is the
/// signed curvature of that orientation, so a convex bulge of the domain has
/// kappa > 0 and a circular hole of radius R has kappa = -1/R.
///
/// Polygons and circles answer distance queries exactly. Polar curves are
/// represented by a dense polyline through exact samples of r(theta).
class Curve {
 public:
  static Curve polygon(std::vector<Vec2> vertices, bool hole);
  static Curve circle(Vec2 center, double radius, bool hole);
  static Curve polar(Vec2 center, double mean_radius, std::vector<PolarTerm> terms, bool hole,
                     int samples = 4096);

  CurveKind kind() const { return kind_; }
  bool is_hole() const { return hole_; }
  double length() const { return length_; }

  // Circle data (only meaningful for circles).
  const Vec2& center() const { return center_; }
  double radius() const { return radius_; }

  Vec2 point_at(double s) const;
  Vec2 tangent_at(double s) const;
  Vec2 inward_normal_at(double s) const;
  /// Signed curvature at arc-length s. NaN exactly at a polygon corner.
  double curvature_at(double s) const;

  /// Arc-length positions of polygon corners (empty for smooth curves).
  const std::vector<double>& corners() const { return corner_s_; }
  bool is_corner(double s, double tol = 1e-12) const;

  /// Dense arc-length ordered sample table, closed (last sample repeats the first).
  const std::vector<CurveSample>& samples() const { return samples_; }
  double max_sample_spacing() const;

  /// Unsigned distance from x to the curve.
  double distance(const Vec2& x) const;
  /// Closest point on the curve and its arc-length.
  Vec2 closest_point(const Vec2& x, double* s_out = nullptr) const;
  /// Winding number of the curve around x (with the curve's own orientation).
  int winding(const Vec2& x) const;

  double wrap(double s) const;

  // Polyline used for segment-based queries (closed; last point == first point).
  const std::vector<Vec2>& polyline() const { return poly_; }
  const std::vector<double>& polyline_s() const { return poly_s_; }

  // Polar representation accessors (for exact per-theta evaluation).
  double polar_radius(double theta, double* dr = nullptr, double* d2r = nullptr) const;
  /// Polar angle of the sample at arc-length s (polar curves only).
  double theta_at(double s) const;

 private:
  Curve() = default;
  void build_polyline_tables();
  void build_samples(int n);

  CurveKind kind_ = CurveKind::Polygon;
  bool hole_ = false;
  double length_ = 0.0;
  Vec2 center_ = Vec2::Zero();
  double radius_ = 0.0;
  double mean_radius_ = 0.0;
  std::vector<PolarTerm> terms_;
  std::vector<Vec2> poly_;
  std::vector<double> poly_s_;
  std::vector<double> poly_theta_;
  std::vector<double> poly_kappa_;
  std::vector<double> corner_s_;
  std::vector<CurveSample> samples_;
  // Chunk bounding boxes for fast segment distance queries.
  struct Chunk {
    int begin, end;
    Vec2 lo, hi;
  };
  std::vector<Chunk> chunks_;
};

struct BoundaryPoint {
  Vec2 location;
  double arc_length = 0.0;
  double curvature = 0.0;
  Vec2 inward_normal;
  int curve = 0;
  bool corner = false;
};

struct ClosestPoints {
  std::vector<BoundaryPoint> points;
  double distance = 0.0;
  /// Set when a whole curve is (near) equidistant, e.g. the center of a disk.
  bool degenerate = false;
};

class Domain {
 public:
  Domain(Curve outer, std::vector<Curve> holes);

  static Domain rectangle(double x0, double y0, double x1, double y1);
  static Domain disk(Vec2 center, double radius);
  /// Named presets: "rect", "rect-hole", "rect-4holes", "polar-asym".
  static Domain preset(const std::string& name);
  static const std::vector<std::string>& preset_names();
  /// Curve definitions in a line-based text format (see README).
  static Domain parse(std::istream& in);
  static Domain load(const std::string& path);

  const Curve& outer() const { return curves_.front(); }
  std::vector<Curve> holes() const { return {curves_.begin() + 1, curves_.end()}; }
  /// All curves; index 0 is the outer boundary, holes follow.
  const std::vector<Curve>& curves() const { return curves_; }
  const Curve& curve(int id) const { return curves_.at(id); }

  Vec2 bbox_min() const { return lo_; }
  Vec2 bbox_max() const { return hi_; }
  double area() const;
  /// True when the outer boundary is an axis-aligned rectangle with no holes.
  bool is_axis_rectangle() const;

  double boundary_distance(const Vec2& x) const;
  double signed_distance(const Vec2& x) const;
  bool contains(const Vec2& x) const;
  ClosestPoints closest_boundary_points(const Vec2& x, double rel_tol, int cluster_cap = 8) const;

 private:
  std::vector<Curve> curves_;
  Vec2 lo_, hi_;
};

double signed_distance(const Domain& domain, const Vec2& x);
bool contains(const Domain& domain, const Vec2& x);
ClosestPoints closest_boundary_points(const Domain& domain, const Vec2& x, double rel_tol,
                                      int cluster_cap = 8);
double curvature_at(const Curve& curve, double s);

}  // namespace mems
