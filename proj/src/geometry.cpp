#include "mems/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <optional>
#include <sstream>

namespace mems {

namespace {

constexpr int kChunk = 64;

double polyline_signed_area(const std::vector<Vec2>& pts) {
  double a = 0.0;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) a += cross(pts[i], pts[i + 1]);
  return 0.5 * a;
}

double segment_distance_sq(const Vec2& x, const Vec2& a, const Vec2& b, double* t_out) {
  const Vec2 e = b - a;
  const double ee = e.squaredNorm();
  double t = ee > 0.0 ? (x - a).dot(e) / ee : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  if (t_out) *t_out = t;
  return (a + t * e - x).squaredNorm();
}

double box_distance_sq(const Vec2& x, const Vec2& lo, const Vec2& hi) {
  const double dx = std::max({lo.x() - x.x(), 0.0, x.x() - hi.x()});
  const double dy = std::max({lo.y() - x.y(), 0.0, x.y() - hi.y()});
  return dx * dx + dy * dy;
}

Vec2 left_normal(const Vec2& t) { return {-t.y(), t.x()}; }

}  // namespace

// ---------------------------------------------------------------------------
// Curve construction

Curve Curve::polygon(std::vector<Vec2> vertices, bool hole) {
  if (vertices.size() < 3) throw DomainError("polygon needs at least three vertices");
  if ((vertices.front() - vertices.back()).norm() < 1e-14) vertices.pop_back();
  Curve c;
  c.kind_ = CurveKind::Polygon;
  c.hole_ = hole;
  c.poly_ = vertices;
  c.poly_.push_back(vertices.front());
  const double a = polyline_signed_area(c.poly_);
  if (std::abs(a) < 1e-14) throw DomainError("degenerate polygon");
  if ((a < 0.0) != hole) std::reverse(c.poly_.begin(), c.poly_.end());
  c.build_polyline_tables();
  c.corner_s_.assign(c.poly_s_.begin(), c.poly_s_.end() - 1);
  c.build_samples(4096);
  return c;
}

Curve Curve::circle(Vec2 center, double radius, bool hole) {
  if (!(radius > 0.0)) throw DomainError("circle radius must be positive");
  Curve c;
  c.kind_ = CurveKind::Circle;
  c.hole_ = hole;
  c.center_ = center;
  c.radius_ = radius;
  c.length_ = 2.0 * kPi * radius;
  const int n = 4096;
  c.poly_.reserve(n + 1);
  for (int i = 0; i <= n; ++i) c.poly_.push_back(c.point_at(c.length_ * i / n));
  c.poly_.back() = c.poly_.front();
  c.poly_s_.resize(n + 1);
  for (int i = 0; i <= n; ++i) c.poly_s_[i] = c.length_ * i / n;
  c.build_samples(n);
  return c;
}

Curve Curve::polar(Vec2 center, double mean_radius, std::vector<PolarTerm> terms, bool hole,
                   int samples) {
  if (samples < 16) throw DomainError("polar curve needs at least 16 samples");
  Curve c;
  c.kind_ = CurveKind::Polar;
  c.hole_ = hole;
  c.center_ = center;
  c.mean_radius_ = mean_radius;
  c.terms_ = std::move(terms);
  c.poly_.reserve(samples + 1);
  c.poly_theta_.reserve(samples + 1);
  for (int i = 0; i <= samples; ++i) {
    const double th = (hole ? -1.0 : 1.0) * 2.0 * kPi * i / samples;
    const double r = c.polar_radius(th);
    if (!(r > 0.0)) throw DomainError("polar radius must stay positive");
    c.poly_.push_back(center + r * Vec2(std::cos(th), std::sin(th)));
    c.poly_theta_.push_back(th);
  }
  c.poly_.back() = c.poly_.front();
  c.build_polyline_tables();
  c.poly_kappa_.resize(c.poly_.size());
  for (std::size_t i = 0; i < c.poly_.size(); ++i) {
    double dr = 0.0, d2r = 0.0;
    const double r = c.polar_radius(c.poly_theta_[i], &dr, &d2r);
    const double k = (r * r + 2.0 * dr * dr - r * d2r) / std::pow(r * r + dr * dr, 1.5);
    c.poly_kappa_[i] = hole ? -k : k;
  }
  c.build_samples(samples);
  return c;
}

void Curve::build_polyline_tables() {
  const std::size_t n = poly_.size();
  poly_s_.assign(n, 0.0);
  for (std::size_t i = 1; i < n; ++i) poly_s_[i] = poly_s_[i - 1] + (poly_[i] - poly_[i - 1]).norm();
  length_ = poly_s_.back();
  chunks_.clear();
  const int nseg = static_cast<int>(n) - 1;
  for (int b = 0; b < nseg; b += kChunk) {
    Chunk ch{b, std::min(nseg, b + kChunk), poly_[b], poly_[b]};
    for (int i = ch.begin; i <= ch.end; ++i) {
      ch.lo = ch.lo.cwiseMin(poly_[i]);
      ch.hi = ch.hi.cwiseMax(poly_[i]);
    }
    chunks_.push_back(ch);
  }
}

void Curve::build_samples(int n) {
  samples_.clear();
  samples_.reserve(n + 1);
  if (kind_ == CurveKind::Polygon) {
    // Subdivide every edge; corners are always samples.
    const double h = length_ / n;
    for (std::size_t e = 0; e + 1 < poly_.size(); ++e) {
      const double len = poly_s_[e + 1] - poly_s_[e];
      const int m = std::max(1, static_cast<int>(std::ceil(len / h - 1e-9)));
      const Vec2 t = (poly_[e + 1] - poly_[e]) / len;
      for (int j = 0; j < m; ++j) {
        const double f = static_cast<double>(j) / m;
        samples_.push_back({poly_[e] + f * (poly_[e + 1] - poly_[e]), t, left_normal(t), 0.0,
                            poly_s_[e] + f * len});
      }
    }
    CurveSample last = samples_.front();
    last.arc_length = length_;
    samples_.push_back(last);
    return;
  }
  for (int i = 0; i <= n; ++i) {
    const double s = length_ * i / n;
    CurveSample cs;
    cs.arc_length = s;
    if (kind_ == CurveKind::Circle) {
      cs.point = point_at(s);
      cs.tangent = tangent_at(s);
      cs.curvature = hole_ ? -1.0 / radius_ : 1.0 / radius_;
    } else {
      // Exact samples of r(theta) with the analytic tangent.
      cs.point = poly_[i];
      const double th = poly_theta_[i];
      double dr = 0.0;
      const double r = polar_radius(th, &dr);
      Vec2 d(dr * std::cos(th) - r * std::sin(th), dr * std::sin(th) + r * std::cos(th));
      if (hole_) d = -d;
      cs.tangent = d.normalized();
      cs.curvature = poly_kappa_[i];
      cs.arc_length = poly_s_[i];
    }
    cs.inward_normal = left_normal(cs.tangent);
    samples_.push_back(cs);
  }
  samples_.back().point = samples_.front().point;
}

double Curve::polar_radius(double theta, double* dr, double* d2r) const {
  double r = mean_radius_, r1 = 0.0, r2 = 0.0;
  for (const auto& t : terms_) {
    const double c = std::cos(t.k * theta), s = std::sin(t.k * theta);
    r += t.cos_coeff * c + t.sin_coeff * s;
    r1 += t.k * (-t.cos_coeff * s + t.sin_coeff * c);
    r2 += -t.k * t.k * (t.cos_coeff * c + t.sin_coeff * s);
  }
  if (dr) *dr = r1;
  if (d2r) *d2r = r2;
  return r;
}

double Curve::wrap(double s) const {
  s = std::fmod(s, length_);
  if (s < 0.0) s += length_;
  return s;
}

namespace {
// Segment index containing arc-length s on a polyline with cumulative table ps.
std::size_t segment_of(const std::vector<double>& ps, double s) {
  auto it = std::upper_bound(ps.begin(), ps.end(), s);
  std::size_t i = (it == ps.begin()) ? 0 : static_cast<std::size_t>(it - ps.begin()) - 1;
  return std::min(i, ps.size() - 2);
}
}  // namespace

Vec2 Curve::point_at(double s) const {
  if (kind_ == CurveKind::Circle) {
    const double th = (hole_ ? -1.0 : 1.0) * s / radius_;
    return center_ + radius_ * Vec2(std::cos(th), std::sin(th));
  }
  s = wrap(s);
  const std::size_t i = segment_of(poly_s_, s);
  const double len = poly_s_[i + 1] - poly_s_[i];
  const double f = len > 0.0 ? (s - poly_s_[i]) / len : 0.0;
  return poly_[i] + f * (poly_[i + 1] - poly_[i]);
}

Vec2 Curve::tangent_at(double s) const {
  if (kind_ == CurveKind::Circle) {
    const double th = s / radius_;
    return hole_ ? Vec2(-std::sin(th), -std::cos(th)) : Vec2(-std::sin(th), std::cos(th));
  }
  s = wrap(s);
  const std::size_t i = segment_of(poly_s_, s);
  return (poly_[i + 1] - poly_[i]).normalized();
}

Vec2 Curve::inward_normal_at(double s) const { return left_normal(tangent_at(s)); }

bool Curve::is_corner(double s, double tol) const {
  if (kind_ != CurveKind::Polygon) return false;
  s = wrap(s);
  for (double c : corner_s_) {
    if (std::abs(s - c) <= tol || std::abs(s - c - length_) <= tol || std::abs(s - c + length_) <= tol)
      return true;
  }
  return false;
}

double Curve::theta_at(double s) const {
  if (kind_ == CurveKind::Circle) return (hole_ ? -1.0 : 1.0) * wrap(s) / radius_;
  if (kind_ != CurveKind::Polar) return 0.0;
  s = wrap(s);
  const std::size_t i = segment_of(poly_s_, s);
  const double len = poly_s_[i + 1] - poly_s_[i];
  const double f = len > 0.0 ? (s - poly_s_[i]) / len : 0.0;
  return poly_theta_[i] + f * (poly_theta_[i + 1] - poly_theta_[i]);
}

double Curve::curvature_at(double s) const {
  switch (kind_) {
    case CurveKind::Circle:
      return hole_ ? -1.0 / radius_ : 1.0 / radius_;
    case CurveKind::Polygon:
      return is_corner(s) ? std::numeric_limits<double>::quiet_NaN() : 0.0;
    case CurveKind::Polar: {
      double dr = 0.0, d2r = 0.0;
      const double r = polar_radius(theta_at(s), &dr, &d2r);
      const double k = (r * r + 2.0 * dr * dr - r * d2r) / std::pow(r * r + dr * dr, 1.5);
      return hole_ ? -k : k;
    }
  }
  return 0.0;
}

double Curve::max_sample_spacing() const {
  double h = 0.0;
  for (std::size_t i = 0; i + 1 < samples_.size(); ++i)
    h = std::max(h, (samples_[i + 1].point - samples_[i].point).norm());
  return h;
}

double Curve::distance(const Vec2& x) const {
  if (kind_ == CurveKind::Circle) return std::abs((x - center_).norm() - radius_);
  double best = std::numeric_limits<double>::infinity();
  for (const auto& ch : chunks_) {
    if (box_distance_sq(x, ch.lo, ch.hi) >= best) continue;
    for (int i = ch.begin; i < ch.end; ++i)
      best = std::min(best, segment_distance_sq(x, poly_[i], poly_[i + 1], nullptr));
  }
  return std::sqrt(best);
}

Vec2 Curve::closest_point(const Vec2& x, double* s_out) const {
  if (kind_ == CurveKind::Circle) {
    Vec2 d = x - center_;
    if (d.norm() < 1e-300) d = Vec2(1.0, 0.0);
    const double th = std::atan2(d.y(), d.x());
    double s = (hole_ ? -th : th) * radius_;
    if (s_out) *s_out = wrap(s);
    return center_ + radius_ * d.normalized();
  }
  double best = std::numeric_limits<double>::infinity();
  int bi = 0;
  double bt = 0.0;
  for (const auto& ch : chunks_) {
    if (box_distance_sq(x, ch.lo, ch.hi) >= best) continue;
    for (int i = ch.begin; i < ch.end; ++i) {
      double t = 0.0;
      const double d = segment_distance_sq(x, poly_[i], poly_[i + 1], &t);
      if (d < best) {
        best = d;
        bi = i;
        bt = t;
      }
    }
  }
  if (s_out) *s_out = wrap(poly_s_[bi] + bt * (poly_s_[bi + 1] - poly_s_[bi]));
  return poly_[bi] + bt * (poly_[bi + 1] - poly_[bi]);
}

int Curve::winding(const Vec2& x) const {
  if (kind_ == CurveKind::Circle) {
    if ((x - center_).norm() >= radius_) return 0;
    return hole_ ? -1 : 1;
  }
  int w = 0;
  for (std::size_t i = 0; i + 1 < poly_.size(); ++i) {
    const Vec2& a = poly_[i];
    const Vec2& b = poly_[i + 1];
    if (a.y() <= x.y()) {
      if (b.y() > x.y() && cross(b - a, x - a) > 0.0) ++w;
    } else if (b.y() <= x.y() && cross(b - a, x - a) < 0.0) {
      --w;
    }
  }
  return w;
}

double curvature_at(const Curve& curve, double s) { return curve.curvature_at(s); }

// ---------------------------------------------------------------------------
// Domain

Domain::Domain(Curve outer, std::vector<Curve> holes) {
  if (outer.is_hole()) throw DomainError("outer boundary must not be flagged as a hole");
  curves_.push_back(std::move(outer));
  for (auto& h : holes) {
    if (!h.is_hole()) throw DomainError("hole curves must be flagged as holes");
    curves_.push_back(std::move(h));
  }
  const Curve& o = curves_.front();
  lo_ = hi_ = o.polyline().front();
  for (const auto& p : o.polyline()) {
    lo_ = lo_.cwiseMin(p);
    hi_ = hi_.cwiseMax(p);
  }
  if (o.kind() == CurveKind::Circle) {
    lo_ = o.center() - Vec2::Constant(o.radius());
    hi_ = o.center() + Vec2::Constant(o.radius());
  }
  for (std::size_t i = 1; i < curves_.size(); ++i) {
    for (const auto& p : curves_[i].polyline()) {
      if (o.winding(p) == 0 || o.distance(p) < 1e-12)
        throw DomainError("hole " + std::to_string(i) + " is not strictly inside the outer boundary");
      for (std::size_t j = 1; j < curves_.size(); ++j) {
        if (j == i) continue;
        if (curves_[j].winding(p) != 0 || curves_[j].distance(p) < 1e-12)
          throw DomainError("holes " + std::to_string(i) + " and " + std::to_string(j) + " overlap");
      }
    }
  }
}

Domain Domain::rectangle(double x0, double y0, double x1, double y1) {
  return Domain(Curve::polygon({{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}}, false), {});
}

Domain Domain::disk(Vec2 center, double radius) { return Domain(Curve::circle(center, radius, false), {}); }

const std::vector<std::string>& Domain::preset_names() {
  static const std::vector<std::string> names{"rect", "rect-hole", "rect-4holes", "polar-asym"};
  return names;
}

Domain Domain::preset(const std::string& name) {
  const std::vector<Vec2> rect{{-1.0, -0.8}, {1.0, -0.8}, {1.0, 0.8}, {-1.0, 0.8}};
  if (name == "rect") return Domain(Curve::polygon(rect, false), {});
  if (name == "rect-hole") return Domain(Curve::polygon(rect, false), {Curve::circle({0.2, 0.3}, 0.2, true)});
  if (name == "rect-4holes") {
    std::vector<Curve> holes;
    for (const Vec2& c : {Vec2(0.5, 0.3), Vec2(-0.5, 0.3), Vec2(-0.5, -0.3), Vec2(0.5, -0.3)})
      holes.push_back(Curve::circle(c, 0.15, true));
    return Domain(Curve::polygon(rect, false), std::move(holes));
  }
  if (name == "polar-asym")
    return Domain(Curve::polar({0.0, 0.0}, 1.0, {{2, 0.0, 0.15}, {3, 0.3, 0.0}}, false), {});
  std::string msg = "unknown domain preset '" + name + "'; valid presets:";
  for (const auto& n : preset_names()) msg += " " + n;
  throw DomainError(msg);
}

Domain Domain::parse(std::istream& in) {
  std::optional<Curve> outer;
  std::vector<Curve> holes;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::string role, kind;
    if (!(ls >> role)) continue;
    if (!(ls >> kind)) throw DomainError("line " + std::to_string(lineno) + ": missing curve kind");
    std::vector<double> v;
    for (double x; ls >> x;) v.push_back(x);
    if (!ls.eof()) throw DomainError("line " + std::to_string(lineno) + ": malformed number");
    const bool hole = role == "hole";
    if (!hole && role != "outer") throw DomainError("line " + std::to_string(lineno) + ": expected 'outer' or 'hole'");
    Curve c = [&]() {
      if (kind == "circle") {
        if (v.size() != 3) throw DomainError("line " + std::to_string(lineno) + ": circle needs cx cy r");
        return Curve::circle({v[0], v[1]}, v[2], hole);
      }
      if (kind == "polygon") {
        if (v.size() < 6 || v.size() % 2) throw DomainError("line " + std::to_string(lineno) + ": polygon needs x y pairs");
        std::vector<Vec2> pts;
        for (std::size_t i = 0; i < v.size(); i += 2) pts.emplace_back(v[i], v[i + 1]);
        return Curve::polygon(pts, hole);
      }
      if (kind == "polar") {
        if (v.size() < 3 || (v.size() - 3) % 3)
          throw DomainError("line " + std::to_string(lineno) + ": polar needs cx cy a0 followed by k a_k b_k triples");
        std::vector<PolarTerm> terms;
        for (std::size_t i = 3; i < v.size(); i += 3) terms.push_back({static_cast<int>(v[i]), v[i + 1], v[i + 2]});
        return Curve::polar({v[0], v[1]}, v[2], terms, hole);
      }
      throw DomainError("line " + std::to_string(lineno) + ": unknown curve kind '" + kind + "'");
    }();
    if (hole) {
      holes.push_back(std::move(c));
    } else {
      if (outer) throw DomainError("line " + std::to_string(lineno) + ": more than one outer curve");
      outer = std::move(c);
    }
  }
  if (!outer) throw DomainError("domain file has no outer curve");
  return Domain(std::move(*outer), std::move(holes));
}

Domain Domain::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DomainError("cannot open domain file " + path);
  return parse(in);
}

double Domain::area() const {
  auto curve_area = [](const Curve& c) {
    if (c.kind() == CurveKind::Circle) return kPi * c.radius() * c.radius();
    return std::abs(polyline_signed_area(c.polyline()));
  };
  double a = curve_area(curves_.front());
  for (std::size_t i = 1; i < curves_.size(); ++i) a -= curve_area(curves_[i]);
  return a;
}

bool Domain::is_axis_rectangle() const {
  const Curve& o = outer();
  if (curves_.size() != 1 || o.kind() != CurveKind::Polygon || o.polyline().size() != 5) return false;
  for (std::size_t i = 0; i < 4; ++i) {
    const Vec2 e = o.polyline()[i + 1] - o.polyline()[i];
    if (std::abs(e.x()) > 1e-14 && std::abs(e.y()) > 1e-14) return false;
  }
  return true;
}

double Domain::boundary_distance(const Vec2& x) const {
  double d = std::numeric_limits<double>::infinity();
  for (const auto& c : curves_) d = std::min(d, c.distance(x));
  return d;
}

namespace {
bool inside_curves(const std::vector<Curve>& curves, const Vec2& x) {
  if (curves.front().winding(x) == 0) return false;
  for (std::size_t i = 1; i < curves.size(); ++i)
    if (curves[i].winding(x) != 0) return false;
  return true;
}
}  // namespace

bool Domain::contains(const Vec2& x) const {
  if (x.x() < lo_.x() || x.y() < lo_.y() || x.x() > hi_.x() || x.y() > hi_.y()) return false;
  if (boundary_distance(x) <= 1e-12) return false;
  return inside_curves(curves_, x);
}

double Domain::signed_distance(const Vec2& x) const {
  const double d = boundary_distance(x);
  if (d <= 1e-12) return -d;
  return inside_curves(curves_, x) ? d : -d;
}

ClosestPoints Domain::closest_boundary_points(const Vec2& x, double rel_tol, int cluster_cap) const {
  ClosestPoints out;
  out.distance = boundary_distance(x);
  const double thr = (1.0 + rel_tol) * out.distance;
  const double thr2 = thr * thr;

  auto make_point = [&](int cid, const Vec2& foot, double s, bool corner) {
    BoundaryPoint bp;
    bp.location = foot;
    bp.curve = cid;
    bp.arc_length = curves_[cid].wrap(s);
    bp.corner = corner;
    bp.curvature = corner ? 0.0 : curves_[cid].curvature_at(bp.arc_length);
    if (std::isnan(bp.curvature)) {
      bp.curvature = 0.0;
      bp.corner = true;
    }
    const Vec2 d = x - foot;
    bp.inward_normal = d.norm() > 0.0 ? Vec2(d.normalized()) : curves_[cid].inward_normal_at(s);
    return bp;
  };
  auto emit_ring = [&](int cid) {
    out.degenerate = true;
    const Curve& c = curves_[cid];
    for (int k = 0; k < cluster_cap; ++k) {
      const double s = c.length() * k / cluster_cap;
      out.points.push_back(make_point(cid, c.point_at(s), s, false));
    }
  };

  for (int cid = 0; cid < static_cast<int>(curves_.size()); ++cid) {
    const Curve& c = curves_[cid];
    if (c.kind() == CurveKind::Circle) {
      const double r = (x - c.center()).norm();
      if (std::abs(r - c.radius()) > thr) continue;
      if (r + c.radius() <= thr) {
        emit_ring(cid);
        continue;
      }
      double s = 0.0;
      const Vec2 foot = c.closest_point(x, &s);
      out.points.push_back(make_point(cid, foot, s, false));
      continue;
    }

    // Segment-based curves: find the parameter interval of every segment that
    // lies within the threshold, then group connected runs of segments.
    const auto& P = c.polyline();
    const int nseg = static_cast<int>(P.size()) - 1;
    struct Hit {
      int seg;
      double ta, tb, tmin, dmin2;
    };
    std::vector<Hit> hits;
    for (int b = 0; b < nseg; b += kChunk) {
      const int e = std::min(nseg, b + kChunk);
      Vec2 lo = P[b], hi = P[b];
      for (int i = b; i <= e; ++i) {
        lo = lo.cwiseMin(P[i]);
        hi = hi.cwiseMax(P[i]);
      }
      if (box_distance_sq(x, lo, hi) > thr2) continue;
      for (int i = b; i < e; ++i) {
        double tm = 0.0;
        const double d2 = segment_distance_sq(x, P[i], P[i + 1], &tm);
        if (d2 > thr2) continue;
        const Vec2 ed = P[i + 1] - P[i];
        const double A = ed.squaredNorm();
        const double B = 2.0 * ed.dot(P[i] - x);
        const double C = (P[i] - x).squaredNorm() - thr2;
        const double disc = std::max(0.0, B * B - 4.0 * A * C);
        const double sq = std::sqrt(disc);
        const double ta = std::clamp((-B - sq) / (2.0 * A), 0.0, 1.0);
        const double tb = std::clamp((-B + sq) / (2.0 * A), 0.0, 1.0);
        hits.push_back({i, ta, tb, tm, d2});
      }
    }
    if (hits.empty()) continue;
    std::sort(hits.begin(), hits.end(), [](const Hit& a, const Hit& b) { return a.seg < b.seg; });
    auto connects = [&](const Hit& a, const Hit& b) {
      return ((a.seg + 1) % nseg == b.seg) && a.tb >= 1.0 - 1e-12 && b.ta <= 1e-12;
    };
    std::vector<std::vector<Hit>> runs;
    for (const Hit& h : hits) {
      if (!runs.empty() && connects(runs.back().back(), h))
        runs.back().push_back(h);
      else
        runs.push_back({h});
    }
    if (runs.size() > 1 && connects(runs.back().back(), runs.front().front())) {
      runs.back().insert(runs.back().end(), runs.front().begin(), runs.front().end());
      runs.erase(runs.begin());
    }
    if (runs.size() == 1 && static_cast<int>(runs[0].size()) == nseg &&
        connects(runs[0].back(), runs[0].front())) {
      emit_ring(cid);
      continue;
    }
    const auto& S = c.polyline_s();
    for (const auto& run : runs) {
      const Hit* best = &run.front();
      for (const Hit& h : run)
        if (h.dmin2 < best->dmin2) best = &h;
      const Vec2 foot = P[best->seg] + best->tmin * (P[best->seg + 1] - P[best->seg]);
      const double s = S[best->seg] + best->tmin * (S[best->seg + 1] - S[best->seg]);
      const bool corner = c.kind() == CurveKind::Polygon && (best->tmin <= 1e-12 || best->tmin >= 1.0 - 1e-12);
      out.points.push_back(make_point(cid, foot, s, corner));
    }
  }
  return out;
}

double signed_distance(const Domain& domain, const Vec2& x) { return domain.signed_distance(x); }
bool contains(const Domain& domain, const Vec2& x) { return domain.contains(x); }
ClosestPoints closest_boundary_points(const Domain& domain, const Vec2& x, double rel_tol, int cluster_cap) {
  return domain.closest_boundary_points(x, rel_tol, cluster_cap);
}

}  // namespace mems
