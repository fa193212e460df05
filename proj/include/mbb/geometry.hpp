#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "mbb/common.hpp"
#include "mbb/measure.hpp"
#include "mbb/point.hpp"

namespace mbb {

enum class Region { Interior, Boundary, Exterior };

inline const char* to_string(Region r) {
  switch (r) {
    case Region::Interior: return "INTERIOR";
    case Region::Boundary: return "BOUNDARY";
    case Region::Exterior: return "EXTERIOR";
  }
  return "?";
}

namespace detail {

// Monotone chain. Returns hull vertices in counterclockwise order; collinear
// inputs collapse to the two extreme points.
inline std::vector<Point> convex_hull_2d(std::vector<Point> pts, double eps_area) {
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  std::size_t n = pts.size();
  if (n <= 2) return pts;
  std::vector<Point> h(2 * n);
  std::size_t k = 0;
  for (std::size_t i = 0; i < n; ++i) { // lower hull
    while (k >= 2 && cross(h[k - 2], h[k - 1], pts[i]) <= eps_area) --k;
    h[k++] = pts[i];
  }
  for (std::size_t i = n - 1, t = k + 1; i-- > 0;) { // upper hull
    while (k >= t && cross(h[k - 2], h[k - 1], pts[i]) <= eps_area) --k;
    h[k++] = pts[i];
  }
  h.resize(k - 1);
  return h;
}

inline double dist_point_segment(const Point& q, const Point& a, const Point& b) {
  Point ab = b - a;
  double len2 = norm2(ab);
  if (len2 == 0.0) return dist(q, a);
  double t = dot(q - a, ab) / len2;
  t = std::clamp(t, 0.0, 1.0);
  return dist(q, a + t * ab);
}

} // namespace detail

/**
 * Convex hull C of a support set plus classification against its relative
 * interior I. Degenerate supports (a single point, or 2D atoms on a line) are
 * classified inside their affine hull; points off the affine hull by more
 * than the tolerance are EXTERIOR.
 */
class GeometrySummary {
public:
  static GeometrySummary of(const DiscreteMeasure& m, double tau = tol::geom) {
    GeometrySummary g;
    g.tau_ = tau;
    g.dim_ = m.dim();
    std::vector<Point> pts;
    pts.reserve(m.size());
    for (const auto& a : m.atoms()) pts.push_back(a.x);
    if (g.dim_ == 1) {
      double lo = pts.front()[0], hi = lo;
      for (const auto& p : pts) { lo = std::min(lo, p[0]); hi = std::max(hi, p[0]); }
      g.affine_dim_ = (hi > lo) ? 1 : 0;
      if (g.affine_dim_ == 0) {
        g.vertices_ = {Point(lo)};
      } else {
        g.vertices_ = {Point(lo), Point(hi)};
      }
      return g;
    }
    // 2D: hull with area tolerance scaled to the data.
    double scale = 0.0;
    for (const auto& p : pts) scale = std::max({scale, std::fabs(p[0]), std::fabs(p[1])});
    double eps_area = 1e-12 * std::max(1.0, scale * scale);
    auto hull = detail::convex_hull_2d(pts, eps_area);
    if (hull.size() == 1) {
      g.affine_dim_ = 0;
      g.vertices_ = hull;
    } else if (hull.size() == 2) {
      g.affine_dim_ = 1;
      g.vertices_ = hull;
    } else {
      g.affine_dim_ = 2;
      g.vertices_ = hull;
    }
    return g;
  }

  int dim() const { return dim_; }
  int affine_dim() const { return affine_dim_; }
  double tau() const { return tau_; }

  // Hull vertices: 1 point (dim 0), segment endpoints (dim 1), or a CCW
  // polygon (dim 2).
  const std::vector<Point>& vertices() const { return vertices_; }

  // 1D interval endpoints of C; requires an ambient or affine 1D hull.
  double lo() const {
    require(dim_ == 1, ErrorKind::Precondition, "lo(): 1D only");
    return vertices_.front()[0];
  }
  double hi() const {
    require(dim_ == 1, ErrorKind::Precondition, "hi(): 1D only");
    return vertices_.back()[0];
  }

  double diameter() const {
    double d = 0.0;
    for (std::size_t i = 0; i < vertices_.size(); ++i)
      for (std::size_t j = i + 1; j < vertices_.size(); ++j)
        d = std::max(d, dist(vertices_[i], vertices_[j]));
    return d;
  }

  // Signed classification against the relative boundary of C. A point within
  // tau of the relative boundary is BOUNDARY, interior-side points beyond the
  // band are INTERIOR, everything else EXTERIOR. A 0-dimensional hull has an
  // empty relative boundary: its point is INTERIOR.
  Region classify(const Point& q) const {
    require(q.dim == dim_, ErrorKind::Precondition, "classify: dimension mismatch");
    if (affine_dim_ == 0) {
      return dist(q, vertices_.front()) <= tau_ ? Region::Interior : Region::Exterior;
    }
    if (dim_ == 1) return classify_1d(q[0], vertices_.front()[0], vertices_.back()[0]);
    if (affine_dim_ == 1) {
      const Point& a = vertices_.front();
      const Point& b = vertices_.back();
      Point u = b - a;
      double len = norm(u);
      u = (1.0 / len) * u;
      Point da = q - a;
      double along = dot(da, u);
      double off = std::fabs(da[0] * u[1] - da[1] * u[0]);
      if (off > tau_) return Region::Exterior;
      return classify_1d(along, 0.0, len);
    }
    // Full-dimensional polygon, CCW: inside iff left of every edge.
    double min_edge_dist = std::numeric_limits<double>::infinity();
    bool inside = true;
    std::size_t n = vertices_.size();
    for (std::size_t i = 0; i < n; ++i) {
      const Point& a = vertices_[i];
      const Point& b = vertices_[(i + 1) % n];
      if (cross(a, b, q) < 0.0) inside = false;
      min_edge_dist = std::min(min_edge_dist, detail::dist_point_segment(q, a, b));
    }
    if (min_edge_dist <= tau_) return Region::Boundary;
    return inside ? Region::Interior : Region::Exterior;
  }

  // Distance from q to the relative boundary of C (infinity when the relative
  // boundary is empty).
  double boundary_distance(const Point& q) const {
    if (affine_dim_ == 0) return std::numeric_limits<double>::infinity();
    if (dim_ == 1)
      return std::min(std::fabs(q[0] - vertices_.front()[0]),
                      std::fabs(q[0] - vertices_.back()[0]));
    if (affine_dim_ == 1)
      return std::min(dist(q, vertices_.front()), dist(q, vertices_.back()));
    double d = std::numeric_limits<double>::infinity();
    std::size_t n = vertices_.size();
    for (std::size_t i = 0; i < n; ++i)
      d = std::min(d, detail::dist_point_segment(q, vertices_[i], vertices_[(i + 1) % n]));
    return d;
  }

private:
  int dim_ = 1;
  int affine_dim_ = 0;
  double tau_ = tol::geom;
  std::vector<Point> vertices_;

  Region classify_1d(double x, double lo, double hi) const {
    if (x < lo - tau_ || x > hi + tau_) return Region::Exterior;
    if (x <= lo + tau_ || x >= hi - tau_) return Region::Boundary;
    return Region::Interior;
  }
};

inline GeometrySummary hull_geometry(const DiscreteMeasure& m, double tau = tol::geom) {
  return GeometrySummary::of(m, tau);
}

// True iff every atom of m is INTERIOR with boundary distance > tau, i.e.
// spt m is compactly contained in the relative interior I.
inline bool compactly_contained(const DiscreteMeasure& m, const GeometrySummary& geo) {
  for (const auto& a : m.atoms()) {
    if (geo.classify(a.x) != Region::Interior) return false;
    if (geo.boundary_distance(a.x) <= geo.tau()) return false;
  }
  return true;
}

} // namespace mbb
