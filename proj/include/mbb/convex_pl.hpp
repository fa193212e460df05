#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <utility>
#include <vector>

#include "mbb/common.hpp"
#include "mbb/geometry.hpp"
#include "mbb/lp.hpp"
#include "mbb/point.hpp"

namespace mbb {

struct AffinePiece {
  Point g;        // slope
  double b = 0.0; // intercept
  double value(const Point& y) const { return dot(g, y) + b; }
};

// Finite max-affine function: psi(y) = max_k (<g_k, y> + b_k).
class ConvexPL {
public:
  ConvexPL(int dim, std::vector<AffinePiece> pieces)
      : dim_(dim), pieces_(std::move(pieces)) {
    require(dim_ == 1 || dim_ == 2, ErrorKind::Precondition, "convex pl: dim must be 1 or 2");
    require(!pieces_.empty(), ErrorKind::Precondition, "convex pl: no pieces");
    for (auto& p : pieces_) {
      require(p.g.dim == dim_, ErrorKind::Precondition, "convex pl: slope dim mismatch");
    }
  }

  static ConvexPL constant(int dim, double c) {
    Point z;
    z.dim = dim;
    return ConvexPL(dim, {AffinePiece{z, c}});
  }
  static ConvexPL affine(const Point& g, double b) { return ConvexPL(g.dim, {AffinePiece{g, b}}); }

  int dim() const { return dim_; }
  const std::vector<AffinePiece>& pieces() const { return pieces_; }

  double operator()(const Point& y) const {
    double v = -std::numeric_limits<double>::infinity();
    for (const auto& p : pieces_) v = std::max(v, p.value(y));
    return v;
  }

  // slopes of the pieces active at y (within a relative tolerance)
  std::vector<Point> active_slopes(const Point& y, double tol = 1e-9) const {
    double v = (*this)(y);
    double cut = v - tol * (1.0 + std::fabs(v));
    std::vector<Point> out;
    for (const auto& p : pieces_)
      if (p.value(y) >= cut) {
        bool dup = false;
        for (const auto& q : out)
          if (q == p.g) dup = true;
        if (!dup) out.push_back(p.g);
      }
    return out;
  }

  // canonical subgradient: centroid of the vertices of the active-slope hull
  Point support_slope(const Point& y) const {
    auto slopes = active_slopes(y);
    if (slopes.size() == 1) return slopes[0];
    Point c;
    c.dim = dim_;
    if (dim_ == 1) {
      double lo = slopes[0][0], hi = slopes[0][0];
      for (const auto& s : slopes) {
        lo = std::min(lo, s[0]);
        hi = std::max(hi, s[0]);
      }
      c[0] = 0.5 * (lo + hi);
      return c;
    }
    double sc = 1.0;
    for (const auto& s : slopes) sc = std::max({sc, std::fabs(s[0]), std::fabs(s[1])});
    auto hull = detail::convex_hull_2d(slopes, 1e-12 * sc * sc);
    for (const auto& v : hull)
      for (int k = 0; k < 2; ++k) c[k] += v[k];
    for (int k = 0; k < 2; ++k) c[k] /= static_cast<double>(hull.size());
    return c;
  }

private:
  int dim_;
  std::vector<AffinePiece> pieces_;
};

// (max_i f_i) + (max_j h_j) = max_{i,j} (f_i + h_j)
inline ConvexPL operator+(const ConvexPL& f, const ConvexPL& h) {
  require(f.dim() == h.dim(), ErrorKind::Precondition, "convex pl: dim mismatch in sum");
  std::vector<AffinePiece> pieces;
  pieces.reserve(f.pieces().size() * h.pieces().size());
  for (const auto& a : f.pieces())
    for (const auto& c : h.pieces()) pieces.push_back({a.g + c.g, a.b + c.b});
  return ConvexPL(f.dim(), std::move(pieces));
}

inline ConvexPL operator*(double s, const ConvexPL& f) {
  require(s >= 0.0, ErrorKind::Precondition, "convex pl: negative scale breaks convexity");
  std::vector<AffinePiece> pieces = f.pieces();
  for (auto& p : pieces) {
    p.g = s * p.g;
    p.b *= s;
  }
  return ConvexPL(f.dim(), std::move(pieces));
}

inline ConvexPL max_of(const ConvexPL& f, const ConvexPL& h) {
  require(f.dim() == h.dim(), ErrorKind::Precondition, "convex pl: dim mismatch in max");
  std::vector<AffinePiece> pieces = f.pieces();
  pieces.insert(pieces.end(), h.pieces().begin(), h.pieces().end());
  return ConvexPL(f.dim(), std::move(pieces));
}

// Subtract the supporting affine function at the anchor; the result is >= 0
// with value exactly 0 at the anchor.
inline ConvexPL normalize_affine(const ConvexPL& f, const Point& anchor) {
  require(anchor.dim == f.dim(), ErrorKind::Precondition, "normalize_affine: dim mismatch");
  Point g0 = f.support_slope(anchor);
  double v0 = f(anchor);
  std::vector<AffinePiece> pieces = f.pieces();
  for (auto& p : pieces) {
    p.g = p.g - g0;
    p.b += dot(g0, anchor) - v0;
  }
  ConvexPL out(f.dim(), std::move(pieces));
  double dust = out(anchor); // numerical residue of the exact cancellation
  if (dust != 0.0) {
    auto adj = out.pieces();
    for (auto& p : adj) p.b -= dust;
    out = ConvexPL(f.dim(), std::move(adj));
  }
  return out;
}

namespace detail {

inline ConvexPL envelope_1d(std::vector<std::pair<double, double>> pts) {
  std::sort(pts.begin(), pts.end());
  // collapse duplicate abscissae onto the lower value
  std::vector<std::pair<double, double>> uniq;
  for (const auto& p : pts) {
    if (!uniq.empty() && p.first == uniq.back().first)
      uniq.back().second = std::min(uniq.back().second, p.second);
    else
      uniq.push_back(p);
  }
  // lower hull, popping points on or above the chord
  std::vector<std::pair<double, double>> hull;
  for (const auto& p : uniq) {
    while (hull.size() >= 2) {
      const auto& a = hull[hull.size() - 2];
      const auto& b = hull[hull.size() - 1];
      double cr = (b.first - a.first) * (p.second - a.second) -
                  (b.second - a.second) * (p.first - a.first);
      if (cr <= 0.0)
        hull.pop_back();
      else
        break;
    }
    hull.push_back(p);
  }
  std::vector<AffinePiece> pieces;
  if (hull.size() == 1) {
    pieces.push_back({Point(0.0), hull[0].second});
  } else {
    for (std::size_t i = 0; i + 1 < hull.size(); ++i) {
      double s = (hull[i + 1].second - hull[i].second) / (hull[i + 1].first - hull[i].first);
      pieces.push_back({Point(s), hull[i].second - s * hull[i].first});
    }
  }
  return ConvexPL(1, std::move(pieces));
}

// Supporting plane of the lower envelope touching at pts[i]: maximize the
// plane value at pts[i] subject to staying below every graph point.
inline AffinePiece support_plane_at(const std::vector<Point>& pts,
                                    const std::vector<double>& vals, std::size_t i) {
  int n = static_cast<int>(pts.size());
  // columns: g1+, g1-, g2+, g2-, b+, b-, then one slack per row
  LinearProgram lp(n, 6 + n);
  for (int j = 0; j < n; ++j) {
    lp.entry(j, 0, pts[j][0]);
    lp.entry(j, 1, -pts[j][0]);
    lp.entry(j, 2, pts[j][1]);
    lp.entry(j, 3, -pts[j][1]);
    lp.entry(j, 4, 1.0);
    lp.entry(j, 5, -1.0);
    lp.entry(j, 6 + j, 1.0);
    lp.rhs(j, vals[j]);
  }
  lp.obj(0, pts[i][0]);
  lp.obj(1, -pts[i][0]);
  lp.obj(2, pts[i][1]);
  lp.obj(3, -pts[i][1]);
  lp.obj(4, 1.0);
  lp.obj(5, -1.0);
  lp.set_maximize(true);
  auto sol = solve_lp(lp);
  require(sol.optimal(), ErrorKind::Numeric, "envelope: support LP failed");
  AffinePiece piece;
  piece.g = Point(sol.x[0] - sol.x[1], sol.x[2] - sol.x[3]);
  piece.b = sol.x[4] - sol.x[5];
  return piece;
}

} // namespace detail

// Lower convex envelope of the graph {(points[i], values[i])} as a max-affine
// function.  Exact in d = 1; in d = 2 it matches the envelope at every input
// point and supports it from below elsewhere.  Degenerate (collinear or
// single-point) supports are handled in their affine hull.
inline ConvexPL envelope(const std::vector<Point>& points, const std::vector<double>& values) {
  require(!points.empty() && points.size() == values.size(), ErrorKind::Precondition,
          "envelope: empty or mismatched input");
  int dim = points[0].dim;
  if (dim == 1) {
    std::vector<std::pair<double, double>> pts;
    pts.reserve(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) pts.push_back({points[i][0], values[i]});
    return detail::envelope_1d(std::move(pts));
  }
  // find an affine-hull direction to detect degenerate 2d inputs
  double scale = 1.0;
  for (const auto& p : points) scale = std::max({scale, std::fabs(p[0]), std::fabs(p[1])});
  std::size_t far = 0;
  double best = 0.0;
  for (std::size_t j = 1; j < points.size(); ++j) {
    double d2 = norm2(points[j] - points[0]);
    if (d2 > best) {
      best = d2;
      far = j;
    }
  }
  if (best <= 1e-24 * scale * scale) { // all points coincide
    double v = values[0];
    for (double w : values) v = std::min(v, w);
    return ConvexPL::constant(2, v);
  }
  Point u = (1.0 / std::sqrt(best)) * (points[far] - points[0]);
  bool collinear = true;
  for (const auto& p : points)
    if (std::fabs(cross(points[0], points[far], p)) > 1e-12 * scale * scale) collinear = false;
  if (collinear) {
    // one-dimensional envelope along the common line through points[0]
    std::vector<std::pair<double, double>> pts;
    for (std::size_t i = 0; i < points.size(); ++i)
      pts.push_back({dot(u, points[i] - points[0]), values[i]});
    auto env = detail::envelope_1d(std::move(pts));
    std::vector<AffinePiece> pieces;
    for (const auto& p : env.pieces()) {
      double s = p.g[0];
      pieces.push_back({s * u, p.b - s * dot(u, points[0])});
    }
    return ConvexPL(2, std::move(pieces));
  }
  std::vector<AffinePiece> pieces;
  pieces.reserve(points.size());
  for (std::size_t i = 0; i < points.size(); ++i)
    pieces.push_back(detail::support_plane_at(points, values, i));
  return ConvexPL(2, std::move(pieces));
}

// Exact envelope value at one query point: the cheapest convex combination of
// graph points hitting q.  Empty when q is outside the convex hull.
inline std::optional<double> envelope_value_at(const std::vector<Point>& points,
                                               const std::vector<double>& values,
                                               const Point& q) {
  require(!points.empty() && points.size() == values.size(), ErrorKind::Precondition,
          "envelope_value_at: empty or mismatched input");
  int d = points[0].dim;
  int n = static_cast<int>(points.size());
  LinearProgram lp(d + 1, n);
  for (int j = 0; j < n; ++j) {
    for (int k = 0; k < d; ++k) lp.entry(k, j, points[static_cast<std::size_t>(j)][k]);
    lp.entry(d, j, 1.0);
    lp.obj(j, values[static_cast<std::size_t>(j)]);
  }
  for (int k = 0; k < d; ++k) lp.rhs(k, q[k]);
  lp.rhs(d, 1.0);
  auto sol = solve_lp(lp);
  if (sol.status == LPStatus::Infeasible) return std::nullopt;
  require(sol.optimal(), ErrorKind::Numeric, "envelope_value_at: LP failed");
  return sol.objective;
}

} // namespace mbb
