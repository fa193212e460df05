#pragma once

#include <array>
#include <cmath>
#include <compare>

#include "mbb/common.hpp"

namespace mbb {

// Point in R^d, d in {1, 2}. Fixed storage keeps measures cheap to copy and
// comparisons exact (atom identity is bitwise equality of coordinates).
struct Point {
  int dim = 1;
  std::array<double, 2> c{0.0, 0.0};

  Point() = default;
  explicit Point(double x) : dim(1), c{x, 0.0} {}
  Point(double x, double y) : dim(2), c{x, y} {}

  double operator[](int i) const { return c[static_cast<std::size_t>(i)]; }
  double& operator[](int i) { return c[static_cast<std::size_t>(i)]; }

  friend Point operator+(Point a, const Point& b) {
    for (int i = 0; i < a.dim; ++i) a[i] += b[i];
    return a;
  }
  friend Point operator-(Point a, const Point& b) {
    for (int i = 0; i < a.dim; ++i) a[i] -= b[i];
    return a;
  }
  friend Point operator*(double s, Point a) {
    for (int i = 0; i < a.dim; ++i) a[i] *= s;
    return a;
  }

  friend bool operator==(const Point& a, const Point& b) {
    if (a.dim != b.dim) return false;
    for (int i = 0; i < a.dim; ++i)
      if (a[i] != b[i]) return false;
    return true;
  }

  // Lexicographic order; used for canonical atom sorting.
  friend bool operator<(const Point& a, const Point& b) {
    for (int i = 0; i < a.dim; ++i) {
      if (a[i] < b[i]) return true;
      if (a[i] > b[i]) return false;
    }
    return false;
  }
};

inline double dot(const Point& a, const Point& b) {
  require(a.dim == b.dim, ErrorKind::Precondition, "dot: dimension mismatch");
  double s = 0.0;
  for (int i = 0; i < a.dim; ++i) s += a[i] * b[i];
  return s;
}

inline double norm2(const Point& a) { return dot(a, a); }
inline double norm(const Point& a) { return std::sqrt(norm2(a)); }

inline double dist(const Point& a, const Point& b) { return norm(a - b); }

// z-component of the 2D cross product (b - a) x (q - a).
inline double cross(const Point& a, const Point& b, const Point& q) {
  return (b[0] - a[0]) * (q[1] - a[1]) - (b[1] - a[1]) * (q[0] - a[0]);
}

} // namespace mbb
