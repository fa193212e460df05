#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <vector>

#include "mbb/common.hpp"
#include "mbb/normal.hpp"
#include "mbb/point.hpp"

namespace mbb {

struct Atom {
  Point x;
  double w = 0.0;
};

/**
 * Finitely supported probability measure.
 *
 * Invariants: all atoms share one dimension, points are pairwise distinct,
 * weights are strictly positive and sum to 1 within 1e-12. `make` merges
 * duplicate points and renormalizes small mass defects; the raw constructor
 * validates and throws instead.
 */
class DiscreteMeasure {
public:
  DiscreteMeasure() = default;

  explicit DiscreteMeasure(std::vector<Atom> atoms) : atoms_(std::move(atoms)) {
    validate();
  }

  // Tolerant factory: merges duplicate points (weight sums), drops zero-weight
  // atoms, renormalizes when the total is off by at most `mass_slack`.
  static DiscreteMeasure make(std::vector<Atom> atoms, double mass_slack = 1e-6) {
    require(!atoms.empty(), ErrorKind::Precondition, "measure: no atoms");
    std::map<Point, double> merged;
    for (const auto& a : atoms) {
      require(a.x.dim == atoms.front().x.dim, ErrorKind::Precondition,
              "measure: mixed dimensions");
      require(std::isfinite(a.w) && a.w >= 0.0, ErrorKind::Precondition,
              "measure: weight must be finite and nonnegative");
      for (int i = 0; i < a.x.dim; ++i)
        require(std::isfinite(a.x[i]), ErrorKind::Precondition,
                "measure: coordinate must be finite");
      merged[a.x] += a.w;
    }
    double total = 0.0;
    for (const auto& [p, w] : merged) total += w;
    require(std::fabs(total - 1.0) <= mass_slack, ErrorKind::Precondition,
            "measure: weights sum to " + std::to_string(total));
    std::vector<Atom> out;
    out.reserve(merged.size());
    for (const auto& [p, w] : merged)
      if (w > 0.0) out.push_back({p, w / total});
    require(!out.empty(), ErrorKind::Precondition, "measure: all weights zero");
    return DiscreteMeasure(std::move(out));
  }

  const std::vector<Atom>& atoms() const { return atoms_; }
  std::size_t size() const { return atoms_.size(); }
  int dim() const { return atoms_.empty() ? 0 : atoms_.front().x.dim; }

  const Point& point(std::size_t i) const { return atoms_[i].x; }
  double weight(std::size_t i) const { return atoms_[i].w; }

  friend bool operator==(const DiscreteMeasure& a, const DiscreteMeasure& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i)
      if (!(a.atoms_[i].x == b.atoms_[i].x) || a.atoms_[i].w != b.atoms_[i].w)
        return false;
    return true;
  }

private:
  std::vector<Atom> atoms_; // kept sorted by point, see validate()

  void validate() {
    require(!atoms_.empty(), ErrorKind::Precondition, "measure: no atoms");
    std::sort(atoms_.begin(), atoms_.end(),
              [](const Atom& a, const Atom& b) { return a.x < b.x; });
    int d = atoms_.front().x.dim;
    require(d == 1 || d == 2, ErrorKind::Precondition, "measure: dim must be 1 or 2");
    double total = 0.0;
    for (std::size_t i = 0; i < atoms_.size(); ++i) {
      const Atom& a = atoms_[i];
      require(a.x.dim == d, ErrorKind::Precondition, "measure: mixed dimensions");
      require(std::isfinite(a.w) && a.w > 0.0, ErrorKind::Precondition,
              "measure: weights must be strictly positive");
      if (i > 0)
        require(!(atoms_[i - 1].x == a.x), ErrorKind::Precondition,
                "measure: duplicate atom");
      total += a.w;
    }
    require(std::fabs(total - 1.0) <= tol::weight_sum, ErrorKind::Precondition,
            "measure: weights must sum to 1 within 1e-12");
  }
};

// Sums mirror pairs first: atoms are kept sorted and negation reverses that
// order, so a point-symmetric measure (e.g. a quantized Gaussian) gets an
// exactly zero barycenter instead of an order-of-summation residue.
inline Point barycenter(const DiscreteMeasure& m) {
  Point b;
  b.dim = m.dim();
  const auto& atoms = m.atoms();
  std::size_t i = 0, j = atoms.size();
  while (i < j) {
    --j;
    for (int k = 0; k < b.dim; ++k) {
      double t = atoms[i].w * atoms[i].x[k];
      if (i != j) t += atoms[j].w * atoms[j].x[k];
      b[k] += t;
    }
    ++i;
  }
  return b;
}

inline double second_moment(const DiscreteMeasure& m) {
  double s = 0.0;
  for (const auto& a : m.atoms()) s += a.w * norm2(a.x);
  return s;
}

inline double spread(const DiscreteMeasure& m) {
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (const auto& a : m.atoms()) {
    for (int i = 0; i < m.dim(); ++i) {
      lo = std::min(lo, a.x[i]);
      hi = std::max(hi, a.x[i]);
    }
  }
  return hi - lo;
}

namespace detail {
// Conditional means of Z on n equal-probability cells, exactly antisymmetric.
inline std::vector<double> gaussian_centroids(int n) {
  std::vector<double> c(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i)
    c[static_cast<std::size_t>(i)] =
        gaussian_cell_mean(static_cast<double>(i) / n, static_cast<double>(i + 1) / n);
  // Symmetrize: pair cell i with its mirror so sums cancel bitwise.
  for (int i = 0, j = n - 1; i < j; ++i, --j) {
    double v = 0.5 * (c[static_cast<std::size_t>(j)] - c[static_cast<std::size_t>(i)]);
    c[static_cast<std::size_t>(j)] = v;
    c[static_cast<std::size_t>(i)] = -v;
  }
  if (n % 2 == 1) c[static_cast<std::size_t>(n / 2)] = 0.0;
  return c;
}
} // namespace detail

/**
 * Quantization of the standard Gaussian on R^d.
 *
 * d=1: n equal-probability quantile cells, atom at each cell's conditional
 * mean, weight 1/n; the grid is exactly symmetric, so the barycenter is 0
 * bitwise. d=2: product of two 1D grids with sqrt(n) points per axis (n must
 * be a perfect square). The second moment underestimates d; it is within 2%
 * once the per-axis count reaches 32.
 */
inline DiscreteMeasure quantize_gaussian(int d, int n) {
  require(d == 1 || d == 2, ErrorKind::Precondition, "quantize_gaussian: d in {1,2}");
  require(n >= 2, ErrorKind::Precondition, "quantize_gaussian: n >= 2");
  std::vector<Atom> atoms;
  if (d == 1) {
    auto c = detail::gaussian_centroids(n);
    double w = 1.0 / n;
    atoms.reserve(c.size());
    for (double v : c) atoms.push_back({Point(v), w});
  } else {
    int k = static_cast<int>(std::llround(std::sqrt(static_cast<double>(n))));
    require(k * k == n, ErrorKind::Precondition,
            "quantize_gaussian: d=2 needs n to be a perfect square");
    auto c = detail::gaussian_centroids(k);
    double w = 1.0 / n;
    atoms.reserve(static_cast<std::size_t>(n));
    for (double vx : c)
      for (double vy : c) atoms.push_back({Point(vx, vy), w});
  }
  return DiscreteMeasure(std::move(atoms));
}

} // namespace mbb
