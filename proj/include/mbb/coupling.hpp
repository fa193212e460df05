#pragma once

#include <cmath>
#include <optional>
#include <utility>
#include <vector>

#include "mbb/common.hpp"
#include "mbb/lp.hpp"
#include "mbb/measure.hpp"

namespace mbb {

// Joint mass on the product of two finite supports with prescribed marginals.
class Coupling {
public:
  Coupling(DiscreteMeasure row, DiscreteMeasure col, std::vector<double> mass,
           double tol = tol::lp)
      : row_(std::move(row)), col_(std::move(col)), mass_(std::move(mass)) {
    require(mass_.size() == row_.size() * col_.size(), ErrorKind::Precondition,
            "coupling: mass shape mismatch");
    for (double& v : mass_) {
      require(v >= -tol, ErrorKind::Precondition, "coupling: negative mass");
      if (v < 0.0) v = 0.0;
    }
    require(marginal_residual() <= tol, ErrorKind::Precondition,
            "coupling: marginals do not match");
  }

  const DiscreteMeasure& row_measure() const { return row_; }
  const DiscreteMeasure& col_measure() const { return col_; }

  double mass(std::size_t i, std::size_t j) const { return mass_[i * col_.size() + j]; }
  const std::vector<double>& raw() const { return mass_; }

  // max deviation of row/column sums from the declared marginals
  double marginal_residual() const {
    double mx = 0.0;
    for (std::size_t i = 0; i < row_.size(); ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < col_.size(); ++j) s += mass(i, j);
      mx = std::max(mx, std::fabs(s - row_.weight(i)));
    }
    for (std::size_t j = 0; j < col_.size(); ++j) {
      double s = 0.0;
      for (std::size_t i = 0; i < row_.size(); ++i) s += mass(i, j);
      mx = std::max(mx, std::fabs(s - col_.weight(j)));
    }
    return mx;
  }

  // conditional law of the column given row atom i (zero entries dropped)
  DiscreteMeasure conditional(std::size_t i) const {
    std::vector<Atom> atoms;
    double total = 0.0;
    for (std::size_t j = 0; j < col_.size(); ++j) total += mass(i, j);
    require(total > 0.0, ErrorKind::Precondition, "coupling: empty row");
    for (std::size_t j = 0; j < col_.size(); ++j)
      if (mass(i, j) > 0.0) atoms.push_back({col_.point(j), mass(i, j) / total});
    return DiscreteMeasure::make(std::move(atoms), 1e-9);
  }

  // max over rows of the conditional-mean defect from the row point
  double mean_defect() const {
    double mx = 0.0;
    for (std::size_t i = 0; i < row_.size(); ++i) {
      Point m;
      m.dim = row_.dim();
      double total = 0.0;
      for (std::size_t j = 0; j < col_.size(); ++j) {
        total += mass(i, j);
        for (int k = 0; k < m.dim; ++k) m[k] += mass(i, j) * col_.point(j)[k];
      }
      if (total <= 0.0) continue;
      mx = std::max(mx, dist((1.0 / total) * m, row_.point(i)));
    }
    return mx;
  }

  double inner_product_objective() const {
    double s = 0.0;
    for (std::size_t i = 0; i < row_.size(); ++i)
      for (std::size_t j = 0; j < col_.size(); ++j)
        s += mass(i, j) * dot(row_.point(i), col_.point(j));
    return s;
  }

private:
  DiscreteMeasure row_, col_;
  std::vector<double> mass_; // row-major
};

// A coupling whose conditional laws are centered at their row atoms.
class MartingaleTransport {
public:
  explicit MartingaleTransport(Coupling c, double tol = tol::lp) : c_(std::move(c)) {
    require(c_.row_measure().dim() == c_.col_measure().dim(), ErrorKind::Precondition,
            "martingale transport: dimension mismatch");
    require(c_.mean_defect() <= tol, ErrorKind::Precondition,
            "martingale transport: conditional means off their atoms");
  }

  const Coupling& coupling() const { return c_; }
  const DiscreteMeasure& row_measure() const { return c_.row_measure(); }
  const DiscreteMeasure& col_measure() const { return c_.col_measure(); }
  double mass(std::size_t i, std::size_t j) const { return c_.mass(i, j); }
  DiscreteMeasure kernel(std::size_t i) const { return c_.conditional(i); }

private:
  Coupling c_;
};

namespace detail {

// Rows: |mu| row sums, |nu| column sums, d conditional-mean rows per mu atom.
// Variables: mass(i,j) in row-major order.
inline LinearProgram martingale_lp(const DiscreteMeasure& mu, const DiscreteMeasure& nu) {
  int nm = static_cast<int>(mu.size());
  int nn = static_cast<int>(nu.size());
  int d = mu.dim();
  LinearProgram lp(nm + nn + nm * d, nm * nn);
  for (int i = 0; i < nm; ++i)
    for (int j = 0; j < nn; ++j) {
      int var = i * nn + j;
      lp.entry(i, var, 1.0);
      lp.entry(nm + j, var, 1.0);
      for (int k = 0; k < d; ++k)
        lp.entry(nm + nn + i * d + k, var, nu.point(static_cast<std::size_t>(j))[k]);
    }
  for (int i = 0; i < nm; ++i) {
    double w = mu.weight(static_cast<std::size_t>(i));
    lp.rhs(i, w);
    for (int k = 0; k < d; ++k)
      lp.rhs(nm + nn + i * d + k, w * mu.point(static_cast<std::size_t>(i))[k]);
  }
  for (int j = 0; j < nn; ++j) lp.rhs(nm + j, nu.weight(static_cast<std::size_t>(j)));
  return lp;
}

} // namespace detail

struct ConvexOrderResult {
  bool ordered = false;
  std::optional<MartingaleTransport> witness; // set iff ordered
  std::vector<double> certificate;            // Farkas duals iff not ordered

  explicit operator bool() const { return ordered; }
};

// mu <=_c nu iff a martingale transport exists (Strassen), decided by the
// feasibility LP over kernels with conditional means pinned to the mu atoms.
inline ConvexOrderResult check_convex_order(const DiscreteMeasure& mu,
                                            const DiscreteMeasure& nu,
                                            double tol = tol::lp) {
  require(mu.dim() == nu.dim(), ErrorKind::Precondition,
          "check_convex_order: dimension mismatch");
  auto lp = detail::martingale_lp(mu, nu);
  auto sol = check_feasible(lp);
  ConvexOrderResult out;
  if (sol.status == LPStatus::Infeasible) {
    out.ordered = false;
    out.certificate = sol.farkas;
    return out;
  }
  require(sol.status == LPStatus::Optimal, ErrorKind::Numeric,
          "check_convex_order: unexpected LP status");
  out.ordered = true;
  out.witness.emplace(Coupling(mu, nu, sol.x, tol), tol);
  return out;
}

} // namespace mbb
