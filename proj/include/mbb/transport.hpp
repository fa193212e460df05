#pragma once

#include <array>
#include <cmath>
#include <utility>
#include <vector>

#include "mbb/common.hpp"
#include "mbb/coupling.hpp"
#include "mbb/lp.hpp"
#include "mbb/measure.hpp"

namespace mbb {

namespace detail {

// Row sums then column sums; the last row is redundant and the simplex keeps a
// zero artificial pinned there.
inline LinearProgram marginal_lp(const DiscreteMeasure& p, const DiscreteMeasure& q) {
  int np = static_cast<int>(p.size());
  int nq = static_cast<int>(q.size());
  LinearProgram lp(np + nq, np * nq);
  for (int i = 0; i < np; ++i)
    for (int j = 0; j < nq; ++j) {
      lp.entry(i, i * nq + j, 1.0);
      lp.entry(np + j, i * nq + j, 1.0);
    }
  for (int i = 0; i < np; ++i) lp.rhs(i, p.weight(static_cast<std::size_t>(i)));
  for (int j = 0; j < nq; ++j) lp.rhs(np + j, q.weight(static_cast<std::size_t>(j)));
  return lp;
}

} // namespace detail

struct McovResult {
  double value = 0.0;
  Coupling plan;
};

// Maximal covariance: sup over couplings of the inner-product objective.
inline McovResult mcov(const DiscreteMeasure& p, const DiscreteMeasure& q) {
  require(p.dim() == q.dim(), ErrorKind::Precondition, "mcov: dimension mismatch");
  auto lp = detail::marginal_lp(p, q);
  int nq = static_cast<int>(q.size());
  for (int i = 0; i < static_cast<int>(p.size()); ++i)
    for (int j = 0; j < nq; ++j)
      lp.obj(i * nq + j, dot(p.point(static_cast<std::size_t>(i)),
                             q.point(static_cast<std::size_t>(j))));
  lp.set_maximize(true);
  auto sol = solve_lp(lp);
  require(sol.optimal(), ErrorKind::Numeric, "mcov: transport LP did not solve");
  return {sol.objective, Coupling(p, q, sol.x)};
}

// One-dimensional maximal covariance via the comonotone (quantile) coupling.
inline double mcov_1d(const DiscreteMeasure& p, const DiscreteMeasure& q) {
  require(p.dim() == 1 && q.dim() == 1, ErrorKind::Precondition, "mcov_1d: needs d = 1");
  // atoms are stored sorted, so walking both lists pairs quantiles
  std::size_t i = 0, j = 0;
  double ri = p.weight(0), rj = q.weight(0), s = 0.0;
  while (true) {
    double m = std::min(ri, rj);
    s += m * p.point(i)[0] * q.point(j)[0];
    ri -= m;
    rj -= m;
    if (ri <= 0.0) {
      if (++i == p.size()) break;
      ri = p.weight(i);
    }
    if (rj <= 0.0) {
      if (++j == q.size()) break;
      rj = q.weight(j);
    }
  }
  return s;
}

struct W2Report {
  double lp = 0.0;           // min-cost coupling value
  double via_identity = 0.0; // sm(p) - 2 mcov(p,q) + sm(q)
};

// Squared 2-Wasserstein distance, kept in both forms for the identity test.
inline W2Report w2sq_report(const DiscreteMeasure& p, const DiscreteMeasure& q) {
  require(p.dim() == q.dim(), ErrorKind::Precondition, "w2sq: dimension mismatch");
  auto lp = detail::marginal_lp(p, q);
  int nq = static_cast<int>(q.size());
  for (int i = 0; i < static_cast<int>(p.size()); ++i)
    for (int j = 0; j < nq; ++j) {
      Point diff = p.point(static_cast<std::size_t>(i)) - q.point(static_cast<std::size_t>(j));
      lp.obj(i * nq + j, norm2(diff));
    }
  auto sol = solve_lp(lp);
  require(sol.optimal(), ErrorKind::Numeric, "w2sq: transport LP did not solve");
  W2Report rep;
  rep.lp = sol.objective;
  rep.via_identity = second_moment(p) - 2.0 * mcov(p, q).value + second_moment(q);
  return rep;
}

inline double w2sq(const DiscreteMeasure& p, const DiscreteMeasure& q) {
  return w2sq_report(p, q).lp;
}

// Closed form in d = 1: the comonotone coupling is optimal for quadratic cost.
inline double w2sq_1d(const DiscreteMeasure& p, const DiscreteMeasure& q) {
  require(p.dim() == 1 && q.dim() == 1, ErrorKind::Precondition, "w2sq_1d: needs d = 1");
  std::size_t i = 0, j = 0;
  double ri = p.weight(0), rj = q.weight(0), s = 0.0;
  while (true) {
    double m = std::min(ri, rj);
    double diff = p.point(i)[0] - q.point(j)[0];
    s += m * diff * diff;
    ri -= m;
    rj -= m;
    if (ri <= 0.0) {
      if (++i == p.size()) break;
      ri = p.weight(i);
    }
    if (rj <= 0.0) {
      if (++j == q.size()) break;
      rj = q.weight(j);
    }
  }
  return s;
}

// Law of (A, B, Z) glued from a martingale kernel A -> B and a coupling A -> Z,
// conditionally independent given A.  Kept in factored form so the two pair
// marginals are bitwise the inputs.
class TripleLaw {
public:
  TripleLaw(MartingaleTransport pi1, Coupling pi2, double tol = tol::lp)
      : pi1_(std::move(pi1)), pi2_(std::move(pi2)) {
    const auto& a1 = pi1_.row_measure();
    const auto& a2 = pi2_.row_measure();
    require(a1.size() == a2.size() && a1.dim() == a2.dim(), ErrorKind::Precondition,
            "triple law: first marginals differ");
    for (std::size_t i = 0; i < a1.size(); ++i) {
      require(a1.point(i) == a2.point(i), ErrorKind::Precondition,
              "triple law: first marginals differ");
      require(std::fabs(a1.weight(i) - a2.weight(i)) <= tol, ErrorKind::Precondition,
              "triple law: first marginals differ");
    }
  }

  const DiscreteMeasure& a_measure() const { return pi1_.row_measure(); }
  const DiscreteMeasure& b_measure() const { return pi1_.col_measure(); }
  const DiscreteMeasure& z_measure() const { return pi2_.col_measure(); }

  double mass(std::size_t ia, std::size_t ib, std::size_t iz) const {
    return pi1_.mass(ia, ib) * pi2_.mass(ia, iz) / a_measure().weight(ia);
  }

  const Coupling& marginal_ab() const { return pi1_.coupling(); }
  const Coupling& marginal_az() const { return pi2_; }

  // max over charged (a, z) of |E[B | A=a, Z=z] - a|
  double conditional_mean_defect() const {
    const auto& a = a_measure();
    const auto& b = b_measure();
    double mx = 0.0;
    for (std::size_t ia = 0; ia < a.size(); ++ia)
      for (std::size_t iz = 0; iz < z_measure().size(); ++iz) {
        Point num;
        num.dim = b.dim();
        double den = 0.0;
        for (std::size_t ib = 0; ib < b.size(); ++ib) {
          double m = mass(ia, ib, iz);
          den += m;
          for (int k = 0; k < num.dim; ++k) num[k] += m * b.point(ib)[k];
        }
        if (den <= 0.0) continue;
        mx = std::max(mx, dist((1.0 / den) * num, a.point(ia)));
      }
    return mx;
  }

private:
  MartingaleTransport pi1_;
  Coupling pi2_;
};

// Glue a martingale kernel and a second coupling over their shared first
// marginal (the discrete Strassen gluing).
inline TripleLaw strassen_extend(MartingaleTransport pi1, Coupling pi2,
                                 double tol = tol::lp) {
  return TripleLaw(std::move(pi1), std::move(pi2), tol);
}

struct ChainReport {
  // product-coupling bound, mcov(alpha, zeta), mcov(beta, zeta), moment bound
  std::array<double, 4> value{};
  std::array<double, 3> gap{}; // consecutive differences, >= 0 up to tolerance
  bool monotone = false;
};

// For alpha <=_c beta the maximal covariance against a fixed zeta grows along
// the chain  <bary alpha, bary zeta>  <=  mcov(alpha, zeta)  <=  mcov(beta,
// zeta)  <=  (sm(beta) + sm(zeta)) / 2.
inline ChainReport verify_mcov_chain(const DiscreteMeasure& alpha,
                                     const DiscreteMeasure& beta,
                                     const DiscreteMeasure& zeta,
                                     double tol = tol::lp) {
  auto order = check_convex_order(alpha, beta);
  require(order.ordered, ErrorKind::Precondition,
          "verify_mcov_chain: alpha is not dominated by beta");
  ChainReport rep;
  rep.value[0] = dot(barycenter(alpha), barycenter(zeta));
  rep.value[1] = mcov(alpha, zeta).value;
  rep.value[2] = mcov(beta, zeta).value;
  rep.value[3] = 0.5 * (second_moment(beta) + second_moment(zeta));
  rep.monotone = true;
  for (int k = 0; k < 3; ++k) {
    rep.gap[k] = rep.value[k + 1] - rep.value[k];
    if (rep.gap[k] < -tol) rep.monotone = false;
  }
  return rep;
}

} // namespace mbb
