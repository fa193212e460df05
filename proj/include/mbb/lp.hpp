#pragma once

/**
 * @file lp.hpp
 * @brief Dense-basis revised simplex for equality-form linear programs.
 *
 * Problems are given as: optimize c'x subject to A x = b, x >= 0, with A
 * stored column-sparse. Inequalities are expressed by adding explicit slack
 * columns at build time. The solver runs a textbook two-phase revised
 * simplex: phase 1 drives artificial variables out of an all-artificial
 * basis, phase 2 prices with Dantzig's rule and falls back to Bland's rule
 * after a degeneracy streak. The basis inverse is maintained as a dense LU
 * factorization plus an eta file (product form), refactorized periodically.
 * Infeasible problems return a Farkas certificate y with y'A <= 0, y'b > 0.
 * Everything is deterministic: ties break by index.
 */

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <utility>
#include <vector>

#include "mbb/common.hpp"

namespace mbb {

enum class LPStatus { Optimal, Infeasible, Unbounded };

inline const char* to_string(LPStatus s) {
  switch (s) {
    case LPStatus::Optimal: return "optimal";
    case LPStatus::Infeasible: return "infeasible";
    case LPStatus::Unbounded: return "unbounded";
  }
  return "?";
}

// Equality-form LP. One entry() call per nonzero.
class LinearProgram {
public:
  LinearProgram(int rows, int cols)
      : m_(rows), n_(cols), b_(rows, 0.0), c_(cols, 0.0), cols_(cols) {
    require(rows >= 0 && cols >= 0, ErrorKind::Precondition, "LP: negative size");
  }

  int rows() const { return m_; }
  int cols() const { return n_; }

  void entry(int i, int j, double v) {
    require(0 <= i && i < m_ && 0 <= j && j < n_, ErrorKind::Precondition,
            "LP entry out of range");
    if (v != 0.0) cols_[j].emplace_back(i, v);
  }
  void rhs(int i, double v) {
    require(0 <= i && i < m_, ErrorKind::Precondition, "LP rhs out of range");
    b_[i] = v;
  }
  void obj(int j, double v) {
    require(0 <= j && j < n_, ErrorKind::Precondition, "LP obj out of range");
    c_[j] = v;
  }
  void set_maximize(bool on) { maximize_ = on; }
  bool maximize() const { return maximize_; }

  const std::vector<std::pair<int, double>>& column(int j) const { return cols_[j]; }
  const std::vector<double>& rhs() const { return b_; }
  const std::vector<double>& obj() const { return c_; }

  double objective_value(const std::vector<double>& x) const {
    double s = 0.0;
    for (int j = 0; j < n_; ++j) s += c_[j] * x[j];
    return s;
  }

  // max_i |(A x - b)_i|, for diagnostics and tests.
  double residual(const std::vector<double>& x) const {
    std::vector<double> r(b_);
    for (int j = 0; j < n_; ++j)
      for (const auto& [i, v] : cols_[j]) r[i] -= v * x[j];
    double mx = 0.0;
    for (double ri : r) mx = std::max(mx, std::fabs(ri));
    return mx;
  }

private:
  int m_, n_;
  std::vector<double> b_, c_;
  std::vector<std::vector<std::pair<int, double>>> cols_;
  bool maximize_ = false;
};

struct LPSolution {
  LPStatus status = LPStatus::Optimal;
  double objective = 0.0;            // in the caller's sense (max or min)
  std::vector<double> x;             // primal values
  std::vector<double> y;             // row duals; c_j = y'a_j on the basis
  std::vector<double> reduced_costs; // c_j - y'a_j
  std::vector<double> farkas;        // set iff infeasible: y'A <= 0, y'b > 0
  std::vector<int> basis;            // basic column indices, reusable as warm start
  long iterations = 0;

  bool optimal() const { return status == LPStatus::Optimal; }
};

namespace detail {

// Dense LU with partial pivoting; solves B x = v and B' y = v. The matrix is
// indexed (row, position): column k holds the k-th basic column of A.
class DenseLU {
public:
  bool factor(int m, std::vector<double> colmajor) {
    m_ = m;
    a_ = std::move(colmajor);
    p_.resize(m);
    for (int i = 0; i < m; ++i) p_[i] = i;
    double scale = 0.0;
    for (double v : a_) scale = std::max(scale, std::fabs(v));
    double tiny = 1e-13 * std::max(1.0, scale);
    for (int k = 0; k < m; ++k) {
      int piv = k;
      double best = std::fabs(at(k, k));
      for (int i = k + 1; i < m; ++i) {
        double v = std::fabs(at(i, k));
        if (v > best) { best = v; piv = i; }
      }
      if (best < tiny) return false;
      if (piv != k) {
        std::swap(p_[k], p_[piv]);
        for (int j = 0; j < m; ++j) std::swap(at(k, j), at(piv, j));
      }
      double dkk = at(k, k);
      for (int i = k + 1; i < m; ++i) {
        double l = at(i, k) / dkk;
        at(i, k) = l;
        if (l == 0.0) continue;
        for (int j = k + 1; j < m; ++j) at(i, j) -= l * at(k, j);
      }
    }
    return true;
  }

  // v := B^{-1} v  (v enters indexed by row, leaves indexed by position)
  void ftran(std::vector<double>& v) const {
    tmp_.resize(m_);
    for (int i = 0; i < m_; ++i) tmp_[i] = v[p_[i]];
    for (int i = 1; i < m_; ++i) {
      double s = tmp_[i];
      for (int j = 0; j < i; ++j) s -= at(i, j) * tmp_[j];
      tmp_[i] = s;
    }
    for (int i = m_ - 1; i >= 0; --i) {
      double s = tmp_[i];
      for (int j = i + 1; j < m_; ++j) s -= at(i, j) * tmp_[j];
      tmp_[i] = s / at(i, i);
    }
    v = tmp_;
  }

  // v := B'^{-1} v  (v enters indexed by position, leaves indexed by row)
  void btran(std::vector<double>& v) const {
    tmp_.resize(m_);
    for (int i = 0; i < m_; ++i) {
      double s = v[i];
      for (int j = 0; j < i; ++j) s -= at(j, i) * tmp_[j];
      tmp_[i] = s / at(i, i);
    }
    for (int i = m_ - 1; i >= 0; --i) {
      double s = tmp_[i];
      for (int j = i + 1; j < m_; ++j) s -= at(j, i) * tmp_[j];
      tmp_[i] = s;
    }
    for (int i = 0; i < m_; ++i) v[p_[i]] = tmp_[i];
  }

private:
  int m_ = 0;
  std::vector<double> a_;
  std::vector<int> p_;
  mutable std::vector<double> tmp_;

  double& at(int i, int j) { return a_[static_cast<std::size_t>(j) * m_ + i]; }
  double at(int i, int j) const { return a_[static_cast<std::size_t>(j) * m_ + i]; }
};

// Revised simplex working state. Column indices >= n are the artificials;
// artificial i has the single entry sign(b_i) in row i, so the initial basis
// is nonsingular and primal feasible regardless of the sign of b.
class Simplex {
public:
  explicit Simplex(const LinearProgram& lp) : lp_(lp), m_(lp.rows()), n_(lp.cols()) {
    cmin_ = lp.obj();
    if (lp.maximize())
      for (double& v : cmin_) v = -v;
    maxb_ = 0.0;
    double maxc = 0.0;
    for (double v : lp.rhs()) maxb_ = std::max(maxb_, std::fabs(v));
    for (double v : cmin_) maxc = std::max(maxc, std::fabs(v));
    feastol_ = 1e-9 * (1.0 + maxb_);
    costtol_ = 1e-9 * (1.0 + maxc);
    art_sign_.resize(m_);
    for (int i = 0; i < m_; ++i) art_sign_[i] = lp.rhs()[i] < 0.0 ? -1.0 : 1.0;
  }

  LPSolution run(const std::vector<int>* warm, bool feasibility_only) {
    LPSolution out;
    if (m_ == 0) return trivial(out);
    if (!(warm && load_warm(*warm))) {
      load_artificial_basis();
      if (!phase1(out)) return out; // infeasible, certificate attached
    }
    if (!feasibility_only && !phase2(out)) return out; // unbounded
    finalize(out);
    return out;
  }

private:
  const LinearProgram& lp_;
  int m_, n_;
  std::vector<double> cmin_;
  std::vector<double> art_sign_;
  double maxb_ = 0.0, feastol_ = 0.0, costtol_ = 0.0;
  bool phase1_mode_ = false;

  std::vector<int> basis_;        // column index per basis position
  std::vector<uint8_t> in_basis_; // size n_ + m_
  std::vector<double> xb_;        // basic values by position

  DenseLU lu_;
  struct Eta { std::vector<double> d; int r; };
  std::vector<Eta> etas_;
  long iters_ = 0;
  static constexpr long kMaxIters = 400000;
  static constexpr int kRefactorEvery = 100;
  static constexpr int kDegenerateStreak = 40;

  double cost_of(int j) const {
    if (j >= n_) return phase1_mode_ ? 1.0 : 0.0;
    return phase1_mode_ ? 0.0 : cmin_[j];
  }

  LPSolution& trivial(LPSolution& out) {
    out.x.assign(n_, 0.0);
    for (int j = 0; j < n_; ++j)
      if (cmin_[j] < -costtol_) { out.status = LPStatus::Unbounded; return out; }
    out.status = LPStatus::Optimal;
    out.reduced_costs = lp_.obj();
    return out;
  }

  void dense_column(int j, std::vector<double>& col) const {
    col.assign(m_, 0.0);
    if (j < n_) {
      for (const auto& [i, v] : lp_.column(j)) col[i] += v;
    } else {
      col[j - n_] = art_sign_[j - n_];
    }
  }

  void load_artificial_basis() {
    basis_.resize(m_);
    in_basis_.assign(n_ + m_, 0);
    for (int i = 0; i < m_; ++i) {
      basis_[i] = n_ + i;
      in_basis_[n_ + i] = 1;
    }
    refactor();
  }

  bool load_warm(const std::vector<int>& warm) {
    if (static_cast<int>(warm.size()) != m_) return false;
    std::vector<uint8_t> seen(n_ + m_, 0);
    for (int j : warm) {
      if (j < 0 || j >= n_ + m_ || seen[j]) return false;
      seen[j] = 1;
    }
    basis_ = warm;
    in_basis_ = std::move(seen);
    etas_.clear();
    if (!refactor_lu()) return false;
    compute_xb();
    for (double v : xb_)
      if (v < -10.0 * feastol_) return false;
    for (double& v : xb_) v = std::max(v, 0.0);
    return true;
  }

  bool refactor_lu() {
    std::vector<double> bmat(static_cast<std::size_t>(m_) * m_, 0.0);
    for (int k = 0; k < m_; ++k) {
      int j = basis_[k];
      if (j < n_) {
        for (const auto& [i, v] : lp_.column(j))
          bmat[static_cast<std::size_t>(k) * m_ + i] += v;
      } else {
        bmat[static_cast<std::size_t>(k) * m_ + (j - n_)] = art_sign_[j - n_];
      }
    }
    return lu_.factor(m_, std::move(bmat));
  }

  void refactor() {
    require(refactor_lu(), ErrorKind::Numeric, "simplex basis became singular");
    etas_.clear();
    compute_xb();
  }

  void compute_xb() {
    xb_ = lp_.rhs();
    solve_ftran(xb_);
  }

  void solve_ftran(std::vector<double>& v) const {
    lu_.ftran(v);
    for (const auto& e : etas_) {
      double t = v[e.r] / e.d[e.r];
      for (int i = 0; i < m_; ++i) v[i] -= e.d[i] * t;
      v[e.r] = t;
    }
  }

  void solve_btran(std::vector<double>& v) const {
    for (auto it = etas_.rbegin(); it != etas_.rend(); ++it) {
      double dv = 0.0;
      for (int i = 0; i < m_; ++i) dv += it->d[i] * v[i];
      v[it->r] = (v[it->r] * (1.0 + it->d[it->r]) - dv) / it->d[it->r];
    }
    lu_.btran(v);
  }

  void duals(std::vector<double>& y) const {
    y.resize(m_);
    for (int k = 0; k < m_; ++k) y[k] = cost_of(basis_[k]);
    solve_btran(y); // position-indexed c_B in, row-indexed y out
  }

  // Entering column: most negative reduced cost (Dantzig) or first negative
  // (Bland). Artificial columns never enter.
  int price(const std::vector<double>& y, bool bland) const {
    int best = -1;
    double bestd = -costtol_;
    for (int j = 0; j < n_; ++j) {
      if (in_basis_[j]) continue;
      double d = cost_of(j);
      for (const auto& [i, v] : lp_.column(j)) d -= y[i] * v;
      if (d < bestd) {
        if (bland) return j;
        bestd = d;
        best = j;
      }
    }
    return best;
  }

  // Ratio test over direction d. Zero-valued basic artificials may leave on a
  // degenerate pivot whichever way their entry points; that keeps them pinned
  // at zero after phase 1. Returns the leaving position or -1 (unbounded).
  int ratio_test(const std::vector<double>& d, double& t_out) const {
    const double pivtol = 1e-7;
    double best_t = std::numeric_limits<double>::infinity();
    int r = -1;
    double best_piv = 0.0;
    for (int i = 0; i < m_; ++i) {
      bool art = basis_[i] >= n_;
      double di = d[i];
      double t;
      if (di > pivtol) {
        t = std::max(xb_[i], 0.0) / di;
      } else if (art && di < -pivtol && xb_[i] <= feastol_) {
        t = 0.0;
      } else {
        continue;
      }
      double adi = std::fabs(di);
      if (r < 0 || t < best_t - 1e-12 * (1.0 + best_t)) {
        best_t = t; r = i; best_piv = adi;
      } else if (t <= best_t + 1e-12 * (1.0 + best_t)) {
        bool cur_art = basis_[r] >= n_;
        // tie: prefer kicking artificials, then take the stablest pivot
        if ((art && !cur_art) || (art == cur_art && adi > best_piv)) {
          best_t = std::min(best_t, t); r = i; best_piv = adi;
        }
      }
    }
    t_out = best_t;
    return r;
  }

  void pivot(int enter, int leave_row, const std::vector<double>& d, double t) {
    for (int i = 0; i < m_; ++i) xb_[i] -= d[i] * t;
    xb_[leave_row] = t;
    in_basis_[basis_[leave_row]] = 0;
    basis_[leave_row] = enter;
    in_basis_[enter] = 1;
    etas_.push_back({d, leave_row});
    if (static_cast<int>(etas_.size()) >= kRefactorEvery) refactor();
  }

  // Core loop for one phase. Returns false on unboundedness.
  bool iterate() {
    int degen_streak = 0;
    bool bland = false;
    std::vector<double> y, d;
    while (true) {
      if (++iters_ > kMaxIters) fail(ErrorKind::Numeric, "simplex iteration limit");
      duals(y);
      int enter = price(y, bland);
      if (enter < 0) return true;
      dense_column(enter, d);
      solve_ftran(d);
      double t;
      int r = ratio_test(d, t);
      if (r >= 0 && std::fabs(d[r]) < 1e-7 && !etas_.empty()) {
        // suspicious pivot through a stale inverse: refactor and retry
        refactor();
        dense_column(enter, d);
        solve_ftran(d);
        r = ratio_test(d, t);
      }
      if (r < 0) return false;
      pivot(enter, r, d, t);
      if (t < 1e-11) {
        if (++degen_streak >= kDegenerateStreak) bland = true;
      } else {
        degen_streak = 0;
        bland = false;
      }
    }
  }

  bool phase1(LPSolution& out) {
    phase1_mode_ = true;
    bool ok = iterate();
    require(ok, ErrorKind::Numeric, "phase 1 cannot be unbounded");
    double art_sum = 0.0;
    for (int i = 0; i < m_; ++i)
      if (basis_[i] >= n_) art_sum += std::max(xb_[i], 0.0);
    if (art_sum > 1e-7 * (1.0 + maxb_)) {
      out.status = LPStatus::Infeasible;
      out.x.assign(n_, 0.0);
      // phase-1 duals certify infeasibility: y'a_j <= 0 for every column
      // (optimal reduced costs are nonnegative) while y'b = art_sum > 0
      duals(out.farkas);
      out.iterations = iters_;
      phase1_mode_ = false;
      return false;
    }
    phase1_mode_ = false;
    return true;
  }

  bool phase2(LPSolution& out) {
    if (!iterate()) {
      out.status = LPStatus::Unbounded;
      out.x.assign(n_, 0.0);
      out.iterations = iters_;
      return false;
    }
    return true;
  }

  void finalize(LPSolution& out) {
    refactor(); // clean inverse for the final primal/dual extraction
    { // one step of iterative refinement on the basic values
      std::vector<double> r = lp_.rhs();
      for (int k = 0; k < m_; ++k) {
        int j = basis_[k];
        if (j < n_) {
          for (const auto& [i, v] : lp_.column(j)) r[i] -= v * xb_[k];
        } else {
          r[j - n_] -= art_sign_[j - n_] * xb_[k];
        }
      }
      solve_ftran(r);
      for (int k = 0; k < m_; ++k) xb_[k] += r[k];
    }
    out.status = LPStatus::Optimal;
    out.x.assign(n_, 0.0);
    for (int k = 0; k < m_; ++k) {
      int j = basis_[k];
      double v = xb_[k];
      if (v < 0.0) {
        require(v > -1e-6 * (1.0 + maxb_), ErrorKind::Numeric,
                "simplex produced a negative basic value");
        v = 0.0;
      }
      if (j < n_) {
        out.x[j] = v;
      } else {
        require(v <= 1e-6 * (1.0 + maxb_), ErrorKind::Numeric,
                "artificial stuck at a positive level");
      }
    }
    std::vector<double> ymin;
    duals(ymin);
    out.y.resize(m_);
    out.reduced_costs.resize(n_);
    double sgn = lp_.maximize() ? -1.0 : 1.0;
    for (int i = 0; i < m_; ++i) out.y[i] = sgn * ymin[i];
    for (int j = 0; j < n_; ++j) {
      double dj = lp_.obj()[j];
      for (const auto& [i, v] : lp_.column(j)) dj -= out.y[i] * v;
      out.reduced_costs[j] = dj;
    }
    out.objective = lp_.objective_value(out.x);
    out.basis = basis_;
    out.iterations = iters_;
  }
};

} // namespace detail

inline LPSolution solve_lp(const LinearProgram& lp) {
  detail::Simplex s(lp);
  return s.run(nullptr, false);
}

// Warm start from a previous basis over the same constraint matrix. Falls
// back to a cold start when the basis is unusable for the current data.
inline LPSolution solve_lp(const LinearProgram& lp, const std::vector<int>& warm_basis) {
  detail::Simplex s(lp);
  return s.run(&warm_basis, false);
}

// Phase 1 only: Optimal means feasible (x is some feasible point), otherwise
// Infeasible with a Farkas certificate.
inline LPSolution check_feasible(const LinearProgram& lp) {
  detail::Simplex s(lp);
  return s.run(nullptr, true);
}

} // namespace mbb
