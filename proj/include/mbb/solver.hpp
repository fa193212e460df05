#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <set>
#include <sstream>
#include <utility>
#include <vector>

#include "mbb/common.hpp"
#include "mbb/convex_pl.hpp"
#include "mbb/coupling.hpp"
#include "mbb/instance.hpp"
#include "mbb/lp.hpp"
#include "mbb/measure.hpp"
#include "mbb/rng.hpp"

namespace mbb {

struct PrimalSolution {
  double value;
  std::vector<double> q;        // row-major over ((ix * ny + iy) * nz + iz)
  MartingaleTransport sbm;      // (x,y)-marginal of q
  std::vector<double> per_x_mcov;
  // raw equality multipliers, kept for certificate extraction
  std::vector<double> dual_m;   // per (ix, iz)
  std::vector<double> dual_psi; // per iy
  std::vector<double> dual_h;   // per (ix, coord)
  long iterations;
};

namespace detail {

// Rows: (i) one per (x,z) pair, (ii) one per y, (iii) d per x.
inline LinearProgram primal_lp(const Instance& inst) {
  int nx = static_cast<int>(inst.mu.size());
  int ny = static_cast<int>(inst.nu.size());
  int nz = static_cast<int>(inst.gamma.size());
  int d = inst.dim();
  LinearProgram lp(nx * nz + ny + nx * d, nx * ny * nz);
  for (int ix = 0; ix < nx; ++ix) {
    const Point& x = inst.mu.point(static_cast<std::size_t>(ix));
    for (int iy = 0; iy < ny; ++iy) {
      const Point& y = inst.nu.point(static_cast<std::size_t>(iy));
      for (int iz = 0; iz < nz; ++iz) {
        int var = (ix * ny + iy) * nz + iz;
        lp.entry(ix * nz + iz, var, 1.0);
        lp.entry(nx * nz + iy, var, 1.0);
        for (int k = 0; k < d; ++k) {
          double c = y[k] - x[k];
          if (c != 0.0) lp.entry(nx * nz + ny + ix * d + k, var, c);
        }
        lp.obj(var, dot(y, inst.gamma.point(static_cast<std::size_t>(iz))));
      }
    }
  }
  for (int ix = 0; ix < nx; ++ix)
    for (int iz = 0; iz < nz; ++iz)
      lp.rhs(ix * nz + iz, inst.mu.weight(static_cast<std::size_t>(ix)) *
                               inst.gamma.weight(static_cast<std::size_t>(iz)));
  for (int iy = 0; iy < ny; ++iy)
    lp.rhs(nx * nz + iy, inst.nu.weight(static_cast<std::size_t>(iy)));
  lp.set_maximize(true);
  return lp;
}

} // namespace detail

// Solve the finite mixed-coupling LP and project out the optimal kernel.
inline PrimalSolution solve_primal(const Instance& inst) {
  int nx = static_cast<int>(inst.mu.size());
  int ny = static_cast<int>(inst.nu.size());
  int nz = static_cast<int>(inst.gamma.size());
  int d = inst.dim();
  auto lp = detail::primal_lp(inst);
  auto sol = solve_lp(lp);
  if (sol.status == LPStatus::Infeasible) {
    double yb = 0.0;
    for (int i = 0; i < lp.rows(); ++i) yb += sol.farkas[static_cast<std::size_t>(i)] * lp.rhs()[static_cast<std::size_t>(i)];
    std::ostringstream os;
    os << "solve_primal: LP infeasible despite convex order; certificate y'b = " << yb;
    fail(ErrorKind::Numeric, os.str());
  }
  require(sol.optimal(), ErrorKind::Numeric, "solve_primal: LP did not reach optimality");

  std::vector<double> xy(static_cast<std::size_t>(nx) * ny, 0.0);
  std::vector<double> perx(static_cast<std::size_t>(nx), 0.0);
  for (int ix = 0; ix < nx; ++ix) {
    for (int iy = 0; iy < ny; ++iy) {
      const Point& y = inst.nu.point(static_cast<std::size_t>(iy));
      for (int iz = 0; iz < nz; ++iz) {
        double m = sol.x[static_cast<std::size_t>((ix * ny + iy) * nz + iz)];
        if (m == 0.0) continue;
        xy[static_cast<std::size_t>(ix * ny + iy)] += m;
        perx[static_cast<std::size_t>(ix)] +=
            m * dot(y, inst.gamma.point(static_cast<std::size_t>(iz)));
      }
    }
    perx[static_cast<std::size_t>(ix)] /= inst.mu.weight(static_cast<std::size_t>(ix));
  }
  return PrimalSolution{
      sol.objective,
      sol.x,
      MartingaleTransport(Coupling(inst.mu, inst.nu, std::move(xy))),
      std::move(perx),
      {sol.y.begin(), sol.y.begin() + nx * nz},
      {sol.y.begin() + nx * nz, sol.y.begin() + nx * nz + ny},
      {sol.y.begin() + nx * nz + ny, sol.y.begin() + nx * nz + ny + nx * d},
      sol.iterations};
}

struct DualCertificate {
  std::vector<double> psi_hat;  // on spt nu, min exactly 0
  std::vector<double> h;        // per (x, coord)
  std::vector<double> m;        // tightened multipliers per (x, z)
  std::vector<double> phi_hat;  // per x
  double value = 0.0;
  double feasibility_residual = 0.0; // max violation of the dual inequality
  std::size_t anchor = 0;
};

// Normalize the raw multipliers to the canonical affine representative and
// tighten m so the dual inequality holds with equality at some y per (x,z).
inline DualCertificate extract_dual(const Instance& inst, const PrimalSolution& ps) {
  int nx = static_cast<int>(inst.mu.size());
  int ny = static_cast<int>(inst.nu.size());
  int nz = static_cast<int>(inst.gamma.size());
  int d = inst.dim();

  // anchor: barycenter-nearest nu atom, interior ones preferred
  Point nb = barycenter(inst.nu);
  std::size_t anchor = inst.nu.size();
  double bestd = std::numeric_limits<double>::infinity();
  for (int pass = 0; pass < 2 && anchor == inst.nu.size(); ++pass) {
    for (std::size_t j = 0; j < inst.nu.size(); ++j) {
      if (pass == 0 && inst.geometry.classify(inst.nu.point(j)) != Region::Interior) continue;
      double dj = norm2(inst.nu.point(j) - nb);
      if (dj < bestd) {
        bestd = dj;
        anchor = j;
      }
    }
    if (anchor != inst.nu.size()) break;
  }
  const Point& ya = inst.nu.point(anchor);

  std::vector<Point> ypts;
  ypts.reserve(inst.nu.size());
  for (const auto& a : inst.nu.atoms()) ypts.push_back(a.x);
  auto env = envelope(ypts, ps.dual_psi);
  Point g0 = env.support_slope(ya);
  double beta = env(ya) - dot(g0, ya);

  DualCertificate cert;
  cert.anchor = anchor;
  cert.psi_hat.resize(static_cast<std::size_t>(ny));
  for (int j = 0; j < ny; ++j)
    cert.psi_hat[static_cast<std::size_t>(j)] =
        ps.dual_psi[static_cast<std::size_t>(j)] - (dot(g0, ypts[static_cast<std::size_t>(j)]) + beta);
  double shift = *std::min_element(cert.psi_hat.begin(), cert.psi_hat.end());
  for (auto& v : cert.psi_hat) v -= shift;

  cert.h.resize(static_cast<std::size_t>(nx) * d);
  for (int i = 0; i < nx; ++i)
    for (int k = 0; k < d; ++k)
      cert.h[static_cast<std::size_t>(i * d + k)] = ps.dual_h[static_cast<std::size_t>(i * d + k)] + g0[k];

  // tightened m: the least feasible multiplier given psi_hat and h
  cert.m.assign(static_cast<std::size_t>(nx) * nz, 0.0);
  cert.phi_hat.assign(static_cast<std::size_t>(nx), 0.0);
  double resid = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < nx; ++i) {
    const Point& x = inst.mu.point(static_cast<std::size_t>(i));
    Point hi;
    hi.dim = d;
    for (int k = 0; k < d; ++k) hi[k] = cert.h[static_cast<std::size_t>(i * d + k)];
    for (int iz = 0; iz < nz; ++iz) {
      const Point& z = inst.gamma.point(static_cast<std::size_t>(iz));
      double mt = -std::numeric_limits<double>::infinity();
      for (int j = 0; j < ny; ++j) {
        const Point& y = ypts[static_cast<std::size_t>(j)];
        mt = std::max(mt, dot(y, z) - cert.psi_hat[static_cast<std::size_t>(j)] - dot(hi, y - x));
      }
      cert.m[static_cast<std::size_t>(i * nz + iz)] = mt;
      cert.phi_hat[static_cast<std::size_t>(i)] -= inst.gamma.weight(static_cast<std::size_t>(iz)) * mt;
      for (int j = 0; j < ny; ++j) {
        const Point& y = ypts[static_cast<std::size_t>(j)];
        resid = std::max(resid, dot(y, z) - mt - cert.psi_hat[static_cast<std::size_t>(j)] - dot(hi, y - x));
      }
    }
  }
  cert.feasibility_residual = resid;

  double vpsi = 0.0, vphi = 0.0;
  for (int j = 0; j < ny; ++j) vpsi += inst.nu.weight(static_cast<std::size_t>(j)) * cert.psi_hat[static_cast<std::size_t>(j)];
  for (int i = 0; i < nx; ++i) vphi += inst.mu.weight(static_cast<std::size_t>(i)) * cert.phi_hat[static_cast<std::size_t>(i)];
  cert.value = vpsi - vphi;

  require(std::fabs(cert.value - ps.value) <= tol::lp * (1.0 + std::fabs(ps.value)),
          ErrorKind::Numeric, "extract_dual: duality gap beyond tolerance");
  return cert;
}

struct IrreducibilityReport {
  bool irreducible;
  double t; // optimal uniform kernel floor
  MartingaleTransport witness;
};

// Maximize the uniform floor t with pi(x,y) >= t over all atom pairs.
inline IrreducibilityReport irreducibility(const Instance& inst) {
  int nm = static_cast<int>(inst.mu.size());
  int nn = static_cast<int>(inst.nu.size());
  int d = inst.dim();
  int base = nm + nn + nm * d;
  int npairs = nm * nn;
  // columns: pi (npairs), t, floor slacks (npairs)
  LinearProgram lp(base + npairs, npairs + 1 + npairs);
  for (int i = 0; i < nm; ++i)
    for (int j = 0; j < nn; ++j) {
      int var = i * nn + j;
      lp.entry(i, var, 1.0);
      lp.entry(nm + j, var, 1.0);
      for (int k = 0; k < d; ++k)
        lp.entry(nm + nn + i * d + k, var, inst.nu.point(static_cast<std::size_t>(j))[k]);
      lp.entry(base + var, var, 1.0);
      lp.entry(base + var, npairs, -1.0);
      lp.entry(base + var, npairs + 1 + var, -1.0);
    }
  for (int i = 0; i < nm; ++i) {
    double w = inst.mu.weight(static_cast<std::size_t>(i));
    lp.rhs(i, w);
    for (int k = 0; k < d; ++k)
      lp.rhs(nm + nn + i * d + k, w * inst.mu.point(static_cast<std::size_t>(i))[k]);
  }
  for (int j = 0; j < nn; ++j) lp.rhs(nm + j, inst.nu.weight(static_cast<std::size_t>(j)));
  lp.obj(npairs, 1.0);
  lp.set_maximize(true);
  auto sol = solve_lp(lp);
  require(sol.optimal(), ErrorKind::Numeric, "irreducibility: LP failed");
  std::vector<double> mass(sol.x.begin(), sol.x.begin() + npairs);
  return IrreducibilityReport{sol.objective > tol::irr, sol.objective,
                              MartingaleTransport(Coupling(inst.mu, inst.nu, std::move(mass)))};
}

struct Localized {
  Instance instance;
  MartingaleTransport kernel;
};

// Restrict mu to B, push nu forward through the optimal kernel rows.
inline Localized localize(const Instance& inst, const PrimalSolution& ps,
                          std::vector<std::size_t> B) {
  std::sort(B.begin(), B.end());
  B.erase(std::unique(B.begin(), B.end()), B.end());
  require(!B.empty(), ErrorKind::Precondition, "localize: empty subset");
  require(B.back() < inst.mu.size(), ErrorKind::Precondition, "localize: index out of range");
  double massB = 0.0;
  for (auto i : B) massB += inst.mu.weight(i);

  std::vector<Atom> muAtoms;
  for (auto i : B) muAtoms.push_back({inst.mu.point(i), inst.mu.weight(i) / massB});
  auto muB = DiscreteMeasure::make(std::move(muAtoms));

  std::size_t ny = inst.nu.size();
  std::vector<double> col(ny, 0.0);
  for (auto i : B)
    for (std::size_t j = 0; j < ny; ++j) col[j] += ps.sbm.mass(i, j) / massB;
  std::vector<Atom> nuAtoms;
  std::vector<std::size_t> keep;
  for (std::size_t j = 0; j < ny; ++j)
    if (col[j] > 0.0) {
      nuAtoms.push_back({inst.nu.point(j), col[j]});
      keep.push_back(j);
    }
  auto nuB = DiscreteMeasure::make(std::move(nuAtoms));

  std::vector<double> mass(B.size() * keep.size(), 0.0);
  for (std::size_t a = 0; a < B.size(); ++a)
    for (std::size_t b = 0; b < keep.size(); ++b)
      mass[a * keep.size() + b] = ps.sbm.mass(B[a], keep[b]) / massB;
  MartingaleTransport kernel(Coupling(muB, nuB, std::move(mass)));
  return Localized{make_instance(std::move(muB), std::move(nuB), inst.gamma), std::move(kernel)};
}

// A vertex of the martingale polytope chosen by a seeded random objective.
inline MartingaleTransport sample_mt(const Instance& inst, std::uint64_t seed) {
  auto lp = detail::martingale_lp(inst.mu, inst.nu);
  Rng rng(seed);
  for (int j = 0; j < lp.cols(); ++j) lp.obj(j, rng.uniform(-1.0, 1.0));
  lp.set_maximize(true);
  auto sol = solve_lp(lp);
  require(sol.optimal(), ErrorKind::Numeric, "sample_mt: LP failed");
  return MartingaleTransport(Coupling(inst.mu, inst.nu, sol.x));
}

struct FullSupportResolve {
  MartingaleTransport kernel;
  double t;     // minimal kernel mass across atom pairs
  double value; // objective of the re-solved coupling
};

// Re-solve the primal restricted to near-optimal couplings, maximizing the
// smallest kernel entry; separates forced zeros from degenerate vertex zeros.
inline FullSupportResolve resolve_full_support(const Instance& inst, const PrimalSolution& ps,
                                               double value_slack = 1e-6) {
  int nx = static_cast<int>(inst.mu.size());
  int ny = static_cast<int>(inst.nu.size());
  int nz = static_cast<int>(inst.gamma.size());
  int d = inst.dim();
  int nq = nx * ny * nz;
  int base = nx * nz + ny + nx * d;
  int npairs = nx * ny;
  // rows: primal equalities, objective floor, one floor row per (x,y) pair
  // cols: q, t, floor slack s0, pair slacks
  LinearProgram lp(base + 1 + npairs, nq + 2 + npairs);
  for (int ix = 0; ix < nx; ++ix) {
    const Point& x = inst.mu.point(static_cast<std::size_t>(ix));
    for (int iy = 0; iy < ny; ++iy) {
      const Point& y = inst.nu.point(static_cast<std::size_t>(iy));
      for (int iz = 0; iz < nz; ++iz) {
        int var = (ix * ny + iy) * nz + iz;
        lp.entry(ix * nz + iz, var, 1.0);
        lp.entry(nx * nz + iy, var, 1.0);
        for (int k = 0; k < d; ++k) {
          double c = y[k] - x[k];
          if (c != 0.0) lp.entry(nx * nz + ny + ix * d + k, var, c);
        }
        double cobj = dot(y, inst.gamma.point(static_cast<std::size_t>(iz)));
        if (cobj != 0.0) lp.entry(base, var, cobj);
        lp.entry(base + 1 + ix * ny + iy, var, 1.0);
      }
    }
  }
  lp.entry(base, nq + 1, -1.0); // floor slack
  for (int p = 0; p < npairs; ++p) {
    lp.entry(base + 1 + p, nq, -1.0);
    lp.entry(base + 1 + p, nq + 2 + p, -1.0);
  }
  for (int ix = 0; ix < nx; ++ix)
    for (int iz = 0; iz < nz; ++iz)
      lp.rhs(ix * nz + iz, inst.mu.weight(static_cast<std::size_t>(ix)) *
                               inst.gamma.weight(static_cast<std::size_t>(iz)));
  for (int iy = 0; iy < ny; ++iy)
    lp.rhs(nx * nz + iy, inst.nu.weight(static_cast<std::size_t>(iy)));
  lp.rhs(base, ps.value - value_slack * (1.0 + std::fabs(ps.value)));
  lp.obj(nq, 1.0);
  lp.set_maximize(true);
  auto sol = solve_lp(lp);
  require(sol.optimal(), ErrorKind::Numeric, "resolve_full_support: LP failed");

  std::vector<double> xy(static_cast<std::size_t>(npairs), 0.0);
  double val = 0.0;
  for (int ix = 0; ix < nx; ++ix)
    for (int iy = 0; iy < ny; ++iy)
      for (int iz = 0; iz < nz; ++iz) {
        double m = sol.x[static_cast<std::size_t>((ix * ny + iy) * nz + iz)];
        xy[static_cast<std::size_t>(ix * ny + iy)] += m;
        val += m * dot(inst.nu.point(static_cast<std::size_t>(iy)),
                       inst.gamma.point(static_cast<std::size_t>(iz)));
      }
  return FullSupportResolve{MartingaleTransport(Coupling(inst.mu, inst.nu, std::move(xy))),
                            sol.objective, val};
}

} // namespace mbb
