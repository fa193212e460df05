#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <vector>

#include "mbb/instance.hpp"
#include "mbb/measure.hpp"
#include "mbb/rng.hpp"
#include "mbb/solver.hpp"
#include "mbb/transport.hpp"
#include "oracles.hpp"

using namespace mbb;
using Catch::Matchers::WithinAbs;

namespace {

DiscreteMeasure random_measure(Rng& rng, std::size_t n, int dim = 1) {
  auto w = rng.dirichlet(n);
  std::vector<Atom> atoms;
  for (std::size_t i = 0; i < n; ++i) {
    Point p;
    p.dim = dim;
    p[0] = rng.uniform(-2.0, 2.0);
    if (dim == 2) p[1] = rng.uniform(-2.0, 2.0);
    atoms.push_back({p, w[i]});
  }
  return DiscreteMeasure::make(std::move(atoms));
}

// mu = conditional expectation of nu over contiguous blocks, so mu <=_c nu
DiscreteMeasure coarsen(const DiscreteMeasure& nu, std::size_t nblocks) {
  std::vector<Atom> atoms;
  std::size_t n = nu.size();
  std::size_t base = n / nblocks, extra = n % nblocks, at = 0;
  for (std::size_t b = 0; b < nblocks; ++b) {
    std::size_t len = base + (b < extra ? 1 : 0);
    Point m;
    m.dim = nu.dim();
    double w = 0.0;
    for (std::size_t i = at; i < at + len; ++i) {
      w += nu.weight(i);
      m = m + nu.weight(i) * nu.point(i);
    }
    atoms.push_back({(1.0 / w) * m, w});
    at += len;
  }
  return DiscreteMeasure::make(std::move(atoms));
}

Instance random_instance(Rng& rng, int dim, std::size_t nmu, std::size_t nnu, int ngauss) {
  auto nu = random_measure(rng, nnu, dim);
  return make_instance(coarsen(nu, nmu), nu, quantize_gaussian(dim, ngauss));
}

DiscreteMeasure two_point(double a, double b, double wa = 0.5) {
  return DiscreteMeasure({{Point(a), wa}, {Point(b), 1.0 - wa}});
}

DiscreteMeasure dirac(const Point& p) { return DiscreteMeasure({{p, 1.0}}); }

} // namespace

TEST_CASE("optimal mixing value on canonical instances") {
  SECTION("one source splitting into a symmetric pair") {
    auto inst = make_instance(dirac(Point(0.0)), two_point(-1.0, 1.0), quantize_gaussian(1, 64));
    auto ps = solve_primal(inst);
    REQUIRE_THAT(ps.value, WithinAbs(mcov_1d(inst.nu, inst.gamma), 1e-9));
    REQUIRE_THAT(ps.value, WithinAbs(oracle::sqrt_2_over_pi, 1e-9));
    REQUIRE_THAT(ps.per_x_mcov[0], WithinAbs(ps.value, 1e-12));
    REQUIRE_THAT(ps.sbm.mass(0, 0), WithinAbs(0.5, 1e-9));
    REQUIRE_THAT(ps.sbm.mass(0, 1), WithinAbs(0.5, 1e-9));
  }

  SECTION("identical marginals stay put and earn nothing") {
    auto nu = DiscreteMeasure(
        {{Point(-1.0), 1.0 / 3}, {Point(0.0), 1.0 / 3}, {Point(1.0), 1.0 / 3}});
    auto inst = make_instance(nu, nu, quantize_gaussian(1, 16));
    auto ps = solve_primal(inst);
    REQUIRE_THAT(ps.value, WithinAbs(0.0, 1e-9));
    for (std::size_t i = 0; i < 3; ++i)
      for (std::size_t j = 0; j < 3; ++j)
        REQUIRE_THAT(ps.sbm.mass(i, j), WithinAbs(i == j ? nu.weight(i) : 0.0, 1e-9));
  }

  SECTION("planar source splitting into the four corners") {
    std::vector<Atom> corners;
    for (double sx : {-1.0, 1.0})
      for (double sy : {-1.0, 1.0}) corners.push_back({Point(sx, sy), 0.25});
    auto nu = DiscreteMeasure::make(std::move(corners));
    auto inst = make_instance(dirac(Point(0.0, 0.0)), nu, quantize_gaussian(2, 16));
    auto ps = solve_primal(inst);
    REQUIRE_THAT(ps.value, WithinAbs(mcov(nu, inst.gamma).value, 1e-8));
    REQUIRE(ps.value > 0.0);
  }
}

TEST_CASE("primal solutions satisfy the coupling invariants") {
  Rng rng(501);
  for (int trial = 0; trial < 8; ++trial) {
    int dim = trial < 5 ? 1 : 2;
    auto inst = dim == 1 ? random_instance(rng, 1, 3, 6, 8) : random_instance(rng, 2, 2, 5, 16);
    auto ps = solve_primal(inst);
    std::size_t nx = inst.mu.size(), ny = inst.nu.size(), nz = inst.gamma.size();

    // objective recomputation
    double val = 0.0;
    for (std::size_t ix = 0; ix < nx; ++ix)
      for (std::size_t iy = 0; iy < ny; ++iy)
        for (std::size_t iz = 0; iz < nz; ++iz)
          val += ps.q[(ix * ny + iy) * nz + iz] * dot(inst.nu.point(iy), inst.gamma.point(iz));
    REQUIRE_THAT(val, WithinAbs(ps.value, 1e-9 * (1.0 + std::fabs(ps.value))));
    REQUIRE(ps.value >= -1e-9);

    // (x,z) marginal is the product of mu and the mixing law
    for (std::size_t ix = 0; ix < nx; ++ix)
      for (std::size_t iz = 0; iz < nz; ++iz) {
        double s = 0.0;
        for (std::size_t iy = 0; iy < ny; ++iy) s += ps.q[(ix * ny + iy) * nz + iz];
        REQUIRE_THAT(s, WithinAbs(inst.mu.weight(ix) * inst.gamma.weight(iz), 1e-9));
      }

    // y marginal is nu
    for (std::size_t iy = 0; iy < ny; ++iy) {
      double s = 0.0;
      for (std::size_t ix = 0; ix < nx; ++ix)
        for (std::size_t iz = 0; iz < nz; ++iz) s += ps.q[(ix * ny + iy) * nz + iz];
      REQUIRE_THAT(s, WithinAbs(inst.nu.weight(iy), 1e-9));
    }

    // conditional means are pinned (also enforced by the transport wrapper)
    REQUIRE(ps.sbm.coupling().mean_defect() <= 1e-8);

    // the per-source decomposition averages back to the value and each term
    // is itself the optimal mixing payoff of its kernel row
    double avg = 0.0;
    for (std::size_t ix = 0; ix < nx; ++ix) {
      avg += inst.mu.weight(ix) * ps.per_x_mcov[ix];
      REQUIRE(ps.per_x_mcov[ix] >= -1e-9);
      auto row = ps.sbm.kernel(ix);
      double best = dim == 1 ? mcov_1d(row, inst.gamma) : mcov(row, inst.gamma).value;
      REQUIRE_THAT(ps.per_x_mcov[ix], WithinAbs(best, 1e-7));
    }
    REQUIRE_THAT(avg, WithinAbs(ps.value, 1e-8 * (1.0 + std::fabs(ps.value))));
  }
}

TEST_CASE("dual certificates close the gap and are normalized") {
  Rng rng(502);
  for (int trial = 0; trial < 6; ++trial) {
    int dim = trial < 4 ? 1 : 2;
    auto inst = dim == 1 ? random_instance(rng, 1, 3, 6, 8) : random_instance(rng, 2, 2, 5, 16);
    auto ps = solve_primal(inst);
    auto cert = extract_dual(inst, ps);

    REQUIRE(*std::min_element(cert.psi_hat.begin(), cert.psi_hat.end()) == 0.0);
    REQUIRE(cert.feasibility_residual >= 0.0);
    REQUIRE(cert.feasibility_residual <= 1e-12);
    REQUIRE_THAT(cert.value, WithinAbs(ps.value, 1e-8 * (1.0 + std::fabs(ps.value))));

    // value identity recomputed from the parts
    double vpsi = 0.0, vphi = 0.0;
    for (std::size_t j = 0; j < inst.nu.size(); ++j)
      vpsi += inst.nu.weight(j) * cert.psi_hat[j];
    for (std::size_t i = 0; i < inst.mu.size(); ++i)
      vphi += inst.mu.weight(i) * cert.phi_hat[i];
    REQUIRE_THAT(cert.value, WithinAbs(vpsi - vphi, 1e-12 * (1.0 + std::fabs(cert.value))));

    // phi_hat is the mixing average of the tightened multipliers
    for (std::size_t i = 0; i < inst.mu.size(); ++i) {
      double s = 0.0;
      for (std::size_t iz = 0; iz < inst.gamma.size(); ++iz)
        s -= inst.gamma.weight(iz) * cert.m[i * inst.gamma.size() + iz];
      REQUIRE_THAT(cert.phi_hat[i], WithinAbs(s, 1e-12));
    }
  }

  SECTION("symmetric pair gets a symmetric potential") {
    auto inst = make_instance(dirac(Point(0.0)), two_point(-1.0, 1.0), quantize_gaussian(1, 32));
    auto cert = extract_dual(inst, solve_primal(inst));
    REQUIRE_THAT(cert.psi_hat[0], WithinAbs(0.0, 1e-12));
    REQUIRE_THAT(cert.psi_hat[1], WithinAbs(0.0, 1e-12));
  }

  SECTION("identical two-point marginals get the zero potential") {
    auto m = two_point(-1.0, 1.0);
    auto inst = make_instance(m, m, quantize_gaussian(1, 16));
    auto cert = extract_dual(inst, solve_primal(inst));
    REQUIRE_THAT(cert.value, WithinAbs(0.0, 1e-9));
    REQUIRE_THAT(cert.psi_hat[0], WithinAbs(0.0, 1e-10));
    REQUIRE_THAT(cert.psi_hat[1], WithinAbs(0.0, 1e-10));
  }

  SECTION("an interior frozen atom forces a kink of mixing size") {
    // With mu = nu, any source atom flanked on both sides binds the dual:
    // complementary slackness pins m(x,z) = <x,z> - psi(x), and feasibility
    // against both neighbors then needs psi(y+) + psi(y-) - 2 psi(x) >=
    // 2 max|z|.  The zero potential is NOT dual-feasible here.
    auto nu = DiscreteMeasure(
        {{Point(-1.0), 1.0 / 3}, {Point(0.0), 1.0 / 3}, {Point(1.0), 1.0 / 3}});
    auto inst = make_instance(nu, nu, quantize_gaussian(1, 16));
    auto cert = extract_dual(inst, solve_primal(inst));
    REQUIRE_THAT(cert.value, WithinAbs(0.0, 1e-9));
    double zmax = 0.0;
    for (const auto& a : inst.gamma.atoms()) zmax = std::max(zmax, std::fabs(a.x[0]));
    REQUIRE(cert.psi_hat[0] + cert.psi_hat[2] - 2.0 * cert.psi_hat[1] >= 2.0 * zmax - 1e-8);
  }
}

TEST_CASE("irreducibility trichotomy") {
  SECTION("full spread from a single source") {
    auto inst = make_instance(dirac(Point(0.0)), two_point(-1.0, 1.0), quantize_gaussian(1, 8));
    auto rep = irreducibility(inst);
    REQUIRE(rep.irreducible);
    REQUIRE_THAT(rep.t, WithinAbs(0.5, 1e-9));
  }

  SECTION("frozen marginals cannot mix") {
    auto m = two_point(-1.0, 1.0);
    auto inst = make_instance(m, m, quantize_gaussian(1, 8));
    auto rep = irreducibility(inst);
    REQUIRE_FALSE(rep.irreducible);
    REQUIRE(rep.t <= 1e-10);
  }

  SECTION("two sources over three targets, max-min mass is 1/24") {
    // rows (p, 3/4-2p, p-1/4) and (s, 1/4-2s, s+1/4) with p+s = 1/3;
    // min entry is maximized where p-1/4 = 1/3-p, i.e. p = 7/24, t = 1/24
    auto inst = make_instance(
        two_point(-0.5, 0.5),
        DiscreteMeasure({{Point(-1.0), 1.0 / 3}, {Point(0.0), 1.0 / 3}, {Point(1.0), 1.0 / 3}}),
        quantize_gaussian(1, 8));
    auto rep = irreducibility(inst);
    REQUIRE(rep.irreducible);
    REQUIRE_THAT(rep.t, WithinAbs(1.0 / 24.0, 1e-9));
    double mn = 1.0;
    for (std::size_t i = 0; i < 2; ++i)
      for (std::size_t j = 0; j < 3; ++j) mn = std::min(mn, rep.witness.mass(i, j));
    REQUIRE_THAT(mn, WithinAbs(rep.t, 1e-9));
  }
}

TEST_CASE("localization restricts the problem consistently") {
  Rng rng(503);
  auto inst = random_instance(rng, 1, 3, 6, 8);
  auto ps = solve_primal(inst);

  SECTION("the full set reproduces the instance") {
    auto loc = localize(inst, ps, {0, 1, 2});
    REQUIRE(loc.instance.mu.size() == inst.mu.size());
    auto ps2 = solve_primal(loc.instance);
    REQUIRE_THAT(ps2.value, WithinAbs(ps.value, 1e-8 * (1.0 + std::fabs(ps.value))));
  }

  SECTION("a singleton isolates one source's payoff") {
    for (std::size_t i = 0; i < inst.mu.size(); ++i) {
      auto loc = localize(inst, ps, {i});
      REQUIRE(loc.instance.mu.size() == 1);
      REQUIRE(loc.instance.mu.point(0) == inst.mu.point(i));
      auto ps2 = solve_primal(loc.instance);
      REQUIRE_THAT(ps2.value,
                   WithinAbs(ps.per_x_mcov[i], 1e-7 * (1.0 + std::fabs(ps.per_x_mcov[i]))));
      // the restricted kernel attains the re-solved value
      double attained = 0.0;
      REQUIRE(loc.kernel.row_measure().size() == 1);
      attained = mcov_1d(loc.kernel.kernel(0), inst.gamma);
      REQUIRE_THAT(attained, WithinAbs(ps2.value, 1e-7 * (1.0 + std::fabs(ps2.value))));
    }
  }

  SECTION("pairs average their members' payoffs") {
    auto loc = localize(inst, ps, {0, 2});
    double mB = inst.mu.weight(0) + inst.mu.weight(2);
    double expect = (inst.mu.weight(0) * ps.per_x_mcov[0] + inst.mu.weight(2) * ps.per_x_mcov[2]) / mB;
    auto ps2 = solve_primal(loc.instance);
    REQUIRE_THAT(ps2.value, WithinAbs(expect, 1e-7 * (1.0 + std::fabs(expect))));
  }

  SECTION("bad subsets are rejected") {
    REQUIRE_THROWS_AS(localize(inst, ps, {}), Error);
    REQUIRE_THROWS_AS(localize(inst, ps, {17}), Error);
  }
}

TEST_CASE("martingale polytope sampling is seeded and valid") {
  auto inst = make_instance(
      two_point(-0.5, 0.5),
      DiscreteMeasure({{Point(-1.0), 1.0 / 3}, {Point(0.0), 1.0 / 3}, {Point(1.0), 1.0 / 3}}),
      quantize_gaussian(1, 8));

  auto a = sample_mt(inst, 11);
  auto b = sample_mt(inst, 11);
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t j = 0; j < 3; ++j) REQUIRE(a.mass(i, j) == b.mass(i, j));

  // several seeds all yield valid transports (validity enforced on build)
  for (std::uint64_t seed : {1ull, 2ull, 3ull, 4ull}) {
    auto s = sample_mt(inst, seed);
    REQUIRE(s.coupling().marginal_residual() <= 1e-8);
    REQUIRE(s.coupling().mean_defect() <= 1e-8);
  }

  // a Dirac source has a unique coupling
  auto d = make_instance(dirac(Point(0.0)), two_point(-1.0, 1.0), quantize_gaussian(1, 8));
  auto s1 = sample_mt(d, 5), s2 = sample_mt(d, 77);
  REQUIRE_THAT(s1.mass(0, 0), WithinAbs(0.5, 1e-9));
  REQUIRE_THAT(s2.mass(0, 1), WithinAbs(0.5, 1e-9));
}

TEST_CASE("near-optimal refinement spreads mass over irreducible pairs") {
  auto inst = make_instance(
      two_point(-0.5, 0.5),
      DiscreteMeasure({{Point(-1.0), 1.0 / 3}, {Point(0.0), 1.0 / 3}, {Point(1.0), 1.0 / 3}}),
      quantize_gaussian(1, 8));
  auto ps = solve_primal(inst);
  auto rep = resolve_full_support(inst, ps);
  REQUIRE(rep.t > 1e-10);
  REQUIRE(rep.value >= ps.value - 1e-6 * (1.0 + std::fabs(ps.value)) - 1e-12);
  REQUIRE(rep.value <= ps.value + 1e-9);
  double mn = 1.0;
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t j = 0; j < 3; ++j) mn = std::min(mn, rep.kernel.mass(i, j));
  REQUIRE(mn >= rep.t - 1e-9);

  // reducible instances stay at a zero floor
  auto m = two_point(-1.0, 1.0);
  auto frozen = make_instance(m, m, quantize_gaussian(1, 8));
  auto fps = solve_primal(frozen);
  auto frep = resolve_full_support(frozen, fps);
  REQUIRE(frep.t <= 1e-9);
}

TEST_CASE("instance construction guards") {
  auto small = two_point(-0.5, 0.5);
  auto wide = two_point(-1.0, 1.0);

  // spread marginals admit no martingale back toward the mean
  try {
    make_instance(wide, small, quantize_gaussian(1, 8));
    FAIL("expected rejection");
  } catch (const Error& e) {
    REQUIRE(e.kind() == ErrorKind::Infeasible);
  }

  // the mixing law must be centered
  try {
    make_instance(small, wide, dirac(Point(1.0)));
    FAIL("expected rejection");
  } catch (const Error& e) {
    REQUIRE(e.kind() == ErrorKind::Precondition);
  }

  // dimensions must agree
  REQUIRE_THROWS_AS(make_instance(small, wide, quantize_gaussian(2, 16)), Error);
}
