#pragma once

#include <cmath>
#include <utility>

#include "mbb/common.hpp"
#include "mbb/coupling.hpp"
#include "mbb/geometry.hpp"
#include "mbb/measure.hpp"

namespace mbb {

// A solvable problem: marginals in convex order plus the centered mixing law.
// Instances are immutable once built; the factory checks the invariants and
// caches a martingale witness for reuse.
struct Instance {
  DiscreteMeasure mu;
  DiscreteMeasure nu;
  DiscreteMeasure gamma; // quantized mixing law, zero barycenter
  GeometrySummary geometry; // hull of spt nu
  MartingaleTransport witness;

  int dim() const { return nu.dim(); }
};

inline Instance make_instance(DiscreteMeasure mu, DiscreteMeasure nu, DiscreteMeasure gamma) {
  require(mu.dim() == nu.dim() && nu.dim() == gamma.dim(), ErrorKind::Precondition,
          "instance: dimensions differ");
  Point gb = barycenter(gamma);
  require(norm(gb) <= 1e-9 * (1.0 + spread(gamma)), ErrorKind::Precondition,
          "instance: mixing law is not centered");
  auto order = check_convex_order(mu, nu);
  if (!order.ordered)
    fail(ErrorKind::Infeasible, "instance: marginals are not in convex order");
  auto geo = hull_geometry(nu);
  return Instance{std::move(mu), std::move(nu), std::move(gamma), std::move(geo),
                  std::move(*order.witness)};
}

} // namespace mbb
