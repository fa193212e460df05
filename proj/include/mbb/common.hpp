#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

namespace mbb {

// Spec-facing tolerances. Internal solvers run tighter; these are the values
// invariants and acceptance checks are pinned to.
namespace tol {
inline constexpr double geom = 1e-9;       // hull classification band
inline constexpr double lp = 1e-8;         // LP-derived identities
inline constexpr double irr = 1e-10;       // irreducibility threshold
inline constexpr double weight_sum = 1e-12; // measure mass budget
inline constexpr double opt = 1e-6;        // optimizing-sequence criterion
inline constexpr double liminf = 1e-6;     // liminf margin
}

enum class ErrorKind {
  Precondition,   // caller violated a documented pre
  Parse,          // malformed input file
  Infeasible,     // constraint system has no solution
  Numeric,        // solver breakdown, never a silent wrong answer
  Budget,         // retry/redraw budget exhausted
};

class Error : public std::runtime_error {
public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const { return kind_; }

private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) {
  throw Error(kind, what);
}

inline void require(bool cond, ErrorKind kind, const std::string& what) {
  if (!cond) fail(kind, what);
}

inline bool close(double a, double b, double tol) { return std::fabs(a - b) <= tol; }

} // namespace mbb
