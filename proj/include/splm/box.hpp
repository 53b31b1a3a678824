#pragma once

#include "splm/types.hpp"

namespace splm {

/// Axis-aligned box {x : lower <= x <= upper} with nonempty interior and
/// finite bounds; the feasible set every solver here projects onto.
struct BoxSet {
  Vec lower;
  Vec upper;

  BoxSet() = default;
  BoxSet(Vec lo, Vec up) : lower(std::move(lo)), upper(std::move(up)) { validate(); }

  static BoxSet cube(int n, double lo, double hi) {
    return BoxSet(Vec::Constant(n, lo), Vec::Constant(n, hi));
  }

  int dim() const { return static_cast<int>(lower.size()); }

  Vec center() const { return 0.5 * (lower + upper); }

  /// Euclidean diameter ||upper - lower||.
  double diameter() const { return (upper - lower).norm(); }

  bool contains(const Vec& x, double tol = 0.0) const {
    return x.size() == lower.size() && (x.array() >= lower.array() - tol).all() &&
           (x.array() <= upper.array() + tol).all();
  }

  void validate() const {
    if (lower.size() != upper.size())
      throw ContractViolation("box bound dimensions differ");
    if (lower.size() == 0) throw ContractViolation("box is zero-dimensional");
    if (!lower.allFinite() || !upper.allFinite())
      throw ContractViolation("box bounds must be finite");
    if (!(lower.array() < upper.array()).all())
      throw ContractViolation("box requires lower < upper componentwise");
  }
};

/// Componentwise clamp of x onto the box.
inline Vec project_box(const Vec& x, const BoxSet& box) {
  if (x.size() != box.lower.size())
    throw ContractViolation("project_box: dimension mismatch");
  return x.cwiseMax(box.lower).cwiseMin(box.upper);
}

}  // namespace splm
