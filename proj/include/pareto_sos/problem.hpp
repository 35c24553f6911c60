#pragma once

// Vector rational optimization problem: minimize (p_1/q_1, ..., p_m/q_m)
// over Omega = {x : g_j(x) >= 0}, with Omega contained in a box.

#include <pareto_sos/poly.hpp>

#include <cmath>
#include <limits>
#include <span>
#include <vector>

namespace psos {

struct RationalObjective {
  Polynomial p;
  Polynomial q;

  double operator()(std::span<const double> x) const { return p.eval(x) / q.eval(x); }
};

struct Interval {
  double lo = -1.0;
  double hi = 1.0;
};

struct ProblemSpec {
  std::size_t n = 0;
  std::vector<RationalObjective> objectives;
  std::vector<Polynomial> constraints;
  std::vector<Interval> box;

  std::size_t num_objectives() const { return objectives.size(); }
  std::size_t num_constraints() const { return constraints.size(); }

  /// g_j(x) >= -tol for every constraint.
  bool feasible(std::span<const double> x, double tol = 1e-12) const {
    for (const auto& g : constraints)
      if (g.eval(x) < -tol) return false;
    return true;
  }

  double min_constraint(std::span<const double> x) const {
    double v = std::numeric_limits<double>::infinity();
    for (const auto& g : constraints) v = std::min(v, g.eval(x));
    return v;
  }

  std::vector<double> objective_values(std::span<const double> x) const {
    std::vector<double> f;
    f.reserve(objectives.size());
    for (const auto& o : objectives) f.push_back(o(x));
    return f;
  }

  bool is_unit_box(double tol = 0.0) const {
    if (box.size() != n) return false;
    for (const auto& b : box)
      if (std::abs(b.lo + 1.0) > tol || std::abs(b.hi - 1.0) > tol) return false;
    return true;
  }

  /// Replaces every (p, q) by (p q, q^2); keeps the ratio and makes the
  /// denominator nonnegative everywhere.
  ProblemSpec with_squared_denominators() const {
    ProblemSpec out = *this;
    for (auto& o : out.objectives) {
      o.p = o.p * o.q;
      o.q = o.q * o.q;
    }
    return out;
  }
};

}  // namespace psos
