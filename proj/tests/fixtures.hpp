#pragma once

#include <pareto_sos/problem.hpp>

#include <cmath>

namespace fixtures {

using psos::Polynomial;
using psos::ProblemSpec;

inline Polynomial var(std::size_t n, std::size_t i) { return Polynomial::variable(n, i); }
inline Polynomial cst(std::size_t n, double c) { return Polynomial::constant(n, c); }

inline Polynomial unit_disk() {
  return cst(2, 1.0) - var(2, 0) * var(2, 0) - var(2, 1) * var(2, 1);
}

inline ProblemSpec on_disk() {
  ProblemSpec s;
  s.n = 2;
  s.box.assign(2, psos::Interval{});
  s.constraints.push_back(unit_disk());
  return s;
}

// (x1, x2, x1^2 + x2^2) on the unit disk.
inline ProblemSpec example1() {
  ProblemSpec s = on_disk();
  const Polynomial x1 = var(2, 0), x2 = var(2, 1), one = cst(2, 1.0);
  s.objectives = {{x1, one}, {x2, one}, {x1 * x1 + x2 * x2, one}};
  return s;
}

// (x1, (x2^2 - 2 x1 x2 + 1) / (x2^2 + 1)) on the unit disk.
inline ProblemSpec example2() {
  ProblemSpec s = on_disk();
  const Polynomial x1 = var(2, 0), x2 = var(2, 1), one = cst(2, 1.0);
  s.objectives = {{x1, one}, {x2 * x2 - 2.0 * x1 * x2 + one, x2 * x2 + one}};
  return s;
}

inline Polynomial bicorn() {
  const Polynomial x1 = var(2, 0), x2 = var(2, 1), one = cst(2, 1.0);
  const Polynomial inner = x1 * x1 + 2.0 * x2 - one;
  return x2 * x2 * (one - x1 * x1) - inner * inner;
}

// Rotated coordinates over the region enclosed by the bicorn.
inline ProblemSpec example3() {
  ProblemSpec s;
  s.n = 2;
  s.box.assign(2, psos::Interval{});
  s.constraints.push_back(bicorn());
  const double r = std::sqrt(2.0) / 2.0;
  const Polynomial x1 = var(2, 0), x2 = var(2, 1), one = cst(2, 1.0);
  s.objectives = {{r * (x2 - x1), one}, {r * (x1 + x2), one}};
  return s;
}

// (-x1^2, x1^4 + x2^2) on the unit disk.
inline ProblemSpec example5() {
  ProblemSpec s = on_disk();
  const Polynomial x1 = var(2, 0), x2 = var(2, 1), one = cst(2, 1.0);
  s.objectives = {{-1.0 * x1 * x1, one}, {x1.pow(4) + x2 * x2, one}};
  return s;
}

}  // namespace fixtures
