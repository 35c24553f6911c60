#pragma once

// Brute-force grid evaluation of the achievement function and of weak
// eps-efficiency, used as ground truth for the SOS approximations.

#include <pareto_sos/poly.hpp>
#include <pareto_sos/problem.hpp>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

namespace psos {

/// Uniform tensor grid including both endpoints of every interval.
class Grid {
 public:
  Grid(std::vector<Interval> box, std::vector<int> resolution) : box_(std::move(box)), res_(std::move(resolution)) {
    if (box_.empty() || box_.size() != res_.size()) throw std::invalid_argument("grid: box and resolution sizes differ");
    for (std::size_t d = 0; d < res_.size(); ++d) {
      if (res_[d] < 2) throw std::invalid_argument("grid: resolution must be at least 2");
      if (!(box_[d].lo < box_[d].hi)) throw std::invalid_argument("grid: empty interval");
    }
  }

  static Grid unit(std::size_t n, int resolution) {
    return Grid(std::vector<Interval>(n, Interval{}), std::vector<int>(n, resolution));
  }

  std::size_t dim() const { return box_.size(); }
  const std::vector<Interval>& box() const { return box_; }
  const std::vector<int>& resolution() const { return res_; }

  std::size_t size() const {
    std::size_t s = 1;
    for (int r : res_) s *= static_cast<std::size_t>(r);
    return s;
  }

  double spacing(std::size_t d) const { return (box_[d].hi - box_[d].lo) / (res_[d] - 1); }

  double max_spacing() const {
    double h = 0.0;
    for (std::size_t d = 0; d < dim(); ++d) h = std::max(h, spacing(d));
    return h;
  }

  double cell_volume() const {
    double v = 1.0;
    for (std::size_t d = 0; d < dim(); ++d) v *= spacing(d);
    return v;
  }

  /// Point with flat index `idx`; the first coordinate varies slowest.
  void point(std::size_t idx, std::span<double> out) const {
    for (std::size_t d = dim(); d-- > 0;) {
      const auto r = static_cast<std::size_t>(res_[d]);
      const std::size_t i = idx % r;
      idx /= r;
      out[d] = i + 1 == r ? box_[d].hi : box_[d].lo + static_cast<double>(i) * spacing(d);
    }
  }

  std::vector<double> point(std::size_t idx) const {
    std::vector<double> p(dim());
    point(idx, p);
    return p;
  }

  template <class F>
  void for_each(F&& f) const {
    std::vector<double> p(dim());
    for (std::size_t i = 0; i < size(); ++i) {
      point(i, p);
      f(std::span<const double>(p));
    }
  }

 private:
  std::vector<Interval> box_;
  std::vector<int> res_;
};

/// Feasible grid points with their objective values, row-major (point, objective).
struct CandidateSet {
  std::size_t n = 0;
  std::size_t m = 0;
  std::vector<double> points;
  std::vector<double> values;

  CandidateSet(const ProblemSpec& spec, const Grid& grid) : n(spec.n), m(spec.num_objectives()) {
    if (grid.dim() != spec.n) throw DimensionError("grid dimension mismatch");
    grid.for_each([&](std::span<const double> y) {
      if (!spec.feasible(y, 1e-12)) return;
      points.insert(points.end(), y.begin(), y.end());
      for (const auto& o : spec.objectives) values.push_back(o(y));
    });
    if (points.empty()) throw std::runtime_error("no feasible grid point; refine the grid");
  }

  std::size_t size() const { return n == 0 ? 0 : points.size() / n; }
  std::span<const double> point(std::size_t j) const { return {points.data() + j * n, n}; }
  std::span<const double> value(std::size_t j) const { return {values.data() + j * m, m}; }
};

struct OracleOptions {
  std::optional<double> cap;  // clamp from above, e.g. at f_upper - f_lower
};

/// max over feasible grid y (and x itself when feasible) of min_i f_i(x) - f_i(y).
inline double psi_oracle(const ProblemSpec& spec, std::span<const double> x, const CandidateSet& cand,
                         const OracleOptions& opt = {}) {
  if (x.size() != spec.n) throw DimensionError("psi_oracle: point dimension mismatch");
  const std::vector<double> fx = spec.objective_values(x);
  double best = spec.feasible(x, 1e-12) ? 0.0 : -std::numeric_limits<double>::infinity();
  const std::size_t m = cand.m;
  for (std::size_t j = 0; j < cand.size(); ++j) {
    const double* fy = cand.values.data() + j * m;
    double v = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < m && v > best; ++i) v = std::min(v, fx[i] - fy[i]);
    best = std::max(best, v);
  }
  if (opt.cap) best = std::min(best, *opt.cap);
  return best;
}

inline double psi_oracle(const ProblemSpec& spec, std::span<const double> x, const Grid& grid,
                         const OracleOptions& opt = {}) {
  return psi_oracle(spec, x, CandidateSet(spec, grid), opt);
}

/// x in Omega and no feasible grid y with f_i(y) - f_i(x) + eps_i < 0 for all i.
inline bool weakly_eps_member(const ProblemSpec& spec, std::span<const double> x, std::span<const double> eps,
                              const CandidateSet& cand) {
  if (x.size() != spec.n || eps.size() != spec.num_objectives())
    throw DimensionError("weakly_eps_member: dimension mismatch");
  if (!spec.feasible(x, 1e-12)) return false;
  const std::vector<double> fx = spec.objective_values(x);
  const std::size_t m = cand.m;
  for (std::size_t j = 0; j < cand.size(); ++j) {
    const double* fy = cand.values.data() + j * m;
    bool dominated = true;
    for (std::size_t i = 0; i < m && dominated; ++i) dominated = fy[i] - fx[i] + eps[i] < 0.0;
    if (dominated) return false;
  }
  return true;
}

inline double grid_volume(const std::function<bool(std::span<const double>)>& pred, const Grid& grid) {
  std::size_t count = 0;
  grid.for_each([&](std::span<const double> p) { count += pred(p) ? 1 : 0; });
  return static_cast<double>(count) * grid.cell_volume();
}

/// Crude slack L*h: L is the largest objective gradient norm seen on the grid.
inline double grid_error(const ProblemSpec& spec, const Grid& grid) {
  std::vector<std::vector<Polynomial>> dp(spec.num_objectives()), dq(spec.num_objectives());
  for (std::size_t i = 0; i < spec.num_objectives(); ++i)
    for (std::size_t d = 0; d < spec.n; ++d) {
      dp[i].push_back(spec.objectives[i].p.derivative(d));
      dq[i].push_back(spec.objectives[i].q.derivative(d));
    }
  double L = 0.0;
  grid.for_each([&](std::span<const double> u) {
    for (std::size_t i = 0; i < spec.num_objectives(); ++i) {
      const double p = spec.objectives[i].p.eval(u), q = spec.objectives[i].q.eval(u);
      double sq = 0.0;
      for (std::size_t d = 0; d < spec.n; ++d) {
        const double g = (dp[i][d].eval(u) * q - p * dq[i][d].eval(u)) / (q * q);
        sq += g * g;
      }
      L = std::max(L, std::sqrt(sq));
    }
  });
  return L * grid.max_spacing();
}

}  // namespace psos
