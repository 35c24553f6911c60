#pragma once

// Consumers of psi_k: the sublevel region A(delta, k) = {x in Omega : psi_k(x) <= delta},
// image sampling, containment against the grid oracle, and minimization over
// semialgebraic sets by the moment relaxation.

#include <pareto_sos/achievement.hpp>
#include <pareto_sos/errors.hpp>
#include <pareto_sos/oracle.hpp>
#include <pareto_sos/poly.hpp>
#include <pareto_sos/problem.hpp>
#include <pareto_sos/sdp.hpp>
#include <pareto_sos/sos.hpp>

#include <cstdio>
#include <ostream>
#include <span>
#include <string>
#include <vector>

namespace psos {

struct RegionQuery {
  const ProblemSpec* spec = nullptr;
  Polynomial psi;
  double delta = 0.0;
  int k = 0;
  Mode mode = Mode::Dense;

  RegionQuery(const ProblemSpec& s, Polynomial psi_k, double d, int order = 0, Mode m = Mode::Dense)
      : spec(&s), psi(std::move(psi_k)), delta(d), k(order), mode(m) {
    if (!(delta > 0.0)) throw std::invalid_argument("region: delta must be positive");
    if (psi.dim() != s.n) throw DimensionError("region: psi dimension does not match the problem");
  }
};

inline bool in_region(const RegionQuery& q, std::span<const double> x) {
  return q.spec->feasible(x, 1e-12) && q.psi.eval(x) <= q.delta;
}

struct ImageRecord {
  std::vector<double> x;
  std::vector<double> f;
  bool in_omega = false;
  bool in_region = false;
};

struct ImageSample {
  std::size_t n = 0;
  std::size_t m = 0;
  std::vector<ImageRecord> records;

  std::size_t count_in_region() const {
    std::size_t c = 0;
    for (const auto& r : records) c += r.in_region ? 1 : 0;
    return c;
  }
};

inline ImageSample sample_image(const RegionQuery& q, const Grid& grid) {
  ImageSample s;
  s.n = q.spec->n;
  s.m = q.spec->num_objectives();
  s.records.reserve(grid.size());
  grid.for_each([&](std::span<const double> x) {
    ImageRecord r;
    r.x.assign(x.begin(), x.end());
    r.f = q.spec->objective_values(x);
    r.in_omega = q.spec->feasible(x, 1e-12);
    r.in_region = r.in_omega && q.psi.eval(x) <= q.delta;
    s.records.push_back(std::move(r));
  });
  return s;
}

/// Header x1..xn,f1..fm,in_omega,in_A; floats with 17 significant digits.
inline void write_csv(std::ostream& os, const ImageSample& s) {
  for (std::size_t i = 0; i < s.n; ++i) os << 'x' << i + 1 << ',';
  for (std::size_t i = 0; i < s.m; ++i) os << 'f' << i + 1 << ',';
  os << "in_omega,in_A\n";
  char buf[40];
  for (const auto& r : s.records) {
    for (double v : r.x) {
      std::snprintf(buf, sizeof buf, "%.17g,", v);
      os << buf;
    }
    for (double v : r.f) {
      std::snprintf(buf, sizeof buf, "%.17g,", v);
      os << buf;
    }
    os << (r.in_omega ? 1 : 0) << ',' << (r.in_region ? 1 : 0) << '\n';
  }
}

struct ContainmentReport {
  std::size_t violations = 0;
  std::size_t count_region = 0;
  std::size_t count_eps_efficient = 0;
  double vol_region = 0.0;
  double vol_eps_efficient = 0.0;
  double ratio = 0.0;
  double slack = 0.0;
  std::vector<std::vector<double>> violating_points;
};

/// Grid points of A(delta, k) that are not weakly (delta + slack)-efficient
/// against the candidate set count as violations.
inline ContainmentReport containment_report(const RegionQuery& q, const Grid& grid, const CandidateSet& cand,
                                            double slack = 0.0) {
  const std::size_t m = q.spec->num_objectives();
  const std::vector<double> eps(m, q.delta), eps_slack(m, q.delta + slack);
  ContainmentReport rep;
  rep.slack = slack;
  grid.for_each([&](std::span<const double> x) {
    if (!q.spec->feasible(x, 1e-12)) return;
    const bool member = weakly_eps_member(*q.spec, x, eps, cand);
    if (member) ++rep.count_eps_efficient;
    if (q.psi.eval(x) > q.delta) return;
    ++rep.count_region;
    if (!member && !weakly_eps_member(*q.spec, x, eps_slack, cand)) {
      ++rep.violations;
      rep.violating_points.emplace_back(x.begin(), x.end());
    }
  });
  rep.vol_region = static_cast<double>(rep.count_region) * grid.cell_volume();
  rep.vol_eps_efficient = static_cast<double>(rep.count_eps_efficient) * grid.cell_volume();
  rep.ratio = rep.count_eps_efficient == 0 ? 0.0
                                           : static_cast<double>(rep.count_region) / static_cast<double>(rep.count_eps_efficient);
  return rep;
}

struct MinimizationResult {
  double value = 0.0;                   // relaxation lower bound
  std::vector<double> candidate;        // degree-1 moments
  double candidate_objective = 0.0;
  std::vector<double> constraint_values;  // generators at the candidate
  double min_constraint = 0.0;
  double gap = 0.0;                     // candidate_objective - value
  int order = 0;
  sdp::Status status = sdp::Status::NumericalFailure;
  sdp::Residuals residuals;
};

/// Omega's generators plus delta - psi_k.
inline GeneratorSet pareto_constrained_generators(const ProblemSpec& spec, const Polynomial& psi, double delta) {
  GeneratorSet gs = omega_generators(spec, false);
  gs.add("pareto", Polynomial::constant(spec.n, delta) - psi);
  return gs;
}

/// Smallest order covering the objective and every generator.
inline int min_relaxation_order(const Polynomial& objective, const GeneratorSet& gens) {
  int d = objective.degree();
  for (const auto& g : gens.generators) d = std::max(d, g.poly.degree());
  return std::max(1, (d + 1) / 2);
}

/// max lambda with objective - lambda in the order-k quadratic module; the
/// moments of the optimal measure are the negated duals of the matching rows.
inline MinimizationResult minimize_over(const Polynomial& objective, GeneratorSet gens, int order,
                                        const sdp::SolverOptions& opt = {}) {
  if (gens.cliques) throw std::invalid_argument("minimize_over: dense generator sets only");
  if (objective.dim() != gens.dim) throw DimensionError("minimize_over: objective dimension mismatch");
  const std::size_t n = gens.dim;
  // Box polynomials, unless already present.
  for (std::size_t j = 0; j < n; ++j) {
    const Polynomial b = Polynomial::constant(n, 1.0) - Polynomial::variable(n, j) * Polynomial::variable(n, j);
    bool have = false;
    for (const auto& g : gens.generators) have = have || g.poly == b;
    if (!have) gens.add("box_" + std::to_string(j + 1), b);
  }
  const int floor_k = min_relaxation_order(objective, gens);
  if (order < floor_k) throw OrderTooLowError("relaxation order below generator degrees", floor_k);

  AffinePolynomial target{objective, {Polynomial::constant(n, -1.0)}};
  MembershipProgram prog = assemble_membership(target, gens, order);
  prog.sdp.objective_free[0] = -1.0;
  const sdp::SdpSolution sol = sdp::solve(prog.sdp, opt);
  if (sol.status == sdp::Status::Unbounded)
    throw AssumptionError("constraint set is empty: -1 has a certificate at order " + std::to_string(order));
  if (sol.status == sdp::Status::Infeasible)
    throw SolverError("moment relaxation infeasible at order " + std::to_string(order));
  if (sol.status != sdp::Status::Optimal && sol.residuals.gap > 1e-5)
    throw SolverError(std::string("moment relaxation ended with status ") + sdp::to_string(sol.status));

  MinimizationResult res;
  res.order = order;
  res.status = sol.status;
  res.residuals = sol.residuals;
  res.value = sol.free_values(0);
  const auto duals = prog.row_duals(sol);
  const double m0 = -duals.at(Monomial(std::vector<int>(n, 0)));
  res.candidate.resize(n);
  for (std::size_t i = 0; i < n; ++i) res.candidate[i] = -duals.at(Monomial::variable(n, i)) / m0;
  res.candidate_objective = objective.eval(res.candidate);
  res.min_constraint = std::numeric_limits<double>::infinity();
  for (const auto& g : gens.generators) {
    res.constraint_values.push_back(g.poly.eval(res.candidate));
    res.min_constraint = std::min(res.min_constraint, res.constraint_values.back());
  }
  res.gap = res.candidate_objective - res.value;
  return res;
}

}  // namespace psos
