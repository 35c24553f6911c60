#pragma once

// Quadratic-module membership by coefficient matching.
//
// A target t(theta) = t_0 + sum_p theta_p t_p is written as
//
//   t = sum_slots sigma_s * h_s,   sigma_s = m_s' G_s m_s,  G_s PSD,
//
// where every slot pairs a generator h_s (or the constant 1) with a monomial
// vector m_s. In dense form there is one slot per generator plus sigma_0, all
// over the full variable set. In sparse form every clique i contributes
// sigma_{i,0} and sigma_{i,j} h_j (j in J_i), with m_s restricted to the
// clique's variables I_i. One equality row is emitted per monomial of degree
// <= 2k in the variables covered by the cliques.

#include <pareto_sos/errors.hpp>
#include <pareto_sos/poly.hpp>
#include <pareto_sos/problem.hpp>
#include <pareto_sos/sdp.hpp>

#include <Eigen/Dense>

#include <algorithm>
#include <iterator>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

namespace psos {

struct Generator {
  std::string label;
  Polynomial poly;
};

struct Clique {
  std::vector<int> vars;         // I_i, strictly increasing
  std::vector<int> generators;   // J_i, indices into GeneratorSet::generators
};

struct GeneratorSet {
  std::size_t dim = 0;
  std::vector<Generator> generators;
  std::optional<std::vector<Clique>> cliques;

  void add(std::string label, Polynomial p) {
    if (p.dim() != dim) throw DimensionError("generator dimension mismatch");
    generators.push_back({std::move(label), std::move(p)});
  }

  /// Appends 1 - x_j^2 for every variable; makes the module Archimedean on [-1,1]^n.
  void add_box() {
    for (std::size_t j = 0; j < dim; ++j) {
      Polynomial b = Polynomial::constant(dim, 1.0) - Polynomial::variable(dim, j) * Polynomial::variable(dim, j);
      add("box_" + std::to_string(j + 1), std::move(b));
    }
  }

  /// Checks that clique generators only involve clique variables and that
  /// the cliques satisfy the running intersection property. Throws
  /// std::invalid_argument on violation.
  void validate() const {
    for (const auto& g : generators)
      if (g.poly.dim() != dim) throw DimensionError("generator dimension mismatch");
    if (!cliques) return;
    std::vector<std::set<int>> sets;
    for (std::size_t c = 0; c < cliques->size(); ++c) {
      const Clique& cl = (*cliques)[c];
      std::set<int> vars(cl.vars.begin(), cl.vars.end());
      for (int v : vars)
        if (v < 0 || static_cast<std::size_t>(v) >= dim) throw std::invalid_argument("clique variable out of range");
      for (int gi : cl.generators) {
        if (gi < 0 || static_cast<std::size_t>(gi) >= generators.size())
          throw std::invalid_argument("clique generator index out of range");
        for (int v : generators[static_cast<std::size_t>(gi)].poly.support())
          if (!vars.count(v))
            throw std::invalid_argument("generator '" + generators[static_cast<std::size_t>(gi)].label +
                                        "' involves a variable outside its clique");
      }
      sets.push_back(std::move(vars));
    }
    for (std::size_t i = 1; i < sets.size(); ++i) {
      std::set<int> before;
      for (std::size_t j = 0; j < i; ++j) before.insert(sets[j].begin(), sets[j].end());
      std::set<int> inter;
      std::set_intersection(sets[i].begin(), sets[i].end(), before.begin(), before.end(),
                            std::inserter(inter, inter.begin()));
      bool covered = false;
      for (std::size_t s = 0; s < i && !covered; ++s)
        covered = std::includes(sets[s].begin(), sets[s].end(), inter.begin(), inter.end());
      if (!covered) throw std::invalid_argument("cliques violate the running intersection property");
    }
  }
};

/// Generators of Omega, optionally followed by the box polynomials.
inline GeneratorSet omega_generators(const ProblemSpec& spec, bool with_box = true) {
  GeneratorSet gs;
  gs.dim = spec.n;
  for (std::size_t j = 0; j < spec.constraints.size(); ++j) gs.add("g_" + std::to_string(j + 1), spec.constraints[j]);
  if (with_box) gs.add_box();
  return gs;
}

/// t(theta) = constant + sum_p theta_p * linear[p].
struct AffinePolynomial {
  Polynomial constant;
  std::vector<Polynomial> linear;

  Polynomial at(std::span<const double> theta) const {
    Polynomial out = constant;
    for (std::size_t p = 0; p < linear.size(); ++p) out += theta[p] * linear[p];
    return out;
  }
};

struct GramBlock {
  std::string label;
  Polynomial multiplier;  // generator h, or the constant 1 for sigma_0 slots
  MonomialBasis basis;
  Eigen::MatrixXd gram;

  /// m' G m * h
  Polynomial expand() const {
    const std::size_t n = multiplier.dim();
    Polynomial sigma(n);
    for (std::size_t a = 0; a < basis.size(); ++a)
      for (std::size_t b = 0; b < basis.size(); ++b) {
        const double v = gram(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
        if (v != 0.0) sigma.add_term(basis[a] * basis[b], v);
      }
    return sigma * multiplier;
  }
};

struct GramCertificate {
  std::size_t dim = 0;
  int order = 0;
  std::vector<GramBlock> blocks;

  Polynomial reconstruct() const {
    Polynomial out(dim);
    for (const auto& b : blocks) out += b.expand();
    return out;
  }
};

struct CertificateReport {
  double max_mismatch = 0.0;
  double min_eigenvalue = 0.0;
  double tolerance = 0.0;
  bool passed = false;
};

/// Smallest generator order for a slot: floor((2k - deg h) / 2).
inline MonomialBasis gram_basis(const Polynomial& generator, int k, std::size_t dim,
                                std::optional<std::span<const int>> clique_vars = std::nullopt) {
  const int dh = generator.degree();
  if (2 * k < dh)
    throw OrderTooLowError("order " + std::to_string(k) + " too small for generator of degree " + std::to_string(dh),
                           (dh + 1) / 2);
  const int d = (2 * k - dh) / 2;
  if (clique_vars) return basis(dim, d, *clique_vars);
  return basis(dim, d);
}

/// Assembled membership SDP. Free variables 0..num_params-1 are theta.
struct MembershipProgram {
  sdp::SdpProblem sdp;
  std::vector<GramBlock> slots;          // gram left empty; block index = slot index
  std::vector<Monomial> row_monomials;   // every monomial of degree <= 2k in the covered variables
  std::vector<int> row_of_constraint;    // sdp constraint -> index into row_monomials
  int order = 0;
  int num_params = 0;
  std::size_t dim = 0;

  GramCertificate certificate(const sdp::SdpSolution& s) const {
    GramCertificate c;
    c.dim = dim;
    c.order = order;
    c.blocks = slots;
    for (std::size_t i = 0; i < slots.size(); ++i) c.blocks[i].gram = s.block_values.at(i);
    return c;
  }

  /// Dual value attached to each row monomial (zero for rows not emitted).
  std::map<Monomial, double, GrlexLess> row_duals(const sdp::SdpSolution& s) const {
    std::map<Monomial, double, GrlexLess> out;
    for (const auto& m : row_monomials) out.emplace(m, 0.0);
    for (std::size_t r = 0; r < row_of_constraint.size(); ++r)
      out[row_monomials[static_cast<std::size_t>(row_of_constraint[r])]] = s.dual_values(static_cast<Eigen::Index>(r));
    return out;
  }
};

inline MembershipProgram assemble_membership(const AffinePolynomial& target, const GeneratorSet& gens, int k) {
  gens.validate();
  const std::size_t n = gens.dim;
  if (target.constant.dim() != n) throw DimensionError("target dimension mismatch");
  for (const auto& t : target.linear)
    if (t.dim() != n) throw DimensionError("target dimension mismatch");

  MembershipProgram prog;
  prog.order = k;
  prog.dim = n;
  prog.num_params = static_cast<int>(target.linear.size());

  // Slots.
  const Polynomial one = Polynomial::constant(n, 1.0);
  std::vector<int> covered;
  if (!gens.cliques) {
    prog.slots.push_back({"sigma_0", one, gram_basis(one, k, n), {}});
    for (const auto& g : gens.generators) prog.slots.push_back({"sigma_" + g.label, g.poly, gram_basis(g.poly, k, n), {}});
    for (std::size_t v = 0; v < n; ++v) covered.push_back(static_cast<int>(v));
  } else {
    std::set<int> all;
    for (std::size_t c = 0; c < gens.cliques->size(); ++c) {
      const Clique& cl = (*gens.cliques)[c];
      const std::span<const int> vars(cl.vars);
      const std::string tag = "clique_" + std::to_string(c + 1);
      prog.slots.push_back({"sigma_" + tag + "_0", one, gram_basis(one, k, n, vars), {}});
      for (int gi : cl.generators) {
        const Generator& g = gens.generators[static_cast<std::size_t>(gi)];
        prog.slots.push_back({"sigma_" + tag + "_" + g.label, g.poly, gram_basis(g.poly, k, n, vars), {}});
      }
      all.insert(cl.vars.begin(), cl.vars.end());
    }
    covered.assign(all.begin(), all.end());
  }

  prog.row_monomials = basis(n, 2 * k, covered).monomials();
  std::map<Monomial, int, GrlexLess> row_index;
  for (std::size_t r = 0; r < prog.row_monomials.size(); ++r) row_index.emplace(prog.row_monomials[r], static_cast<int>(r));
  auto lookup = [&](const Monomial& m) {
    auto it = row_index.find(m);
    if (it == row_index.end())
      throw std::invalid_argument("degree overflow: monomial " + m.str() + " outside the order-" + std::to_string(k) +
                                  " ring");
    return it->second;
  };

  std::vector<sdp::Constraint> rows(prog.row_monomials.size());
  for (std::size_t s = 0; s < prog.slots.size(); ++s) {
    const GramBlock& slot = prog.slots[s];
    const int block = prog.sdp.add_block(static_cast<int>(slot.basis.size()));
    for (std::size_t a = 0; a < slot.basis.size(); ++a)
      for (std::size_t b = a; b < slot.basis.size(); ++b) {
        const Monomial ab = slot.basis[a] * slot.basis[b];
        for (const auto& [gm, gc] : slot.multiplier.terms())
          rows[static_cast<std::size_t>(lookup(ab * gm))].matrix.push_back(
              {block, static_cast<int>(a), static_cast<int>(b), gc});
      }
  }
  for (int p = 0; p < prog.num_params; ++p) prog.sdp.add_free(0.0);
  for (const auto& [m, c] : target.constant.terms()) rows[static_cast<std::size_t>(lookup(m))].rhs = c;
  for (int p = 0; p < prog.num_params; ++p)
    for (const auto& [m, c] : target.linear[static_cast<std::size_t>(p)].terms())
      rows[static_cast<std::size_t>(lookup(m))].free.push_back({p, -c});

  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].matrix.empty() && rows[r].free.empty() && rows[r].rhs == 0.0) continue;
    prog.sdp.constraints.push_back(std::move(rows[r]));
    prog.row_of_constraint.push_back(static_cast<int>(r));
  }
  return prog;
}

/// Checks a certificate against a concrete target polynomial. Each block's
/// multiplier must be 1 or one of the generators.
inline CertificateReport verify_certificate(const Polynomial& target, const GeneratorSet& gens,
                                            const GramCertificate& cert) {
  if (cert.dim != target.dim() || cert.dim != gens.dim) throw DimensionError("certificate dimension mismatch");
  const Polynomial one = Polynomial::constant(gens.dim, 1.0);
  for (const auto& b : cert.blocks) {
    if (b.gram.rows() != static_cast<Eigen::Index>(b.basis.size()) || b.gram.cols() != b.gram.rows())
      throw std::invalid_argument("certificate block '" + b.label + "' has inconsistent shape");
    const bool known = b.multiplier == one || std::any_of(gens.generators.begin(), gens.generators.end(),
                                                          [&](const Generator& g) { return g.poly == b.multiplier; });
    if (!known) throw std::invalid_argument("certificate block '" + b.label + "' uses an unknown multiplier");
  }
  CertificateReport rep;
  const Polynomial diff = cert.reconstruct() - target;
  rep.max_mismatch = diff.max_abs_coeff();
  rep.min_eigenvalue = std::numeric_limits<double>::infinity();
  for (const auto& b : cert.blocks) {
    const Eigen::MatrixXd sym = 0.5 * (b.gram + b.gram.transpose());
    rep.min_eigenvalue = std::min(rep.min_eigenvalue, sdp::detail::min_eigenvalue(sym));
  }
  if (cert.blocks.empty()) rep.min_eigenvalue = 0.0;
  rep.tolerance = 1e-6 * (1.0 + target.max_abs_coeff());
  rep.passed = rep.max_mismatch <= rep.tolerance && rep.min_eigenvalue >= -1e-8;
  return rep;
}

enum class BoundSide { Lower, Upper };

struct BoundResult {
  double value = 0.0;
  int order = 0;
  GramCertificate certificate;
  CertificateReport report;
  sdp::Status status = sdp::Status::NumericalFailure;
  sdp::Residuals residuals;
};

/// Lower: max lambda with p - lambda q in the order-k quadratic module.
/// Upper: min lambda with lambda q - p in it.
inline BoundResult objective_bound(const Polynomial& p, const Polynomial& q, const GeneratorSet& gens, int k,
                                   BoundSide side, const sdp::SolverOptions& opt = {}) {
  AffinePolynomial target;
  if (side == BoundSide::Lower) {
    target.constant = p;
    target.linear = {-1.0 * q};
  } else {
    target.constant = -1.0 * p;
    target.linear = {q};
  }
  if (std::max(p.degree(), q.degree()) > 2 * k)
    throw OrderTooLowError("order " + std::to_string(k) + " below objective degree",
                           (std::max(p.degree(), q.degree()) + 1) / 2);
  MembershipProgram prog = assemble_membership(target, gens, k);
  prog.sdp.objective_free[0] = side == BoundSide::Lower ? -1.0 : 1.0;
  const sdp::SdpSolution sol = sdp::solve(prog.sdp, opt);
  if (sol.status == sdp::Status::Infeasible || sol.status == sdp::Status::Unbounded)
    throw OrderTooLowError("no certificate at order " + std::to_string(k), k + 1);

  BoundResult out;
  out.order = k;
  out.value = sol.free_values(0);
  out.status = sol.status;
  out.residuals = sol.residuals;
  out.certificate = prog.certificate(sol);
  const double theta[] = {out.value};
  out.report = verify_certificate(target.at(theta), gens, out.certificate);
  if (sol.status != sdp::Status::Optimal && !out.report.passed)
    throw SolverError(std::string("bound SDP ended with status ") + sdp::to_string(sol.status) +
                      " and an unverifiable certificate");
  return out;
}

struct Bounds {
  std::vector<BoundResult> lower;
  std::vector<BoundResult> upper;

  double f_lower() const {
    double v = std::numeric_limits<double>::infinity();
    for (const auto& b : lower) v = std::min(v, b.value);
    return v;
  }
  double f_upper() const {
    double v = -std::numeric_limits<double>::infinity();
    for (const auto& b : upper) v = std::max(v, b.value);
    return v;
  }
};

/// max(ceil(deg(p - lambda q)/2), ceil(deg h/2)) + 1 over Omega's generators and the box.
inline int default_bound_order(const RationalObjective& o, const GeneratorSet& gens) {
  int d = (std::max(o.p.degree(), o.q.degree()) + 1) / 2;
  for (const auto& g : gens.generators) d = std::max(d, (g.poly.degree() + 1) / 2);
  return d + 1;
}

/// Certified f_i^lower / f_i^upper for every objective. `orders` may be empty
/// (defaults) or give one order per objective.
inline Bounds compute_bounds(const ProblemSpec& spec, std::span<const int> orders = {},
                             const sdp::SolverOptions& opt = {}) {
  if (!orders.empty() && orders.size() != spec.num_objectives())
    throw std::invalid_argument("compute_bounds: one order per objective required");
  const GeneratorSet gens = omega_generators(spec, true);
  Bounds out;
  for (std::size_t i = 0; i < spec.num_objectives(); ++i) {
    const auto& o = spec.objectives[i];
    const int k = orders.empty() ? default_bound_order(o, gens) : orders[i];
    out.lower.push_back(objective_bound(o.p, o.q, gens, k, BoundSide::Lower, opt));
    out.upper.push_back(objective_bound(o.p, o.q, gens, k, BoundSide::Upper, opt));
  }
  return out;
}

}  // namespace psos
