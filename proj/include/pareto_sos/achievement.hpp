#pragma once

// Polynomial upper approximations psi_k of the achievement function
//
//   psi(x) = max_{y in Omega} min_i (f_i(x) - f_i(y)),
//
// obtained by minimizing the box integral of phi in R[x]_{2k} subject to
// phi(x) - z being in the order-k quadratic module of the joint set
//
//   K = {(x, y, z) : h(x, y, z) >= 0}
//
// in the variables (x_1..x_n, y_1..y_n, z).

#include <pareto_sos/errors.hpp>
#include <pareto_sos/poly.hpp>
#include <pareto_sos/problem.hpp>
#include <pareto_sos/sdp.hpp>
#include <pareto_sos/sos.hpp>

#include <chrono>
#include <map>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

namespace psos {

enum class Mode { Dense, Sparse };

inline const char* to_string(Mode m) { return m == Mode::Dense ? "dense" : "sparse"; }

inline Mode parse_mode(const std::string& s) {
  if (s == "dense") return Mode::Dense;
  if (s == "sparse") return Mode::Sparse;
  throw std::invalid_argument("unknown mode '" + s + "' (expected dense or sparse)");
}

struct JointSystem {
  std::size_t n = 0;
  Mode mode = Mode::Dense;
  double f_lower = 0.0;
  double f_upper = 0.0;
  std::vector<Polynomial> couplings;      // one per objective
  std::vector<Polynomial> y_constraints;  // Omega in y, then the box in y
  std::vector<Polynomial> x_box;
  Polynomial z_interval;
  std::optional<Polynomial> ball;         // sparse mode only

  std::size_t dim() const { return 2 * n + 1; }
  std::size_t x_var(std::size_t i) const { return i; }
  std::size_t y_var(std::size_t i) const { return n + i; }
  std::size_t z_var() const { return 2 * n; }
  double span() const { return f_upper - f_lower; }

  std::size_t group_count() const {
    return couplings.size() + y_constraints.size() + x_box.size() + 1 + (ball ? 1 : 0);
  }

  /// Generator set for K; in sparse mode with cliques {x,y,z}, {y}, {x}, {z}.
  GeneratorSet generators() const {
    GeneratorSet gs;
    gs.dim = dim();
    std::vector<int> g1, g2, g3, g4;
    auto push = [&](std::vector<int>& grp, std::string label, const Polynomial& p) {
      grp.push_back(static_cast<int>(gs.generators.size()));
      gs.add(std::move(label), p);
    };
    for (std::size_t i = 0; i < couplings.size(); ++i) push(g1, "coupling_" + std::to_string(i + 1), couplings[i]);
    if (ball) push(g1, "ball", *ball);
    for (std::size_t j = 0; j < y_constraints.size(); ++j) push(g2, "y_" + std::to_string(j + 1), y_constraints[j]);
    for (std::size_t j = 0; j < x_box.size(); ++j) push(g3, "x_box_" + std::to_string(j + 1), x_box[j]);
    push(g4, "z_interval", z_interval);
    if (mode == Mode::Sparse) {
      std::vector<int> all, xs, ys;
      for (std::size_t i = 0; i < dim(); ++i) all.push_back(static_cast<int>(i));
      for (std::size_t i = 0; i < n; ++i) {
        xs.push_back(static_cast<int>(x_var(i)));
        ys.push_back(static_cast<int>(y_var(i)));
      }
      gs.cliques = std::vector<Clique>{{all, g1}, {ys, g2}, {xs, g3}, {{static_cast<int>(z_var())}, g4}};
    }
    return gs;
  }
};

inline JointSystem build_joint(const ProblemSpec& spec, double f_lower, double f_upper, Mode mode) {
  if (!spec.is_unit_box(1e-12))
    throw std::invalid_argument("build_joint: problem must be scaled to the box [-1,1]^n");
  if (!(f_lower <= f_upper)) throw std::invalid_argument("build_joint: f_lower > f_upper");
  const std::size_t n = spec.n;
  JointSystem js;
  js.n = n;
  js.mode = mode;
  js.f_lower = f_lower;
  js.f_upper = f_upper;
  const std::size_t d = js.dim();
  std::vector<int> xs(n), ys(n);
  for (std::size_t i = 0; i < n; ++i) {
    xs[i] = static_cast<int>(js.x_var(i));
    ys[i] = static_cast<int>(js.y_var(i));
  }
  const Polynomial z = Polynomial::variable(d, js.z_var());
  const Polynomial one = Polynomial::constant(d, 1.0);

  for (const auto& o : spec.objectives) {
    const Polynomial px = embed(o.p, xs, d), py = embed(o.p, ys, d);
    const Polynomial qx = embed(o.q, xs, d), qy = embed(o.q, ys, d);
    js.couplings.push_back(px * qy - py * qx - z * qx * qy);
  }
  for (const auto& g : spec.constraints) js.y_constraints.push_back(embed(g, ys, d));
  for (std::size_t i = 0; i < n; ++i) {
    const Polynomial yi = Polynomial::variable(d, js.y_var(i));
    js.y_constraints.push_back(one - yi * yi);
  }
  for (std::size_t i = 0; i < n; ++i) {
    const Polynomial xi = Polynomial::variable(d, js.x_var(i));
    js.x_box.push_back(one - xi * xi);
  }
  const double s = js.span();
  js.z_interval = s * s * one - z * z;
  if (mode == Mode::Sparse) {
    Polynomial b = (2.0 * static_cast<double>(n) + s * s) * one - z * z;
    for (std::size_t i = 0; i < n; ++i) {
      const Polynomial xi = Polynomial::variable(d, js.x_var(i)), yi = Polynomial::variable(d, js.y_var(i));
      b -= xi * xi + yi * yi;
    }
    js.ball = std::move(b);
  }
  return js;
}

/// Moments of the normalized Lebesgue measure on [-1,1]^n.
struct MomentTable {
  std::size_t n = 0;
  int degree = 0;
  std::map<Monomial, double, GrlexLess> values;

  double operator[](const Monomial& a) const { return values.at(a); }
};

inline double box_moment(const Monomial& a) {
  if (!a.all_even()) return 0.0;
  double v = 1.0;
  for (int e : a.exponents()) v /= static_cast<double>(e + 1);
  return v;
}

inline MomentTable moments(std::size_t n, int degree) {
  MomentTable t;
  t.n = n;
  t.degree = degree;
  for (const auto& a : basis(n, degree)) t.values.emplace(a, box_moment(a));
  return t;
}

struct AchievementProgram {
  MembershipProgram membership;
  std::vector<Monomial> phi_basis;  // x-monomials of phi; free variable i is the coefficient of phi_basis[i]
};

/// Free variables: coefficients of phi in R[x]_{2k}; objective sum c_a gamma_a.
inline AchievementProgram assemble(const JointSystem& js, int k, const MomentTable& mom) {
  if (mom.n != js.n || mom.degree < 2 * k) throw std::invalid_argument("assemble: moment table does not cover R[x]_2k");
  const std::size_t d = js.dim();
  std::vector<int> xs(js.n);
  for (std::size_t i = 0; i < js.n; ++i) xs[i] = static_cast<int>(js.x_var(i));

  AchievementProgram out;
  AffinePolynomial target;
  target.constant = -1.0 * Polynomial::variable(d, js.z_var());
  for (const auto& a : basis(js.n, 2 * k)) {
    out.phi_basis.push_back(a);
    target.linear.push_back(embed(Polynomial::monomial(a), xs, d));
  }
  out.membership = assemble_membership(target, js.generators(), k);
  for (std::size_t i = 0; i < out.phi_basis.size(); ++i) out.membership.sdp.objective_free[i] = mom[out.phi_basis[i]];
  return out;
}

/// Smallest order with 2k >= deg h for every joint generator.
inline int min_order(const JointSystem& js) {
  int deg = 0;
  for (const auto& g : js.generators().generators) deg = std::max(deg, g.poly.degree());
  return std::max(1, (deg + 1) / 2);
}

struct ApproximationDiagnostics {
  sdp::Status status = sdp::Status::NumericalFailure;
  int iterations = 0;
  sdp::Residuals residuals;
  double primal_obj = 0.0;
  double dual_obj = 0.0;
  double seconds = 0.0;
  std::size_t rows = 0;
  std::size_t blocks = 0;
  int largest_block = 0;
  CertificateReport certificate;
  bool verified = false;
  std::string message;
};

struct ApproximationResult {
  Polynomial psi;
  double rho = 0.0;
  int k = 0;
  Mode mode = Mode::Dense;
  double f_lower = 0.0;
  double f_upper = 0.0;
  GramCertificate certificate;
  ApproximationDiagnostics diagnostics;
};

struct ApproximationOptions {
  Mode mode = Mode::Dense;
  std::optional<std::pair<double, double>> bounds;  // (f_lower, f_upper); computed when absent
  std::vector<int> bound_orders;                    // per objective, empty = default
  sdp::SolverOptions solver;
};

inline ApproximationResult approximate_psi(const ProblemSpec& spec, int k, const ApproximationOptions& opt = {}) {
  double lo, hi;
  if (opt.bounds) {
    std::tie(lo, hi) = *opt.bounds;
  } else {
    const Bounds b = compute_bounds(spec, opt.bound_orders, opt.solver);
    lo = b.f_lower();
    hi = b.f_upper();
  }
  const JointSystem js = build_joint(spec, lo, hi, opt.mode);
  const int floor_k = min_order(js);
  if (k < floor_k)
    throw OrderTooLowError("order " + std::to_string(k) + " below the joint system's minimum", floor_k);

  const auto t0 = std::chrono::steady_clock::now();
  const AchievementProgram prog = assemble(js, k, moments(spec.n, 2 * k));
  const sdp::SdpSolution sol = sdp::solve(prog.membership.sdp, opt.solver);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (sol.status == sdp::Status::Infeasible || sol.status == sdp::Status::Unbounded)
    throw SolverError(std::string("achievement SDP reported ") + sdp::to_string(sol.status));

  ApproximationResult res;
  res.k = k;
  res.mode = opt.mode;
  res.f_lower = lo;
  res.f_upper = hi;
  Polynomial phi(spec.n);
  for (std::size_t i = 0; i < prog.phi_basis.size(); ++i)
    phi.add_term(prog.phi_basis[i], sol.free_values(static_cast<Eigen::Index>(i)));
  res.rho = 0.0;
  for (std::size_t i = 0; i < prog.phi_basis.size(); ++i)
    res.rho += box_moment(prog.phi_basis[i]) * sol.free_values(static_cast<Eigen::Index>(i));
  res.psi = phi.cleaned(1e-12);
  res.certificate = prog.membership.certificate(sol);

  auto& dg = res.diagnostics;
  dg.status = sol.status;
  dg.iterations = sol.iterations;
  dg.residuals = sol.residuals;
  dg.primal_obj = sol.primal_obj;
  dg.dual_obj = sol.dual_obj;
  dg.seconds = secs;
  dg.rows = prog.membership.sdp.constraints.size();
  dg.blocks = prog.membership.sdp.blocks.size();
  for (int b : prog.membership.sdp.blocks) dg.largest_block = std::max(dg.largest_block, b);
  dg.message = sol.message;

  std::vector<int> xs(spec.n);
  for (std::size_t i = 0; i < spec.n; ++i) xs[i] = static_cast<int>(js.x_var(i));
  const Polynomial target = embed(phi, xs, js.dim()) - Polynomial::variable(js.dim(), js.z_var());
  dg.certificate = verify_certificate(target, js.generators(), res.certificate);
  dg.verified = dg.certificate.passed;
  if (!dg.verified && sol.status != sdp::Status::Optimal)
    throw SolverError(std::string("achievement SDP ended with status ") + sdp::to_string(sol.status) +
                      " and an unverifiable certificate");
  return res;
}

}  // namespace psos
