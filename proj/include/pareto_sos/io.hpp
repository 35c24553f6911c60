#pragma once

// Problem files, box rescaling and JSON artifacts.
//
// Problem file:
//   {"n": 2,
//    "objectives": [{"p": TERMS, "q": TERMS}, ...],   "q" optional (constant 1)
//    "constraints": [TERMS, ...],
//    "box": [[lo, hi], ...]}
// TERMS = [[coefficient, [a_1, ..., a_n]], ...]

#include <pareto_sos/achievement.hpp>
#include <pareto_sos/analysis.hpp>
#include <pareto_sos/errors.hpp>
#include <pareto_sos/poly.hpp>
#include <pareto_sos/problem.hpp>
#include <pareto_sos/sos.hpp>

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace psos::io {

using json = nlohmann::ordered_json;

inline Polynomial parse_terms(const json& j, std::size_t n, const std::string& where) {
  if (!j.is_array()) throw ParseError(where + ": expected a list of [coefficient, exponents] terms");
  Polynomial p(n);
  for (std::size_t t = 0; t < j.size(); ++t) {
    const std::string at = where + "[" + std::to_string(t) + "]";
    const json& term = j[t];
    if (!term.is_array() || term.size() != 2 || !term[0].is_number() || !term[1].is_array())
      throw ParseError(at + ": expected [coefficient, [exponents]]");
    if (term[1].size() != n)
      throw ParseError(at + ": exponent vector has length " + std::to_string(term[1].size()) + ", expected " +
                       std::to_string(n));
    std::vector<int> e(n);
    for (std::size_t i = 0; i < n; ++i) {
      if (!term[1][i].is_number_integer() || term[1][i].get<long long>() < 0)
        throw ParseError(at + ": exponents must be nonnegative integers");
      e[i] = term[1][i].get<int>();
    }
    const double c = term[0].get<double>();
    if (!std::isfinite(c)) throw ParseError(at + ": coefficient is not finite");
    p.add_term(Monomial(e), c);
  }
  return p;
}

inline json terms_json(const Polynomial& p) {
  json out = json::array();
  for (const auto& [m, c] : p.terms()) out.push_back(json::array({c, m.exponents()}));
  return out;
}

/// Parses and validates the document; no assumption checks.
inline ProblemSpec parse_problem(const json& doc) {
  if (!doc.is_object()) throw ParseError("problem: top level must be an object");
  for (const char* key : {"n", "objectives", "box"})
    if (!doc.contains(key)) throw ParseError(std::string("problem: missing field '") + key + "'");
  if (!doc["n"].is_number_integer() || doc["n"].get<long long>() < 1)
    throw ParseError("n: must be a positive integer");
  ProblemSpec spec;
  spec.n = doc["n"].get<std::size_t>();
  const std::size_t n = spec.n;

  const json& objs = doc["objectives"];
  if (!objs.is_array() || objs.empty()) throw ParseError("objectives: must be a nonempty list");
  for (std::size_t i = 0; i < objs.size(); ++i) {
    const std::string at = "objectives[" + std::to_string(i) + "]";
    if (!objs[i].is_object() || !objs[i].contains("p")) throw ParseError(at + ": expected an object with field 'p'");
    RationalObjective o{parse_terms(objs[i]["p"], n, at + ".p"), Polynomial::constant(n, 1.0)};
    if (objs[i].contains("q")) {
      o.q = parse_terms(objs[i]["q"], n, at + ".q");
      if (o.q.is_zero()) throw ParseError(at + ".q: denominator is the zero polynomial");
    }
    spec.objectives.push_back(std::move(o));
  }

  if (doc.contains("constraints")) {
    const json& cons = doc["constraints"];
    if (!cons.is_array()) throw ParseError("constraints: must be a list");
    for (std::size_t j = 0; j < cons.size(); ++j)
      spec.constraints.push_back(parse_terms(cons[j], n, "constraints[" + std::to_string(j) + "]"));
  }

  const json& box = doc["box"];
  if (!box.is_array() || box.size() != n) throw ParseError("box: expected " + std::to_string(n) + " [lo, hi] pairs");
  for (std::size_t i = 0; i < n; ++i) {
    const std::string at = "box[" + std::to_string(i) + "]";
    if (!box[i].is_array() || box[i].size() != 2 || !box[i][0].is_number() || !box[i][1].is_number())
      throw ParseError(at + ": expected [lo, hi]");
    const Interval iv{box[i][0].get<double>(), box[i][1].get<double>()};
    if (!std::isfinite(iv.lo) || !std::isfinite(iv.hi)) throw ParseError(at + ": bounds must be finite");
    if (!(iv.lo < iv.hi)) throw ParseError(at + ": degenerate interval (lo >= hi)");
    spec.box.push_back(iv);
  }
  return spec;
}

/// Coarse-grid (A1)/(A2) screening: some feasible point exists and every
/// denominator is positive at all feasible points of a 51-per-axis grid.
inline void check_assumptions(const ProblemSpec& spec, int resolution = 51) {
  const Grid grid(spec.box, std::vector<int>(spec.n, resolution));
  std::size_t feasible = 0;
  grid.for_each([&](std::span<const double> x) {
    if (!spec.feasible(x, 1e-12)) return;
    ++feasible;
    for (std::size_t i = 0; i < spec.num_objectives(); ++i) {
      const double q = spec.objectives[i].q.eval(x);
      if (!(q > 0.0)) {
        std::ostringstream os;
        os << "denominator of objective " << i + 1 << " is " << q << " at feasible point (";
        for (std::size_t d = 0; d < x.size(); ++d) os << (d ? ", " : "") << x[d];
        os << "); denominators must be positive on the feasible set";
        throw AssumptionError(os.str());
      }
    }
  });
  if (feasible == 0) throw AssumptionError("no feasible point found on the screening grid; the feasible set looks empty");
}

inline json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError(path + ": " + e.what());
  }
}

inline ProblemSpec load(const std::string& path, bool check = true) {
  ProblemSpec spec = parse_problem(read_json_file(path));
  if (check) check_assumptions(spec);
  return spec;
}

/// x = center + half_width * t maps [-1,1]^n onto the box.
struct AffineMap {
  std::vector<double> center;
  std::vector<double> half_width;

  std::vector<double> to_original(std::span<const double> t) const {
    std::vector<double> x(t.size());
    for (std::size_t i = 0; i < t.size(); ++i) x[i] = center[i] + half_width[i] * t[i];
    return x;
  }
  std::vector<double> to_scaled(std::span<const double> x) const {
    std::vector<double> t(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) t[i] = (x[i] - center[i]) / half_width[i];
    return t;
  }
  /// p(x) as a polynomial in t.
  Polynomial pull_back(const Polynomial& p) const { return compose_affine(p, center, half_width); }
  /// q(t) as a polynomial in x.
  Polynomial push_forward(const Polynomial& q) const {
    std::vector<double> shift(center.size()), scale(center.size());
    for (std::size_t i = 0; i < center.size(); ++i) {
      scale[i] = 1.0 / half_width[i];
      shift[i] = -center[i] / half_width[i];
    }
    return compose_affine(q, shift, scale);
  }
};

inline std::pair<ProblemSpec, AffineMap> rescale(const ProblemSpec& spec) {
  AffineMap map;
  for (const auto& b : spec.box) {
    if (!(b.lo < b.hi)) throw ParseError("rescale: degenerate box");
    map.center.push_back(0.5 * (b.lo + b.hi));
    map.half_width.push_back(0.5 * (b.hi - b.lo));
  }
  ProblemSpec out;
  out.n = spec.n;
  out.box.assign(spec.n, Interval{});
  for (const auto& o : spec.objectives) out.objectives.push_back({map.pull_back(o.p), map.pull_back(o.q)});
  for (const auto& g : spec.constraints) out.constraints.push_back(map.pull_back(g));
  return {out, map};
}

// ---- artifacts ------------------------------------------------------------

inline json matrix_json(const Eigen::MatrixXd& M) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < M.rows(); ++i) {
    json r = json::array();
    for (Eigen::Index j = 0; j < M.cols(); ++j) r.push_back(M(i, j));
    rows.push_back(std::move(r));
  }
  return rows;
}

inline json certificate_json(const GramCertificate& c) {
  json blocks = json::array();
  for (const auto& b : c.blocks) {
    json basis = json::array();
    for (const auto& m : b.basis) basis.push_back(m.exponents());
    blocks.push_back({{"label", b.label}, {"multiplier", terms_json(b.multiplier)}, {"basis", basis}, {"gram", matrix_json(b.gram)}});
  }
  return {{"dim", c.dim}, {"order", c.order}, {"blocks", blocks}};
}

inline json report_json(const CertificateReport& r) {
  return {{"max_mismatch", r.max_mismatch}, {"min_eigenvalue", r.min_eigenvalue}, {"tolerance", r.tolerance}, {"passed", r.passed}};
}

inline json residuals_json(const sdp::Residuals& r) {
  return {{"primal", r.primal_feas}, {"dual", r.dual_feas}, {"gap", r.gap}};
}

inline json bounds_json(const Bounds& b, bool with_certificates) {
  json objs = json::array();
  for (std::size_t i = 0; i < b.lower.size(); ++i) {
    json o = {{"index", i + 1},
              {"lower", b.lower[i].value},
              {"upper", b.upper[i].value},
              {"order", b.lower[i].order},
              {"lower_status", sdp::to_string(b.lower[i].status)},
              {"upper_status", sdp::to_string(b.upper[i].status)},
              {"lower_check", report_json(b.lower[i].report)},
              {"upper_check", report_json(b.upper[i].report)}};
    if (with_certificates) {
      o["lower_certificate"] = certificate_json(b.lower[i].certificate);
      o["upper_certificate"] = certificate_json(b.upper[i].certificate);
    }
    objs.push_back(std::move(o));
  }
  return {{"f_lower", b.f_lower()}, {"f_upper", b.f_upper()}, {"objectives", objs}, {"coordinates", "scaled"}};
}

/// psi is written in original coordinates.
inline json approximation_json(const ApproximationResult& r, const AffineMap& map, bool with_certificate) {
  const auto& d = r.diagnostics;
  json j = {{"k", r.k},
            {"mode", to_string(r.mode)},
            {"rho", r.rho},
            {"f_lower", r.f_lower},
            {"f_upper", r.f_upper},
            {"n", r.psi.dim()},
            {"psi", terms_json(map.push_forward(r.psi).cleaned(1e-12))},
            {"psi_scaled", terms_json(r.psi)},
            {"box_center", map.center},
            {"box_half_width", map.half_width},
            {"solver",
             {{"status", sdp::to_string(d.status)},
              {"iterations", d.iterations},
              {"rows", d.rows},
              {"blocks", d.blocks},
              {"largest_block", d.largest_block},
              {"primal_objective", d.primal_obj},
              {"dual_objective", d.dual_obj},
              {"residuals", residuals_json(d.residuals)}}},
            {"certificate_check", report_json(d.certificate)},
            {"verified", d.verified}};
  if (with_certificate) j["certificate"] = certificate_json(r.certificate);
  return j;
}

struct LoadedPsi {
  Polynomial psi_scaled;
  int k = 0;
  Mode mode = Mode::Dense;
  double f_lower = 0.0;
  double f_upper = 0.0;
};

/// Reads an `approx` artifact; the scaled form is used when present.
inline LoadedPsi load_psi(const std::string& path, const AffineMap& map) {
  const json j = read_json_file(path);
  if (!j.is_object() || !j.contains("psi") || !j.contains("n")) throw ParseError(path + ": not an approximation file");
  const std::size_t n = j["n"].get<std::size_t>();
  if (n != map.center.size()) throw ParseError(path + ": psi dimension does not match the problem");
  LoadedPsi out;
  out.psi_scaled = j.contains("psi_scaled") ? parse_terms(j["psi_scaled"], n, "psi_scaled")
                                            : map.pull_back(parse_terms(j["psi"], n, "psi"));
  out.k = j.value("k", 0);
  out.mode = parse_mode(j.value("mode", std::string("dense")));
  out.f_lower = j.value("f_lower", 0.0);
  out.f_upper = j.value("f_upper", 0.0);
  return out;
}

inline json containment_json(const ContainmentReport& r, double delta, int k) {
  json pts = json::array();
  for (const auto& p : r.violating_points) pts.push_back(p);
  return {{"delta", delta},
          {"k", k},
          {"violations", r.violations},
          {"count_A", r.count_region},
          {"count_eps_efficient", r.count_eps_efficient},
          {"vol_A", r.vol_region},
          {"vol_eps_efficient", r.vol_eps_efficient},
          {"ratio", r.ratio},
          {"slack", r.slack},
          {"violating_points", pts}};
}

inline json minimization_json(const MinimizationResult& r, const AffineMap& map) {
  return {{"value", r.value},
          {"candidate", map.to_original(r.candidate)},
          {"candidate_objective", r.candidate_objective},
          {"constraint_values", r.constraint_values},
          {"min_constraint", r.min_constraint},
          {"gap", r.gap},
          {"order", r.order},
          {"status", sdp::to_string(r.status)},
          {"residuals", residuals_json(r.residuals)}};
}

}  // namespace psos::io
