// pareto-sos: bounds | approx | sample | check | minimize on a JSON problem file.

#include <pareto_sos/analysis.hpp>
#include <pareto_sos/io.hpp>

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

using namespace psos;
using io::json;

namespace {

struct Config {
  std::string problem;
  std::optional<int> k;
  double delta = 0.1;
  std::string mode = "dense";
  int grid = 201;
  std::string out;
  double tol = 1e-8;
  std::string psi_file;
  std::string objective_file;
  std::optional<int> order;
  bool square_denominators = false;
  bool certificate = false;
};

struct Context {
  ProblemSpec original;
  ProblemSpec scaled;
  io::AffineMap map;
};

Context prepare(const Config& c) {
  Context ctx;
  ctx.original = io::load(c.problem);
  if (c.square_denominators) ctx.original = ctx.original.with_squared_denominators();
  std::tie(ctx.scaled, ctx.map) = io::rescale(ctx.original);
  return ctx;
}

sdp::SolverOptions solver_options(const Config& c) {
  sdp::SolverOptions o;
  o.tol = c.tol;
  o.accept_tol = std::max(c.tol * 10.0, o.accept_tol);
  return o;
}

void emit(const Config& c, const std::string& text) {
  if (c.out.empty() || c.out == "-") {
    std::cout << text;
    return;
  }
  std::ofstream f(c.out, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write '" + c.out + "'");
  f << text;
}

void emit_json(const Config& c, const json& j) { emit(c, j.dump(2) + "\n"); }

int require_k(const Config& c) {
  if (!c.k) throw ParseError("--k is required");
  return *c.k;
}

ApproximationResult compute_psi(const Config& c, const Context& ctx) {
  ApproximationOptions o;
  o.mode = parse_mode(c.mode);
  o.solver = solver_options(c);
  ApproximationResult r = approximate_psi(ctx.scaled, require_k(c), o);
  if (!r.diagnostics.verified)
    throw VerificationError("psi certificate failed verification (mismatch " +
                            std::to_string(r.diagnostics.certificate.max_mismatch) + ")");
  return r;
}

/// psi in scaled coordinates, from --psi or computed with --k.
io::LoadedPsi obtain_psi(const Config& c, const Context& ctx) {
  if (!c.psi_file.empty()) return io::load_psi(c.psi_file, ctx.map);
  const ApproximationResult r = compute_psi(c, ctx);
  return {r.psi, r.k, r.mode, r.f_lower, r.f_upper};
}

Grid original_grid(const Config& c, const ProblemSpec& spec) {
  if (c.grid < 2) throw ParseError("--grid must be at least 2");
  return Grid(spec.box, std::vector<int>(spec.n, c.grid));
}

int run_bounds(const Config& c) {
  const Context ctx = prepare(c);
  std::vector<int> orders;
  if (c.order) orders.assign(ctx.scaled.num_objectives(), *c.order);
  const Bounds b = compute_bounds(ctx.scaled, orders, solver_options(c));
  emit_json(c, io::bounds_json(b, true));
  for (std::size_t i = 0; i < b.lower.size(); ++i)
    if (!b.lower[i].report.passed || !b.upper[i].report.passed)
      throw VerificationError("bound certificate for objective " + std::to_string(i + 1) + " failed verification");
  return 0;
}

int run_approx(const Config& c) {
  const Context ctx = prepare(c);
  ApproximationOptions o;
  o.mode = parse_mode(c.mode);
  o.solver = solver_options(c);
  const ApproximationResult r = approximate_psi(ctx.scaled, require_k(c), o);
  emit_json(c, io::approximation_json(r, ctx.map, c.certificate));
  if (!r.diagnostics.verified)
    throw VerificationError("psi certificate failed verification (mismatch " +
                            std::to_string(r.diagnostics.certificate.max_mismatch) + ")");
  return 0;
}

int run_sample(const Config& c) {
  const Context ctx = prepare(c);
  const io::LoadedPsi psi = obtain_psi(c, ctx);
  const RegionQuery q(ctx.original, ctx.map.push_forward(psi.psi_scaled), c.delta, psi.k, psi.mode);
  const ImageSample s = sample_image(q, original_grid(c, ctx.original));
  std::ostringstream os;
  write_csv(os, s);
  emit(c, os.str());
  return 0;
}

int run_check(const Config& c) {
  const Context ctx = prepare(c);
  const io::LoadedPsi psi = obtain_psi(c, ctx);
  const RegionQuery q(ctx.original, ctx.map.push_forward(psi.psi_scaled), c.delta, psi.k, psi.mode);
  const Grid grid = original_grid(c, ctx.original);
  const CandidateSet cand(ctx.original, grid);
  const ContainmentReport r = containment_report(q, grid, cand, grid_error(ctx.original, grid));
  emit_json(c, io::containment_json(r, c.delta, psi.k));
  if (r.violations > 0) throw VerificationError(std::to_string(r.violations) + " containment violations");
  return 0;
}

int run_minimize(const Config& c) {
  if (c.objective_file.empty()) throw ParseError("--objective is required");
  const Context ctx = prepare(c);
  const json doc = io::read_json_file(c.objective_file);
  if (!doc.is_object() || !doc.contains("objective")) throw ParseError(c.objective_file + ": missing field 'objective'");
  const Polynomial objective = io::parse_terms(doc["objective"], ctx.original.n, "objective");
  const io::LoadedPsi psi = obtain_psi(c, ctx);
  const Polynomial scaled_objective = ctx.map.pull_back(objective);
  const GeneratorSet gens = pareto_constrained_generators(ctx.scaled, psi.psi_scaled, c.delta);
  const int order = c.order.value_or(doc.value("order", min_relaxation_order(scaled_objective, gens)));
  const MinimizationResult r = minimize_over(scaled_objective, gens, order, solver_options(c));
  json j = io::minimization_json(r, ctx.map);
  j["delta"] = c.delta;
  j["k"] = psi.k;
  j["psi_at_candidate"] = psi.psi_scaled.eval(r.candidate);
  json labels = json::array();
  for (const auto& g : gens.generators) labels.push_back(g.label);
  for (std::size_t j2 = gens.generators.size(); j2 < r.constraint_values.size(); ++j2)
    labels.push_back("box_" + std::to_string(j2 - gens.generators.size() + 1));
  j["constraint_labels"] = labels;
  emit_json(c, j);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Polynomial outer-approximations of the achievement function of a vector rational program"};
  app.require_subcommand(1);
  Config c;

  auto common = [&](CLI::App* sub) {
    sub->add_option("problem", c.problem, "problem file (JSON)")->required();
    sub->add_option("--out,-o", c.out, "output path (default stdout)");
    sub->add_option("--tol", c.tol, "solver tolerance")->check(CLI::PositiveNumber);
    sub->add_flag("--square-denominators", c.square_denominators, "rewrite p/q as p*q/q^2");
  };
  auto psi_options = [&](CLI::App* sub, bool with_delta) {
    sub->add_option("--k", c.k, "relaxation order of psi")->check(CLI::PositiveNumber);
    sub->add_option("--mode", c.mode, "dense or sparse")->check(CLI::IsMember({"dense", "sparse"}));
    if (with_delta) {
      sub->add_option("--psi", c.psi_file, "reuse psi from an approx output");
      sub->add_option("--delta", c.delta, "sublevel threshold")->check(CLI::PositiveNumber);
    }
  };

  CLI::App* bounds = app.add_subcommand("bounds", "certified objective bounds over the feasible set");
  common(bounds);
  bounds->add_option("--order", c.order, "relaxation order (default per objective)");

  CLI::App* approx = app.add_subcommand("approx", "compute psi_k");
  common(approx);
  psi_options(approx, false);
  approx->add_flag("--certificate", c.certificate, "include Gram matrices in the output");

  CLI::App* sample = app.add_subcommand("sample", "image sample of A(delta, k) as CSV");
  common(sample);
  psi_options(sample, true);
  sample->add_option("--grid", c.grid, "points per axis");

  CLI::App* check = app.add_subcommand("check", "containment of A(delta, k) against the grid oracle");
  common(check);
  psi_options(check, true);
  check->add_option("--grid", c.grid, "points per axis");

  CLI::App* minimize = app.add_subcommand("minimize", "minimize a polynomial over A(delta, k)");
  common(minimize);
  psi_options(minimize, true);
  minimize->add_option("--objective", c.objective_file, "objective file {\"n\", \"objective\": TERMS}");
  minimize->add_option("--order", c.order, "moment relaxation order");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (*bounds) return run_bounds(c);
    if (*approx) return run_approx(c);
    if (*sample) return run_sample(c);
    if (*check) return run_check(c);
    if (*minimize) return run_minimize(c);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.exit_code();
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  }
  return 0;
}
