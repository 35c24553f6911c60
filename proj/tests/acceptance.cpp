// End-to-end acceptance run: one PASS/FAIL line per criterion.
// usage: acceptance <pareto-sos binary> <work dir>

#include <pareto_sos/analysis.hpp>
#include <pareto_sos/io.hpp>

#include "sdp_instances.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

using namespace psos;
namespace fs = std::filesystem;

namespace {

std::string problem_path(const std::string& name) { return std::string(PARETO_SOS_PROBLEMS_DIR) + "/" + name; }

ProblemSpec load_scaled(const std::string& name) {
  auto [scaled, map] = io::rescale(io::load(problem_path(name)));
  return scaled;
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail += (detail.empty() ? "" : "; ") + std::string("FAILED ") + what;
    }
  }
  void note(const std::string& s) { detail += (detail.empty() ? "" : "; ") + s; }
};

ApproximationResult approx(const ProblemSpec& spec, int k, Mode mode) {
  ApproximationOptions o;
  o.mode = mode;
  return approximate_psi(spec, k, o);
}

struct Runs {
  std::map<std::pair<int, Mode>, ApproximationResult> by_order;
  const ApproximationResult& at(int k, Mode m) const { return by_order.at({k, m}); }
};

Runs run_orders(const ProblemSpec& spec, std::initializer_list<int> orders) {
  Runs r;
  for (int k : orders)
    for (Mode m : {Mode::Dense, Mode::Sparse}) r.by_order.emplace(std::make_pair(k, m), approx(spec, k, m));
  return r;
}

/// Oracle values of psi on the evaluation grid, candidates from a finer grid.
std::vector<double> oracle_values(const ProblemSpec& spec, const Grid& eval, double cap) {
  const CandidateSet cand(spec, Grid::unit(spec.n, 201));
  std::vector<double> out;
  out.reserve(eval.size());
  eval.for_each([&](std::span<const double> x) { out.push_back(psi_oracle(spec, x, cand, {cap})); });
  return out;
}

std::vector<double> psi_values(const Polynomial& psi, const Grid& eval) {
  std::vector<double> out;
  out.reserve(eval.size());
  eval.for_each([&](std::span<const double> x) { out.push_back(psi.eval(x)); });
  return out;
}

void report(int id, const std::string& name, const Outcome& o, double seconds) {
  std::cout << (o.pass ? "PASS" : "FAIL") << "  criterion " << id << " (" << name << "): " << o.detail << " ["
            << fmt("%.1f", seconds) << " s]" << std::endl;
}

template <class F>
bool criterion(int id, const std::string& name, F&& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    body(o);
  } catch (const std::exception& e) {
    o.pass = false;
    o.note(std::string("exception: ") + e.what());
  }
  report(id, name, o, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  return o.pass;
}

// Golub-Welsch nodes and weights on [-1, 1].
std::pair<Eigen::VectorXd, Eigen::VectorXd> gauss_legendre(int n) {
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
  for (int i = 1; i < n; ++i) J(i, i - 1) = J(i - 1, i) = i / std::sqrt(4.0 * i * i - 1.0);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
  Eigen::VectorXd w = 2.0 * es.eigenvectors().row(0).transpose().array().square();
  return {es.eigenvalues(), w};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

int shell(const std::string& cmd) { return std::system(cmd.c_str()); }

}  // namespace

int main(int argc, char** argv) {
  if (argc < 3) {
    std::cerr << "usage: acceptance <pareto-sos binary> <work dir>\n";
    return 2;
  }
  const std::string cli = argv[1];
  const fs::path work = argv[2];
  fs::create_directories(work);
  int failures = 0;
  auto tally = [&](bool ok) { failures += ok ? 0 : 1; };

  const ProblemSpec ex1 = load_scaled("example1.json");
  const ProblemSpec ex2 = load_scaled("example2.json");
  const ProblemSpec ex3 = load_scaled("example3.json");
  const ProblemSpec ex5 = load_scaled("example5.json");
  const double delta = 0.1;

  Runs ex1_runs;
  tally(criterion(1, "Pareto-constrained minimization, Example 3", [&](Outcome& o) {
    const ApproximationResult psi4 = approx(ex3, 4, Mode::Dense);
    o.require(psi4.diagnostics.verified, "psi_4 certificate verified");
    const GeneratorSet gens = pareto_constrained_generators(ex3, psi4.psi, 0.01);
    const Polynomial x1 = Polynomial::variable(2, 0), x2 = Polynomial::variable(2, 1);
    const Polynomial target = x1 * x1 + (x2 - Polynomial::constant(2, 1.0)) * (x2 - Polynomial::constant(2, 1.0));
    const MinimizationResult r = minimize_over(target, gens, 4);
    const double dist = std::hypot(r.candidate[0], r.candidate[1] - 1.0 / 3.0);
    const double g = ex3.constraints[0].eval(r.candidate), psi_at = psi4.psi.eval(r.candidate);
    o.note("value " + fmt("%.6f", r.value) + " at (" + fmt("%.4f", r.candidate[0]) + ", " + fmt("%.4f", r.candidate[1]) +
           "), g " + fmt("%.2e", g) + ", psi_4 " + fmt("%.8f", psi_at));
    o.require(r.value >= 0.39 && r.value <= 0.45, "value in [0.39, 0.45]");
    o.require(dist <= 0.10, "candidate within 0.10 of (0, 1/3)");
    o.require(g >= -1e-6, "g(candidate) >= -1e-6");
    o.require(psi_at <= 0.01 + 1e-6, "psi_4(candidate) <= 0.01 + 1e-6");
  }));

  std::vector<ContainmentReport> ex1_containment;
  tally(criterion(2, "containment A(0.1, k) in weakly 0.1-efficient set, Example 1, 201^2 grid", [&](Outcome& o) {
    ex1_runs = run_orders(ex1, {2, 3, 4});
    const Grid grid = Grid::unit(2, 201);
    const CandidateSet cand(ex1, grid);
    const double slack = grid_error(ex1, grid);
    for (int k = 2; k <= 4; ++k) {
      const RegionQuery q(ex1, ex1_runs.at(k, Mode::Dense).psi, delta, k);
      ex1_containment.push_back(containment_report(q, grid, cand, slack));
      o.note("k=" + std::to_string(k) + " violations " + std::to_string(ex1_containment.back().violations));
      o.require(ex1_containment.back().violations == 0, "zero violations at k=" + std::to_string(k));
    }
    o.note("slack " + fmt("%.4f", slack));
  }));

  tally(criterion(3, "volume growth of A(0.1, k), Example 1", [&](Outcome& o) {
    o.require(ex1_containment.size() == 3, "containment runs available");
    if (ex1_containment.size() != 3) return;
    for (std::size_t i = 0; i < 3; ++i) o.note("k=" + std::to_string(i + 2) + " count " + std::to_string(ex1_containment[i].count_region));
    o.require(ex1_containment[0].count_region <= ex1_containment[1].count_region &&
                  ex1_containment[1].count_region <= ex1_containment[2].count_region,
              "counts non-decreasing");
    o.note("ratio at k=4 " + fmt("%.4f", ex1_containment[2].ratio));
    o.require(ex1_containment[2].ratio >= 0.5, "ratio >= 0.5");
  }));

  std::vector<double> ex1_oracle;
  const Grid eval = Grid::unit(2, 101);
  tally(criterion(4, "psi_k >= oracle on 101^2 grid, Examples 1, 2, 5", [&](Outcome& o) {
    const Runs ex2_runs = run_orders(ex2, {3, 4});
    const Runs ex5_runs = run_orders(ex5, {2, 3, 4});
    for (const auto& [name, runs] : {std::pair<const char*, const Runs*>{"ex1", &ex1_runs}, {"ex2", &ex2_runs}, {"ex5", &ex5_runs}}) {
      const ProblemSpec& spec = std::string(name) == "ex1" ? ex1 : std::string(name) == "ex2" ? ex2 : ex5;
      const auto& first = runs->by_order.begin()->second;
      const std::vector<double> orc = oracle_values(spec, eval, first.f_upper - first.f_lower);
      if (std::string(name) == "ex1") ex1_oracle = orc;
      double worst = std::numeric_limits<double>::infinity();
      for (const auto& [key, r] : runs->by_order) {
        o.require(r.diagnostics.verified, std::string(name) + " k=" + std::to_string(key.first) + " " + to_string(key.second) + " verified");
        const std::vector<double> vals = psi_values(r.psi, eval);
        double gap = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < vals.size(); ++i) gap = std::min(gap, vals[i] - orc[i]);
        worst = std::min(worst, gap);
        o.require(gap >= -1e-5, std::string(name) + " k=" + std::to_string(key.first) + " " + to_string(key.second));
      }
      o.note(std::string(name) + " " + std::to_string(runs->by_order.size()) + " runs, min gap " + fmt("%.2e", worst));
    }
  }));

  tally(criterion(5, "rho_k monotone and sparse >= dense, Example 1", [&](Outcome& o) {
    double prev = std::numeric_limits<double>::infinity();
    for (int k = 2; k <= 4; ++k) {
      const double d = ex1_runs.at(k, Mode::Dense).rho, s = ex1_runs.at(k, Mode::Sparse).rho;
      o.note("k=" + std::to_string(k) + " dense " + fmt("%.6f", d) + " sparse " + fmt("%.6f", s));
      o.require(d <= prev, "dense rho non-increasing at k=" + std::to_string(k));
      o.require(s >= d - 1e-6, "sparse >= dense - 1e-6 at k=" + std::to_string(k));
      prev = d;
    }
  }));

  tally(criterion(6, "L1 shrinkage of psi_k - oracle, Example 1", [&](Outcome& o) {
    o.require(!ex1_oracle.empty(), "oracle values available");
    if (ex1_oracle.empty()) return;
    std::vector<double> l1;
    for (int k = 2; k <= 4; ++k) {
      const std::vector<double> vals = psi_values(ex1_runs.at(k, Mode::Dense).psi, eval);
      double s = 0.0;
      for (std::size_t i = 0; i < vals.size(); ++i) s += vals[i] - ex1_oracle[i];
      l1.push_back(4.0 * s / static_cast<double>(vals.size()));
      o.note("k=" + std::to_string(k) + " " + fmt("%.5f", l1.back()));
    }
    const double drop = (l1[0] - l1[2]) / l1[0];
    o.note("reduction " + fmt("%.1f%%", 100.0 * drop));
    o.require(l1[1] < l1[0] && l1[2] < l1[1], "strictly decreasing");
    o.require(drop >= 0.10, "reduction >= 10%");
  }));

  tally(criterion(7, "certified objective bounds, Examples 1-3, 401^2 grid", [&](Outcome& o) {
    const Grid grid = Grid::unit(2, 401);
    for (const auto& [name, spec] : {std::pair<const char*, const ProblemSpec*>{"ex1", &ex1}, {"ex2", &ex2}, {"ex3", &ex3}}) {
      const Bounds b = compute_bounds(*spec);
      const std::size_t m = spec->num_objectives();
      std::vector<double> lo(m, std::numeric_limits<double>::infinity()), hi(m, -std::numeric_limits<double>::infinity());
      grid.for_each([&](std::span<const double> x) {
        if (!spec->feasible(x, 1e-12)) return;
        const auto f = spec->objective_values(x);
        for (std::size_t i = 0; i < m; ++i) lo[i] = std::min(lo[i], f[i]), hi[i] = std::max(hi[i], f[i]);
      });
      for (std::size_t i = 0; i < m; ++i) {
        const std::string tag = std::string(name) + " f" + std::to_string(i + 1);
        o.require(b.lower[i].value <= lo[i], tag + " lower <= grid min");
        o.require(b.upper[i].value >= hi[i], tag + " upper >= grid max");
        o.require(b.lower[i].report.passed && b.upper[i].report.passed, tag + " certificates verified");
      }
      if (std::string(name) == "ex1") {
        o.require(std::abs(b.lower[0].value + 1.0) <= 1e-6, "ex1 f1 lower = -1");
        o.require(std::abs(b.lower[2].value) <= 1e-6, "ex1 f3 lower = 0");
        o.note("ex1 f1 lower " + fmt("%.9f", b.lower[0].value) + ", f3 lower " + fmt("%.2e", b.lower[2].value));
      }
      o.note(std::string(name) + " [" + fmt("%.4f", b.f_lower()) + ", " + fmt("%.4f", b.f_upper()) + "]");
    }
  }));

  tally(criterion(8, "moments vs Gauss-Legendre, n=2, degree 10", [&](Outcome& o) {
    const auto [x, w] = gauss_legendre(20);
    const MomentTable t = moments(2, 10);
    double worst = 0.0;
    std::size_t odd_nonzero = 0;
    for (const auto& [a, g] : t.values) {
      double q = 0.0;
      for (int i = 0; i < 20; ++i)
        for (int j = 0; j < 20; ++j) q += w(i) * w(j) * std::pow(x(i), a[0]) * std::pow(x(j), a[1]);
      worst = std::max(worst, std::abs(g - q / 4.0));
      if (!a.all_even() && g != 0.0) ++odd_nonzero;
    }
    o.note(std::to_string(t.values.size()) + " moments, max error " + fmt("%.1e", worst));
    o.require(worst <= 1e-10, "max error <= 1e-10");
    o.require(odd_nonzero == 0, "odd moments exactly 0");
  }));

  tally(criterion(9, "SDP solver properties and 100 constructed instances", [&](Outcome& o) {
    using namespace sdp_instances;
    const auto s1 = solve(tied_scalar());
    o.require(s1.status == Status::Optimal && std::abs(s1.free_values(0) - 1.0) <= 1e-6, "tied scalar optimum 1");
    const auto p2 = two_by_two();
    const auto s2 = solve(p2);
    const auto r2 = residuals(p2, s2);
    o.require(s2.status == Status::Optimal && std::abs(s2.free_values(0) - 1.0) <= 1e-6, "2x2 optimum 1");
    o.require(r2.primal_feas <= 1e-6 && r2.dual_feas <= 1e-6 && r2.gap <= 1e-6, "2x2 residuals");
    std::mt19937_64 rng(20240601);
    int ok = 0;
    double worst_obj = 0.0, worst_res = 0.0;
    for (int t = 0; t < 100; ++t) {
      const int n = 2 + t % 4, m = n + t % 3, rank = 1 + t % 2;
      const Constructed c = constructed_instance(rng, n, m, std::min(rank, n - 1));
      const auto s = solve(c.problem);
      const auto r = residuals(c.problem, s);
      const double obj_err = std::abs(s.primal_obj - c.optimum) / (1.0 + std::abs(c.optimum));
      const double res = std::max({r.primal_feas, r.dual_feas, r.gap});
      const bool weak = s.dual_obj <= s.primal_obj + 1e-6 * (1.0 + std::abs(s.primal_obj));
      worst_obj = std::max(worst_obj, obj_err);
      worst_res = std::max(worst_res, res);
      if (s.status == Status::Optimal && obj_err <= 1e-6 && res <= 1e-6 && weak) ++ok;
    }
    o.note(std::to_string(ok) + "/100 instances, max objective error " + fmt("%.1e", worst_obj) + ", max residual " +
           fmt("%.1e", worst_res));
    o.require(ok == 100, "all 100 instances");
  }));

  tally(criterion(10, "byte-identical artifacts across two CLI runs of criteria 1-3", [&](Outcome& o) {
    const std::string ex1p = problem_path("example1.json"), ex3p = problem_path("example3.json");
    auto pipeline = [&](const fs::path& dir) {
      fs::remove_all(dir);
      fs::create_directories(dir);
      std::vector<std::string> cmds;
      for (int k = 2; k <= 4; ++k) {
        const std::string psi = (dir / ("ex1_psi" + std::to_string(k) + ".json")).string();
        cmds.push_back(cli + " approx " + ex1p + " --k " + std::to_string(k) + " --certificate --out " + psi);
        cmds.push_back(cli + " check " + ex1p + " --psi " + psi + " --delta 0.1 --grid 201 --out " +
                       (dir / ("ex1_check" + std::to_string(k) + ".json")).string());
        cmds.push_back(cli + " sample " + ex1p + " --psi " + psi + " --delta 0.1 --grid 201 --out " +
                       (dir / ("ex1_sample" + std::to_string(k) + ".csv")).string());
      }
      const std::string psi3 = (dir / "ex3_psi4.json").string();
      cmds.push_back(cli + " approx " + ex3p + " --k 4 --certificate --out " + psi3);
      cmds.push_back(cli + " minimize " + ex3p + " --psi " + psi3 + " --delta 0.01 --objective " +
                     problem_path("example3_distance.json") + " --out " + (dir / "ex3_minimize.json").string());
      for (const auto& c : cmds)
        if (shell(c) != 0) throw std::runtime_error("command failed: " + c);
    };
    const fs::path a = work / "run_a", b = work / "run_b";
    pipeline(a);
    pipeline(b);
    std::size_t files = 0, bytes = 0;
    for (const auto& entry : fs::directory_iterator(a)) {
      const std::string name = entry.path().filename().string();
      const std::string x = slurp(entry.path()), y = slurp(b / name);
      ++files;
      bytes += x.size();
      o.require(!x.empty() && x == y, name + " identical");
    }
    o.note(std::to_string(files) + " files, " + std::to_string(bytes) + " bytes");
    o.require(files == 11, "11 artifacts");
  }));

  std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed") << std::endl;
  return failures == 0 ? 0 : 1;
}
