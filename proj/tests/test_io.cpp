#include <pareto_sos/io.hpp>

#include "fixtures.hpp"

#include <gtest/gtest.h>

#include <fstream>
#include <random>

using namespace psos;

namespace {

std::string problem(const std::string& name) { return std::string(PARETO_SOS_PROBLEMS_DIR) + "/" + name; }
std::string data(const std::string& name) { return std::string(PARETO_SOS_DATA_DIR) + "/" + name; }

}  // namespace

TEST(Load, Example1MatchesFixture) {
  const ProblemSpec spec = io::load(problem("example1.json"));
  const ProblemSpec ref = fixtures::example1();
  ASSERT_EQ(spec.num_objectives(), 3u);
  ASSERT_EQ(spec.constraints.size(), 1u);
  EXPECT_TRUE(spec.is_unit_box());
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(spec.objectives[i].p, ref.objectives[i].p);
    EXPECT_EQ(spec.objectives[i].q, ref.objectives[i].q);
  }
  EXPECT_EQ(spec.constraints[0], ref.constraints[0]);
}

TEST(Load, AllShippedProblemsPassScreening) {
  for (const char* f : {"example1.json", "example2.json", "example3.json", "example5.json", "shifted_disk.json"})
    EXPECT_NO_THROW(io::load(problem(f))) << f;
  const ProblemSpec ex3 = io::load(problem("example3.json"));
  const double p[] = {0.3, 0.5};
  EXPECT_NEAR(ex3.constraints[0].eval(p), fixtures::bicorn().eval(p), 1e-15);
}

TEST(Load, MalformedInputIsParseError) {
  for (const char* f : {"bad_syntax.json", "bad_exponents.json", "bad_box.json", "missing.json"})
    EXPECT_THROW(io::load(data(f)), ParseError) << f;
  EXPECT_THROW(io::parse_problem(io::json::parse(R"({"n": 0, "objectives": [], "box": []})")), ParseError);
  EXPECT_THROW(io::parse_problem(io::json::parse(R"({"n": 1, "objectives": [{"p": [[1, [1]]], "q": []}], "box": [[-1, 1]]})")),
               ParseError);
  try {
    io::load(data("bad_exponents.json"));
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("objectives[0].p[0]"), std::string::npos);
    EXPECT_EQ(e.exit_code(), 2);
  }
}

TEST(Load, AssumptionViolations) {
  try {
    io::load(data("zero_denominator.json"));
    FAIL();
  } catch (const AssumptionError& e) {
    EXPECT_NE(std::string(e.what()).find("denominator of objective 1"), std::string::npos);
    EXPECT_EQ(e.exit_code(), 3);
  }
  EXPECT_THROW(io::load(data("empty_feasible.json")), AssumptionError);
  EXPECT_NO_THROW(io::load(data("zero_denominator.json"), false));
}

TEST(Load, EmptyConstraintsMeanBox) {
  const ProblemSpec spec = io::load(data("box_only.json"));
  EXPECT_TRUE(spec.constraints.empty());
  const double corner[] = {1.0, -1.0};
  EXPECT_TRUE(spec.feasible(corner, 0.0));
}

TEST(Rescale, IdentityOnUnitBox) {
  const auto [scaled, map] = io::rescale(fixtures::example2());
  const ProblemSpec ref = fixtures::example2();
  for (std::size_t i = 0; i < 2; ++i) {
    EXPECT_EQ(scaled.objectives[i].p, ref.objectives[i].p);
    EXPECT_EQ(scaled.objectives[i].q, ref.objectives[i].q);
  }
  EXPECT_EQ(map.center, std::vector<double>({0.0, 0.0}));
}

TEST(Rescale, ShiftedBoxRoundTrip) {
  const ProblemSpec spec = io::load(problem("shifted_disk.json"));
  const auto [scaled, map] = io::rescale(spec);
  EXPECT_TRUE(scaled.is_unit_box());
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int t = 0; t < 50; ++t) {
    const std::vector<double> s = {u(rng), u(rng)};
    const auto x = map.to_original(s);
    EXPECT_NEAR(map.to_scaled(x)[0], s[0], 1e-14);
    EXPECT_NEAR(scaled.constraints[0].eval(s), spec.constraints[0].eval(x), 1e-13);
    for (std::size_t i = 0; i < 2; ++i)
      EXPECT_NEAR(scaled.objectives[i].p.eval(s), spec.objectives[i].p.eval(x), 1e-13);
    const Polynomial back = map.push_forward(scaled.constraints[0]);
    EXPECT_NEAR(back.eval(x), spec.constraints[0].eval(x), 1e-13);
  }
}

TEST(Artifacts, PsiRoundTripsThroughJson) {
  const ProblemSpec spec = io::load(problem("shifted_disk.json"));
  const auto [scaled, map] = io::rescale(spec);
  const auto r = approximate_psi(scaled, 2);
  const io::json j = io::approximation_json(r, map, true);
  EXPECT_EQ(j["k"], 2);
  EXPECT_TRUE(j["verified"].get<bool>());
  const std::string path = ::testing::TempDir() + "psi_roundtrip.json";
  std::ofstream(path) << j.dump(2);
  const io::LoadedPsi back = io::load_psi(path, map);
  EXPECT_EQ(back.psi_scaled, r.psi);
  const Polynomial original = io::parse_terms(j["psi"], 2, "psi");
  const std::vector<double> s = {0.2, -0.4};
  EXPECT_NEAR(original.eval(map.to_original(s)), r.psi.eval(s), 1e-9);
  EXPECT_EQ(j.dump(), io::approximation_json(r, map, true).dump());
}
