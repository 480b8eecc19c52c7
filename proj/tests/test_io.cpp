#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "solwave/io.hpp"

using namespace solwave;
using io::json;

namespace {
std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}
}  // namespace

TEST(Enums, ParseRoundTrip) {
  EXPECT_EQ(io::parse_symbol_kind("FatCantor"), SymbolKind::FatCantor);
  EXPECT_EQ(io::parse_form("InhomogeneousB2"), NonlinearForm::InhomogeneousB2);
  EXPECT_EQ(io::parse_problem_kind("GammaTilde"), ProblemKind::GammaTilde);
  EXPECT_EQ(io::parse_equation_kind("TravelingEq2Inhom"), EquationKind::TravelingEq2Inhom);
  EXPECT_EQ(io::parse_evolution_equation("Eq2"), EvolutionEquation::Eq2);
  try {
    io::parse_form("B3");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("expected one of B1 B2"), std::string::npos);
  }
}

TEST(Specs, SymbolRoundTrip) {
  const std::vector<SymbolSpec> specs = {fractional(0.7), neg_second_derivative(), capillary_whitham(0.3),
                                         fat_cantor(1.0, 1.0, 2.0, 0.5, 4, 3.0),
                                         tabulated({{0, 1}, {1, 2}, {2, 5}}, 1.0, 0.5, 3.0),
                                         sqrt_symbol(fat_cantor(1.0, 1.0, 2.0, 0.5, 4, 3.0))};
  for (const auto& s : specs) {
    const auto back = io::symbol_from_json(json::parse(io::to_json(s).dump()));
    EXPECT_EQ(back.kind, s.kind);
    EXPECT_EQ(back.power, s.power);
    for (double xi : {0.0, 0.3, 0.5, 1.7, 2.9, 6.0}) EXPECT_EQ(eval_symbol(back, xi), eval_symbol(s, xi));
  }
}

TEST(Specs, ProblemRoundTrip) {
  const auto ps = ProblemSpec::Gamma(2.5, 0.75, fractional(0.5), make_nonlinearity(NonlinearForm::B1, 1.8, 2.0),
                                     Grid(160.0, 4096));
  const auto back = io::problem_from_json(io::to_json(ps));
  EXPECT_EQ(back.kind, ps.kind);
  EXPECT_EQ(back.lambda, 2.5);
  EXPECT_EQ(back.kappa, 0.75);
  EXPECT_EQ(back.nl.form, NonlinearForm::B1);
  EXPECT_EQ(back.nl.cp, 2.0);
  EXPECT_EQ(back.grid, ps.grid);
  json bad = io::to_json(ps);
  bad["kappa"] = -1.0;
  EXPECT_THROW(io::problem_from_json(bad), ConfigError);
}

TEST(Results, ScalarsRoundTrip) {
  SolveResult r;
  r.method = "Gamma";
  r.status = "converged";
  r.converged = true;
  r.equation = EquationKind::TravelingEq2;
  r.multiplier = 1.25;
  r.wave_speed = 0.8;
  r.objective = 2.0;
  r.residual = 1e-9;
  r.multiplier_check = 1.2500001;
  r.problem = ProblemSpec::Gamma(1.0, 1.0, fractional(0.5), make_nonlinearity(NonlinearForm::B1, 1.8),
                                 Grid(160.0, 4096));
  const json j = json::parse(io::to_json(r).dump());
  SolveResult back;
  io::result_scalars_from_json(j, back);
  EXPECT_EQ(back.method, "Gamma");
  EXPECT_EQ(back.multiplier, 1.25);
  EXPECT_EQ(back.multiplier_check, 1.2500001);
  EXPECT_EQ(back.equation, EquationKind::TravelingEq2);
  EXPECT_EQ(back.problem.grid, r.problem.grid);
}

TEST(Results, ExponentJsonUsesInfText) {
  const auto j = io::to_json(classify_exponent(1.0, 2.0));
  EXPECT_EQ(j["existence_range"][1], "inf");
  EXPECT_EQ(j["stability_range"][1], 3.0);
  EXPECT_EQ(j["status"], "stable_existence");
}

TEST(Files, JsonIsStable) {
  const std::string path = ::testing::TempDir() + "m.json";
  json j;
  j["b"] = 1;
  j["a"] = {1.5, 2.5};
  io::write_json(path, j);
  EXPECT_EQ(slurp(path), "{\n  \"b\": 1,\n  \"a\": [\n    1.5,\n    2.5\n  ]\n}\n");
  EXPECT_EQ(io::read_json(path), j);
}

TEST(Files, TraceCsv) {
  EvolutionTrace t;
  t.names = {"E", "Q"};
  t.times = {0.0, 0.5};
  t.invariants = {{-1.8, 3.0}, {-1.8000000000000003, 3.0}};
  const std::string path = ::testing::TempDir() + "trace.csv";
  io::write_trace_csv(path, t);
  EXPECT_EQ(slurp(path), "time,E,Q\n0,-1.8,3\n0.5,-1.8000000000000003,3\n");
  t.distance = {0.0, 1e-3};
  io::write_trace_csv(path, t);
  EXPECT_EQ(slurp(path), "time,E,Q,distance\n0,-1.8,3,0\n0.5,-1.8000000000000003,3,0.001\n");
}

TEST(Files, CurveCsvEscapesErrors) {
  CurveStudy st;
  st.kind = ProblemKind::Gamma;
  CurveRow row;
  row.param = 2.0;
  row.error = "failed, badly\nreally";
  st.rows.push_back(row);
  const std::string path = ::testing::TempDir() + "curve.csv";
  io::write_curve_csv(path, st);
  const auto text = slurp(path);
  EXPECT_EQ(text.rfind("lambda,converged", 0), 0u);
  EXPECT_NE(text.find("failed; badly;really"), std::string::npos);
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 2);
}
