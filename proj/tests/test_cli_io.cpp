#include <gtest/gtest.h>

#include <numbers>
#include <sstream>

#include "fixtures.hpp"

using namespace emqs;
using FT = FormulationTag;

namespace {

const char* kMinimal = R"({"grid": {"cells": [3, 3, 3]}, "formulations": ["EMQS_SYMMETRIZED"]})";

std::string error_of(const std::string& text) {
  try {
    parse_scenario_text(text);
  } catch (const InvalidArgument& e) {
    return e.what();
  }
  return "";
}

std::size_t count_lines(const std::string& s, const std::string& eol) {
  std::size_t n = 0;
  for (std::size_t p = s.find(eol); p != std::string::npos; p = s.find(eol, p + eol.size())) ++n;
  return n;
}

}  // namespace

TEST(Scenario, SampleFilesParseAndRoundTrip) {
  for (const char* name : {"conductor_loop.json", "insulating_dipole.json", "quasistatic_ramp.json",
                           "structure_mixed.json"}) {
    const Scenario s = parse_scenario(fx::scenario_path(name));
    EXPECT_EQ(parse_scenario_text(echo(s)), s) << name;
    EXPECT_NO_THROW(build_problem(s)) << name;
  }
}

TEST(Scenario, Defaults) {
  const Scenario s = parse_scenario_text(kMinimal);
  EXPECT_EQ(s.ground, (Lattice{1, 1, 1}));
  EXPECT_EQ(s.stepper.theta, 0.5);
  EXPECT_EQ(s.source.amplitude, 0.0);
  EXPECT_EQ(s.A0.kind, InitKind::Zero);
  // No sine source: the artificial time constant follows the step.
  EXPECT_DOUBLE_EQ(s.artificial.tau, 10.0 * s.stepper.dt);
}

TEST(Scenario, TauFollowsSineFrequency) {
  const Scenario s = parse_scenario(fx::scenario_path("conductor_loop.json"));
  EXPECT_DOUBLE_EQ(s.artificial.tau, 1.0 / (2.0 * std::numbers::pi * 0.1));
}

TEST(Scenario, ErrorsNameTheField) {
  EXPECT_NE(error_of(R"({"grid": {"cells": [3, 3, 3]}, "formulations": ["EMQS_SYMMETRIZED"],
      "materials": {"regions": [{"name": "cu", "lo": [0,0,0], "hi": [1,1,1], "kappa": -1}]}})")
                .find("materials.regions[0] (cu): kappa must be >= 0"),
            std::string::npos);
  EXPECT_NE(error_of(R"({"grid": {"cells": [3, 3, 3]}, "formulations": ["EMQS"]})").find("valid tags: MAXWELL"),
            std::string::npos);
  EXPECT_NE(error_of(R"({"grid": {"cells": [3, 3, 3]}, "formulations": ["MAXWELL"], "stepper": {"dtt": 1}})")
                .find("stepper.dtt: unknown key"),
            std::string::npos);
  EXPECT_NE(error_of(R"({"formulations": ["MAXWELL"]})").find("grid: missing"), std::string::npos);
  EXPECT_NE(error_of(R"({"grid": {"cells": [3, 3, 3]}, "formulations": ["MAXWELL"], "stepper": {"theta": 0.2}})")
                .find("theta"),
            std::string::npos);
  EXPECT_NE(error_of("{ not json").find("scenario: <text>"), std::string::npos);
}

TEST(Scenario, CommentsAllowed) {
  EXPECT_NO_THROW(parse_scenario_text(std::string("// note\n") + kMinimal));
}

TEST(Scenario, LoopPatternIsSolenoidal) {
  const Scenario s = parse_scenario(fx::scenario_path("conductor_loop.json"));
  const Problem p = build_problem(s);
  const Vector u = build_pattern(s, p.map);
  EXPECT_EQ(u.cwiseAbs().sum(), 4.0);
  EXPECT_EQ((p.ops.G.transpose() * u).cwiseAbs().maxCoeff(), 0.0);
  EXPECT_EQ(u, fx::loop_pattern(p.map));
  EXPECT_TRUE(scenario_warnings(s, p).empty());
}

TEST(Scenario, Warnings) {
  const Scenario d = parse_scenario(fx::scenario_path("insulating_dipole.json"));
  const auto w = scenario_warnings(d, build_problem(d));
  ASSERT_EQ(w.size(), 1u);
  EXPECT_NE(w[0].find("not solenoidal"), std::string::npos);

  const Scenario r = parse_scenario_text(R"({"grid": {"cells": [3, 3, 3]},
      "formulations": ["MAXWELL", "EMQS_SYMMETRIZED"], "init": {"A0": {"kind": "random"}}})");
  const auto wr = scenario_warnings(r, build_problem(r));
  ASSERT_EQ(wr.size(), 1u);
  EXPECT_NE(wr[0].find("random A0"), std::string::npos);

  const Scenario k = parse_scenario_text(R"({"grid": {"cells": [3, 3, 3]},
      "materials": {"regions": [{"lo": [1, 1, 1], "hi": [2, 2, 2], "eps": 3}]},
      "artificial": {"kappa_hat": 0.5}, "formulations": ["EMQS_COULOMB_SKEW"]})");
  const auto wk = scenario_warnings(k, build_problem(k));
  ASSERT_EQ(wk.size(), 1u);
  EXPECT_NE(wk[0].find("proportional to eps"), std::string::npos);
}

TEST(Scenario, SeededInitialFieldsAreReproducible) {
  const Scenario s = parse_scenario_text(R"({"grid": {"cells": [3, 3, 3]}, "seed": 5,
      "formulations": ["MAXWELL"], "init": {"A0": {"kind": "random", "amplitude": 2}}})");
  const Problem p = build_problem(s);
  const auto [a1, f1] = initial_fields(s, p);
  const auto [a2, f2] = initial_fields(s, p);
  EXPECT_EQ(a1, a2);
  EXPECT_LE(a1.cwiseAbs().maxCoeff(), 2.0);
  EXPECT_GT(a1.cwiseAbs().maxCoeff(), 0.0);
  EXPECT_EQ(f1.cwiseAbs().maxCoeff(), 0.0);
}

TEST(MatrixMarket, RoundTripIsBitExact) {
  const Problem p = fx::mixed_problem(3);
  for (FT t : kAllTags) {
    const BlockSystem s = p.system(t);
    for (const SparseMatrix* m : {&s.E, &s.J, &s.R, &s.B}) {
      std::stringstream ss;
      mm::write(ss, *m, "tag " + std::string(tag_name(t)) + "\nsecond line");
      const SparseMatrix back = mm::read(ss);
      ASSERT_EQ(back.rows(), m->rows());
      ASSERT_EQ(back.cols(), m->cols());
      EXPECT_EQ(max_abs(back - *m), 0.0);
      EXPECT_EQ(back.nonZeros(), Index(mm::canonical_triplets(*m).size()));
    }
  }
}

TEST(MatrixMarket, OneBasedSortedEntries) {
  SparseMatrix m(2, 3);
  m.insert(1, 2) = 0.1;
  m.insert(0, 0) = -3.0;
  std::ostringstream os;
  mm::write(os, m);
  EXPECT_EQ(os.str(),
            "%%MatrixMarket matrix coordinate real general\n2 3 2\n1 1 -3\n2 3 0.10000000000000001\n");
}

TEST(MatrixMarket, RejectsMalformedInput) {
  auto bad = [](const std::string& text) {
    std::istringstream is(text);
    EXPECT_THROW(mm::read(is), Error) << text;
  };
  bad("");
  bad("%%MatrixMarket matrix array real general\n1 1\n1\n");
  bad("%%MatrixMarket matrix coordinate complex general\n1 1 1\n1 1 1 0\n");
  bad("%%MatrixMarket matrix coordinate real symmetric\n1 1 1\n1 1 1\n");
  bad("%%MatrixMarket matrix coordinate real general\n2 2 1\n3 1 1\n");
  bad("%%MatrixMarket matrix coordinate real general\n2 2 2\n1 1 1\n");
  std::istringstream ok("%%MatrixMarket matrix coordinate integer general\n% c\n2 2 1\n2 1 7\n");
  EXPECT_EQ(mm::read(ok).coeff(1, 0), 7.0);
}

TEST(Ledger, CsvHasFixedColumns) {
  const Problem p = fx::mixed_problem(2);
  const RunResult r = simulate(p, FT::EmqsSymmetrized, fx::midpoint(0.1, 7),
                               SourceWaveform::none(p.ops.num_edges()), p.zero_edges(), p.zero_nodes());
  std::ostringstream os;
  write_ledger_csv(os, r.ledger);
  const std::string csv = os.str();
  EXPECT_EQ(count_lines(csv, "\r\n"), 1u + 8u);
  const std::string header = csv.substr(0, csv.find("\r\n"));
  EXPECT_EQ(header,
            "step,t,h_quadratic,h_fieldwise,h_difference,dissipation,port_power,work_in,"
            "work_dissipated,balance_residual,balance_relative,gauge_residual,gauge_relative,"
            "lambda_max,phi_max,flux_residual,flux_relative");
  std::istringstream rows(csv);
  for (std::string line; std::getline(rows, line);)
    EXPECT_EQ(std::count(line.begin(), line.end(), ','), 16) << line;
}

TEST(Verdicts, JsonFields) {
  Verdict v{"flux_constraint", "MAXWELL", "<= tolerance", 1e-12, 1e-10, true, {}};
  const Json j = to_json(v);
  std::vector<std::string> keys;
  for (auto it = j.begin(); it != j.end(); ++it) keys.push_back(it.key());
  EXPECT_EQ(keys, (std::vector<std::string>{"check", "tag", "expected", "measured", "tolerance", "pass"}));
  v.measured = std::numeric_limits<double>::quiet_NaN();
  v.detail = "x";
  const Json k = to_json(v);
  EXPECT_EQ(k["measured"], "nan");
  EXPECT_EQ(k["detail"], "x");
}
