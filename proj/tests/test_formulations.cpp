#include <gtest/gtest.h>

#include "fixtures.hpp"

using namespace emqs;
using FT = FormulationTag;

namespace {

std::vector<FT> all_tags() { return {kAllTags.begin(), kAllTags.end()}; }

}  // namespace

TEST(Tags, NamesRoundTrip) {
  for (FT t : kAllTags) EXPECT_EQ(parse_tag(tag_name(t)), t);
  try {
    parse_tag("EMQS");
    FAIL() << "unknown tag accepted";
  } catch (const InvalidArgument& e) {
    EXPECT_NE(std::string(e.what()).find("MAXWELL"), std::string::npos);
  }
}

TEST(Assembly, LayoutSizes) {
  const Problem p = fx::mixed_problem(3);
  for (FT t : kAllTags) {
    const BlockSystem s = p.system(t);
    const Index lam = has_lambda(t) ? 8 : 0;
    EXPECT_EQ(s.dim(), 36 + 8 + 54 + lam) << tag_name(t);
    EXPECT_EQ(s.B.rows(), s.dim());
    EXPECT_EQ(s.B.cols(), 36);
  }
}

class DenseOracle : public ::testing::TestWithParam<FT> {};

TEST_P(DenseOracle, SparseEqualsDense) {
  for (int n : {2, 3}) {
    const Problem p = fx::mixed_problem(n);
    const Verdict v = dense_oracle_check(p, GetParam());
    EXPECT_TRUE(v.pass) << n << " " << v.tag << " " << v.measured << " " << v.detail;
    EXPECT_EQ(v.measured, 0.0);
  }
}

TEST_P(DenseOracle, PerturbedHodgeDetected) {
  const Problem p = fx::mixed_problem(2);
  const Verdict v = dense_oracle_check(p, GetParam(), true);
  EXPECT_TRUE(v.pass) << v.tag;
  EXPECT_GT(v.measured, 0.0);
}

INSTANTIATE_TEST_SUITE_P(AllTags, DenseOracle, ::testing::ValuesIn(kAllTags),
                         [](const auto& info) { return std::string(tag_name(info.param)); });

TEST(Structure, SuitePassesOnMixedMaterials) {
  for (int n : {2, 3}) {
    const Problem p = fx::mixed_problem(n);
    for (const Verdict& v : run_structure_suite(p, all_tags()))
      EXPECT_TRUE(v.pass) << n << " " << v.check << " " << v.tag << " " << v.measured;
  }
}

TEST(Structure, SymmetryProfile) {
  const Problem p = fx::mixed_problem(3);
  for (FT t : kAllTags) {
    const auto r = structure_report(p.system(t));
    if (symmetric_e(t))
      EXPECT_EQ(r.e_symmetry_defect, 0.0) << tag_name(t);
    else
      EXPECT_GT(r.e_symmetry_defect, 0.0) << tag_name(t);
    EXPECT_EQ(r.j_skew_defect, 0.0);
    EXPECT_EQ(r.j_diagonal_max, 0.0);
    if (t == FT::DarwinKappaGauged) {
      EXPECT_GT(r.r_symmetry_defect, 0.0);
    } else {
      EXPECT_EQ(r.r_symmetry_defect, 0.0) << tag_name(t);
      ASSERT_TRUE(r.r_min_eigenvalue);
      EXPECT_GE(*r.r_min_eigenvalue, -1e-12);
    }
  }
}

TEST(Structure, MissingArtificialCoefficientRejected) {
  GridSpec spec;
  spec.cells = {2, 2, 2};
  const DofMap map(spec);
  const Problem p(spec, MaterialField::uniform(map, 1.0, 1.0, 1.0));
  EXPECT_THROW(p.system(FT::DarwinKappaGauged), InvalidArgument);
  EXPECT_THROW(p.system(FT::DarwinEpsGauged), InvalidArgument);
  EXPECT_THROW(p.system(FT::EmqsCoulombSkew), InvalidArgument);
  EXPECT_NO_THROW(p.system(FT::EmqsSymmetrized));
}

TEST(Output, ElectricLineIntegral) {
  const Problem p = fx::mixed_problem(3);
  std::mt19937_64 rng(11);
  for (FT t : kAllTags) {
    const BlockSystem s = p.system(t);
    const Vector x = detail::random_vector(rng, s.dim());
    const auto& L = s.layout;
    Vector expect = L.segment(x, Block::A) + p.ops.G * L.segment(x, Block::Phi);
    if (t == FT::EmqsSplit) expect += p.ops.G * L.segment(x, Block::Lambda);
    EXPECT_LE((output(s, x) - expect).cwiseAbs().maxCoeff(), 1e-14) << tag_name(t);
  }
}

TEST(Pinning, MaxwellPinsEveryPotential) {
  const Problem p = fx::mixed_problem(3);
  const BlockSystem s = p.system(FT::Maxwell);
  ASSERT_EQ(Index(s.pinned.size()), 8);
  for (Index i : s.pinned) EXPECT_EQ(s.layout.block_of(i), Block::Phi);
  EXPECT_TRUE(p.system(FT::EmqsSymmetrized).pinned.empty());
  EXPECT_TRUE(p.system(FT::EmqsLagrange).pinned.empty());
  EXPECT_TRUE(p.system(FT::Maxwell, false).pinned.empty());
}

TEST(Pinning, SplitLambdaFollowsConductivity) {
  // Every interior node of the mixed grid touches a conductive edge and the
  // conductor reaches the boundary: nothing to pin.
  EXPECT_TRUE(fx::mixed_problem(3).system(FT::EmqsSplit).pinned.empty());
  // Without conductivity phi and lambda only appear as phi + lambda.
  const Problem ins = fx::insulating_problem(3);
  const BlockSystem s = ins.system(FT::EmqsSplit);
  ASSERT_EQ(Index(s.pinned.size()), 8);
  for (Index i : s.pinned) EXPECT_EQ(s.layout.block_of(i), Block::Lambda);
  // The artificial conductivity covers every edge of the insulator.
  EXPECT_TRUE(ins.system(FT::EmqsCoulombSkew).pinned.empty());
}

TEST(Pinning, FloatingComponentGetsOneGround) {
  // Conductor block away from the boundary: one floating component.
  GridSpec spec;
  spec.cells = {4, 4, 4};
  const DofMap map(spec);
  Vector w = Vector::Zero(map.num_interior_edges());
  const Index e = map.reduced_edge(map.edge_index(Axis::X, {1, 2, 2}));
  w[e] = 1.0;
  const IncidenceOps ops = assemble_incidence(map);
  const auto nodes = detail::floating_nodes(ops.G, w, std::nullopt);
  // 27 interior nodes, two joined by the weighted edge: 25 isolated + 1 ground.
  EXPECT_EQ(nodes.size(), 26u);
}

TEST(Singularity, UngaugedDarwinStepMatrixIsSingular) {
  const Problem p = fx::mixed_problem(2);
  const BlockSystem s = p.system(FT::DarwinUngauged);
  try {
    ThetaStepper st(s, fx::midpoint(0.1, 1));
    FAIL() << "expected a singular step matrix";
  } catch (const SingularSystemError& e) {
    EXPECT_NE(std::string(e.what()).find("DARWIN_UNGAUGED"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("gauge"), std::string::npos);
  }
}

TEST(Singularity, GaugedVariantsFactorize) {
  const Problem p = fx::mixed_problem(3);
  for (FT t : {FT::Maxwell, FT::DarwinKappaGauged, FT::DarwinEpsGauged, FT::EmqsSymmetrized,
               FT::EmqsLagrange, FT::EmqsSplit, FT::EmqsCoulombSkew}) {
    const BlockSystem s = p.system(t);
    EXPECT_NO_THROW(ThetaStepper(s, fx::midpoint(0.05, 1))) << tag_name(t);
  }
}
