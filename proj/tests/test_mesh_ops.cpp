#include <gtest/gtest.h>

#include <Eigen/SparseQR>

#include "fixtures.hpp"

using namespace emqs;

namespace {

Index sparse_rank(const SparseMatrix& m) {
  Eigen::SparseQR<SparseMatrix, Eigen::COLAMDOrdering<int>> qr;
  SparseMatrix a = m;
  a.makeCompressed();
  qr.compute(a);
  return qr.rank();
}

GridSpec cube(int n) {
  GridSpec s;
  s.cells = {n, n, n};
  return s;
}

}  // namespace

TEST(Grid, FullComplexCounts) {
  GridSpec s;
  s.cells = {2, 3, 4};
  const DofMap m(s);
  EXPECT_EQ(m.num_nodes(), 3 * 4 * 5);
  EXPECT_EQ(m.num_edges(), 2 * 4 * 5 + 3 * 3 * 5 + 3 * 4 * 4);
  EXPECT_EQ(m.num_faces(), 3 * 3 * 4 + 2 * 4 * 4 + 2 * 3 * 5);
  EXPECT_EQ(m.num_cells(), 24);
  // Euler characteristic of a solid box.
  EXPECT_EQ(m.num_nodes() - m.num_edges() + m.num_faces() - m.num_cells(), 1);
}

TEST(Grid, PecCounts) {
  for (int n : {2, 3, 4}) {
    const DofMap m(cube(n));
    EXPECT_EQ(m.num_interior_nodes(), (n - 1) * (n - 1) * (n - 1));
    EXPECT_EQ(m.num_interior_edges(), 3 * n * (n - 1) * (n - 1));
    EXPECT_EQ(m.num_interior_faces(), 3 * (n - 1) * n * n);
  }
}

TEST(Grid, IndexRoundTrip) {
  GridSpec s;
  s.cells = {2, 3, 2};
  const DofMap m(s);
  for (Index i = 0; i < m.num_nodes(); ++i) EXPECT_EQ(m.node_index(m.node_lattice(i)), i);
  for (Index i = 0; i < m.num_edges(); ++i) {
    const auto [a, p] = m.edge_lattice(i);
    EXPECT_EQ(m.edge_index(a, p), i);
  }
  for (Index i = 0; i < m.num_faces(); ++i) {
    const auto [a, p] = m.face_lattice(i);
    EXPECT_EQ(m.face_index(a, p), i);
  }
  for (Index r = 0; r < m.num_interior_edges(); ++r)
    EXPECT_EQ(m.reduced_edge(m.global_edge(r)), r);
}

TEST(Grid, RejectsBadSpec) {
  GridSpec s;
  s.cells = {0, 1, 1};
  EXPECT_THROW(DofMap{s}, InvalidArgument);
  s.cells = {1, 1, 1};
  s.spacing = {1.0, -1.0, 1.0};
  EXPECT_THROW(DofMap{s}, InvalidArgument);
}

TEST(Incidence, CurlOfGradientVanishes) {
  for (Boundary b : {Boundary::Full, Boundary::Pec}) {
    const DofMap m(cube(3));
    const SparseMatrix G = assemble_gradient(m, b), C = assemble_curl(m, b);
    const SparseMatrix CG = C * G;
    EXPECT_EQ(max_abs(CG), 0.0);
  }
}

TEST(Incidence, EntriesAreSigns) {
  const DofMap m(cube(2));
  for (const SparseMatrix& A : {assemble_gradient(m, Boundary::Full), assemble_curl(m, Boundary::Full)})
    for (Index k = 0; k < A.outerSize(); ++k)
      for (SparseMatrix::InnerIterator it(A, k); it; ++it)
        EXPECT_TRUE(it.value() == 1.0 || it.value() == -1.0);
  // Every full-complex edge has two nodes, every face four edges.
  const SparseMatrix G = assemble_gradient(m, Boundary::Full);
  const SparseMatrix C = assemble_curl(m, Boundary::Full);
  const Vector gr = G.cwiseAbs() * Vector::Ones(G.cols());
  const Vector cr = C.cwiseAbs() * Vector::Ones(C.cols());
  EXPECT_TRUE((gr.array() == 2.0).all());
  EXPECT_TRUE((cr.array() == 4.0).all());
  // Gradient of a constant is zero on the full complex.
  EXPECT_EQ((G * Vector::Ones(G.cols())).cwiseAbs().maxCoeff(), 0.0);
}

TEST(Incidence, EdgeOrientation) {
  const DofMap m(cube(2));
  const SparseMatrix G = assemble_gradient(m, Boundary::Full);
  const Index e = m.edge_index(Axis::Y, {1, 0, 1});
  EXPECT_EQ(G.coeff(e, m.node_index({1, 1, 1})), 1.0);
  EXPECT_EQ(G.coeff(e, m.node_index({1, 0, 1})), -1.0);
}

TEST(Incidence, PecExactSequenceRanks) {
  const DofMap m(cube(3));
  const IncidenceOps ops = assemble_incidence(m);
  EXPECT_EQ(ops.num_nodes(), 8);
  EXPECT_EQ(ops.num_edges(), 36);
  EXPECT_EQ(ops.num_faces(), 54);
  // PEC gradient is injective; the curl kernel is exactly its range.
  EXPECT_EQ(sparse_rank(ops.G), 8);
  EXPECT_EQ(sparse_rank(ops.C), 28);
}

TEST(Incidence, FullComplexGradientRank) {
  const DofMap m(cube(2));
  EXPECT_EQ(sparse_rank(assemble_gradient(m, Boundary::Full)), m.num_nodes() - 1);
}

TEST(Hodge, UniformUnitCube) {
  const DofMap m(cube(3));
  const MaterialField mat = MaterialField::uniform(m, 0.5, 2.0, 4.0);
  const HodgeSet h = assemble_hodge_set(m, mat);
  EXPECT_TRUE((h.eps.array() == 2.0).all());
  EXPECT_TRUE((h.kappa.array() == 0.5).all());
  EXPECT_TRUE((h.mu.array() == 0.25).all());
  EXPECT_FALSE(h.kappa_hat.has_value());
}

TEST(Hodge, AnisotropicSpacing) {
  GridSpec s;
  s.cells = {2, 2, 2};
  s.spacing = {1.0, 2.0, 4.0};
  const DofMap m(s);
  const HodgeSet h = assemble_hodge_set(m, MaterialField::uniform(m, 0.0, 1.0, 1.0));
  // x-edge: dual area hy*hz over length hx.
  const Index ex = m.reduced_edge(m.edge_index(Axis::X, {0, 1, 1}));
  EXPECT_DOUBLE_EQ(h.eps[ex], 8.0);
  // z-normal face: area hx*hy over dual length hz, mu = 1/nu.
  const Index fz = m.reduced_face(m.face_index(Axis::Z, {0, 0, 1}));
  EXPECT_DOUBLE_EQ(h.mu[fz], 0.5);
}

TEST(Hodge, MixedMaterialAveraging) {
  const Problem p = fx::mixed_problem(3);
  const DofMap& m = p.map;
  // Four cells share the x-edge at (1,1,1); one of them is the conductor.
  const Index e = m.reduced_edge(m.edge_index(Axis::X, {1, 1, 1}));
  EXPECT_EQ(p.hodges.eps[e], 1.25);
  EXPECT_EQ(p.hodges.kappa[e], 0.25);
  // The x-normal face at (1,1,1) sits between nu = 1 and nu = 1/2 cells:
  // series reluctance 1/2 + 1/4.
  const Index f = m.reduced_face(m.face_index(Axis::X, {1, 1, 1}));
  EXPECT_DOUBLE_EQ(p.hodges.mu[f], 4.0 / 3.0);
}

TEST(Hodge, GaugeRegionMasksConductor) {
  const Problem whole = fx::mixed_problem(3, GaugeRegion::Whole);
  const Problem outside = fx::mixed_problem(3, GaugeRegion::NonConductive);
  ASSERT_TRUE(whole.hodges.kappa_hat && outside.hodges.kappa_hat);
  EXPECT_EQ(*whole.hodges.kappa_hat, 0.25 * whole.hodges.eps);
  const DofMap& m = outside.map;
  // Edge inside the conductor block: all four cells conductive.
  const Index in = m.reduced_edge(m.edge_index(Axis::Z, {2, 2, 1}));
  EXPECT_EQ((*outside.hodges.kappa_hat)[in], 0.0);
  const Index half = m.reduced_edge(m.edge_index(Axis::X, {1, 1, 1}));
  EXPECT_EQ((*outside.hodges.kappa_hat)[half], 0.25 * 0.75);
}

TEST(Hodge, RejectsBadMaterial) {
  const DofMap m(cube(2));
  MaterialField mat = MaterialField::uniform(m, 0.0, 1.0, 1.0);
  mat.eps[0] = 0.0;
  EXPECT_THROW(assemble_hodge_set(m, mat), InvalidArgument);
}
