#pragma once

#include <vector>

#include <Eigen/SparseCore>

#include "emqs/grid.hpp"

namespace emqs {

using SparseMatrix = Eigen::SparseMatrix<double>;
using Triplet = Eigen::Triplet<double>;
using Vector = Eigen::VectorXd;

/// Discrete gradient (edges x nodes) and curl (faces x edges).
struct IncidenceOps {
  SparseMatrix G;
  SparseMatrix C;

  Index num_nodes() const { return G.cols(); }
  Index num_edges() const { return G.rows(); }
  Index num_faces() const { return C.rows(); }
};

namespace detail {

inline Lattice shifted(Lattice p, int axis, int by = 1) {
  p[axis] += by;
  return p;
}

}  // namespace detail

/// Edge-node incidence: +1 at the head node, -1 at the tail node.
inline SparseMatrix assemble_gradient(const DofMap& map, Boundary b = Boundary::Pec) {
  const Index rows = map.count(EntityKind::Edge, b);
  const Index cols = map.count(EntityKind::Node, b);
  std::vector<Triplet> t;
  t.reserve(2 * rows);
  for (Index e = 0; e < rows; ++e) {
    const auto [axis, p] = map.edge_lattice(map.to_global(EntityKind::Edge, b, e));
    const Index tail = map.from_global(EntityKind::Node, b, map.node_index(p));
    const Index head = map.from_global(
        EntityKind::Node, b, map.node_index(detail::shifted(p, axis_index(axis))));
    if (head >= 0) t.emplace_back(e, head, 1.0);
    if (tail >= 0) t.emplace_back(e, tail, -1.0);
  }
  SparseMatrix G(rows, cols);
  G.setFromTriplets(t.begin(), t.end());
  return G;
}

/// Face-edge incidence with circulation following the right-hand rule about
/// the face normal. For a face with normal `a` and in-plane axes (b, c) in
/// cyclic order the boundary is +e_b(p) +e_c(p+b) -e_b(p+c) -e_c(p).
inline SparseMatrix assemble_curl(const DofMap& map, Boundary b = Boundary::Pec) {
  const Index rows = map.count(EntityKind::Face, b);
  const Index cols = map.count(EntityKind::Edge, b);
  std::vector<Triplet> t;
  t.reserve(4 * rows);
  for (Index f = 0; f < rows; ++f) {
    const auto [normal, p] = map.face_lattice(map.to_global(EntityKind::Face, b, f));
    const int a = axis_index(normal);
    const int ab = (a + 1) % 3;
    const int ac = (a + 2) % 3;
    const Axis axb = axis_from_index(ab), axc = axis_from_index(ac);
    const std::pair<Index, double> loop[4] = {
        {map.edge_index(axb, p), 1.0},
        {map.edge_index(axc, detail::shifted(p, ab)), 1.0},
        {map.edge_index(axb, detail::shifted(p, ac)), -1.0},
        {map.edge_index(axc, p), -1.0},
    };
    for (const auto& [global_edge, sign] : loop) {
      const Index e = map.from_global(EntityKind::Edge, b, global_edge);
      if (e >= 0) t.emplace_back(f, e, sign);
    }
  }
  SparseMatrix C(rows, cols);
  C.setFromTriplets(t.begin(), t.end());
  return C;
}

inline IncidenceOps assemble_incidence(const DofMap& map, Boundary b = Boundary::Pec) {
  return {assemble_gradient(map, b), assemble_curl(map, b)};
}

}  // namespace emqs
