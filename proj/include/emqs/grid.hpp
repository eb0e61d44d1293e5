#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "emqs/error.hpp"

namespace emqs {

using Index = Eigen::Index;

enum class Axis : int { X = 0, Y = 1, Z = 2 };

inline int axis_index(Axis a) { return static_cast<int>(a); }
inline Axis axis_from_index(int a) { return static_cast<Axis>(a); }
inline char axis_name(Axis a) { return "xyz"[axis_index(a)]; }

/// Integer lattice point; used for nodes and for the lower corner of edges,
/// faces and cells.
using Lattice = std::array<int, 3>;

/// Uniform tensor-product hexahedral grid.
struct GridSpec {
  std::array<int, 3> cells{1, 1, 1};
  std::array<double, 3> spacing{1.0, 1.0, 1.0};

  void validate() const {
    for (int a = 0; a < 3; ++a) {
      if (cells[a] < 1)
        throw InvalidArgument(std::string("grid: cell count along ") + "xyz"[a] +
                              " must be >= 1");
      if (!(spacing[a] > 0.0))
        throw InvalidArgument(std::string("grid: spacing along ") + "xyz"[a] +
                              " must be > 0");
    }
  }

  bool operator==(const GridSpec&) const = default;
};

enum class EntityKind { Node, Edge, Face, Cell };

/// Whether boundary entities are kept (full complex) or removed by the
/// perfect-electric-conductor elimination.
enum class Boundary { Full, Pec };

/// Entity numbering of the staggered grid.
///
/// Global numbering: nodes lexicographic in (i, j, k); edges grouped by axis
/// (x, then y, then z), each group lexicographic in its lower node; faces
/// grouped by normal axis the same way; cells lexicographic. An edge of axis
/// `a` points from its lower node to the node shifted by one along `a`.
///
/// Under PEC elimination boundary nodes, boundary-tangential edges and
/// boundary faces are removed; the surviving entities keep their relative
/// order in the reduced numbering.
class DofMap {
 public:
  explicit DofMap(const GridSpec& spec) : spec_(spec) {
    spec_.validate();
    const auto& n = spec_.cells;
    num_nodes_ = Index(n[0] + 1) * (n[1] + 1) * (n[2] + 1);
    num_cells_ = Index(n[0]) * n[1] * n[2];
    Index e = 0, f = 0;
    for (int a = 0; a < 3; ++a) {
      edge_offset_[a] = e;
      face_offset_[a] = f;
      e += edge_dims(a)[0] * edge_dims(a)[1] * edge_dims(a)[2];
      f += face_dims(a)[0] * face_dims(a)[1] * face_dims(a)[2];
    }
    num_edges_ = e;
    num_faces_ = f;
    number_interior();
  }

  const GridSpec& spec() const { return spec_; }
  const std::array<int, 3>& cells() const { return spec_.cells; }
  double h(int a) const { return spec_.spacing[a]; }

  Index num_nodes() const { return num_nodes_; }
  Index num_edges() const { return num_edges_; }
  Index num_faces() const { return num_faces_; }
  Index num_cells() const { return num_cells_; }

  Index count(EntityKind kind, Boundary b) const {
    if (b == Boundary::Full) {
      switch (kind) {
        case EntityKind::Node: return num_nodes_;
        case EntityKind::Edge: return num_edges_;
        case EntityKind::Face: return num_faces_;
        case EntityKind::Cell: return num_cells_;
      }
    }
    switch (kind) {
      case EntityKind::Node: return Index(interior_nodes_.size());
      case EntityKind::Edge: return Index(interior_edges_.size());
      case EntityKind::Face: return Index(interior_faces_.size());
      case EntityKind::Cell: return num_cells_;
    }
    return 0;
  }

  Index num_interior_nodes() const { return Index(interior_nodes_.size()); }
  Index num_interior_edges() const { return Index(interior_edges_.size()); }
  Index num_interior_faces() const { return Index(interior_faces_.size()); }

  // --- global index <-> lattice -------------------------------------------

  Index node_index(const Lattice& p) const {
    const auto& n = spec_.cells;
    return p[0] + Index(n[0] + 1) * (p[1] + Index(n[1] + 1) * p[2]);
  }
  Lattice node_lattice(Index idx) const {
    const auto& n = spec_.cells;
    Lattice p{};
    p[0] = int(idx % (n[0] + 1));
    idx /= (n[0] + 1);
    p[1] = int(idx % (n[1] + 1));
    p[2] = int(idx / (n[1] + 1));
    return p;
  }

  Index edge_index(Axis axis, const Lattice& p) const {
    return lattice_index(edge_offset_[axis_index(axis)], edge_dims(axis_index(axis)), p);
  }
  std::pair<Axis, Lattice> edge_lattice(Index idx) const {
    return decode(edge_offset_, idx, [this](int a) { return edge_dims(a); });
  }

  Index face_index(Axis normal, const Lattice& p) const {
    return lattice_index(face_offset_[axis_index(normal)], face_dims(axis_index(normal)), p);
  }
  std::pair<Axis, Lattice> face_lattice(Index idx) const {
    return decode(face_offset_, idx, [this](int a) { return face_dims(a); });
  }

  Index cell_index(const Lattice& p) const {
    const auto& n = spec_.cells;
    return p[0] + Index(n[0]) * (p[1] + Index(n[1]) * p[2]);
  }
  Lattice cell_lattice(Index idx) const {
    const auto& n = spec_.cells;
    Lattice p{};
    p[0] = int(idx % n[0]);
    idx /= n[0];
    p[1] = int(idx % n[1]);
    p[2] = int(idx / n[1]);
    return p;
  }

  bool contains_node(const Lattice& p) const {
    for (int a = 0; a < 3; ++a)
      if (p[a] < 0 || p[a] > spec_.cells[a]) return false;
    return true;
  }
  bool contains_cell(const Lattice& p) const {
    for (int a = 0; a < 3; ++a)
      if (p[a] < 0 || p[a] >= spec_.cells[a]) return false;
    return true;
  }

  // --- boundary classification --------------------------------------------

  bool node_on_boundary(const Lattice& p) const {
    for (int a = 0; a < 3; ++a)
      if (p[a] == 0 || p[a] == spec_.cells[a]) return true;
    return false;
  }
  /// True when the edge lies inside the boundary surface (tangential).
  bool edge_on_boundary(Axis axis, const Lattice& p) const {
    for (int b = 0; b < 3; ++b) {
      if (b == axis_index(axis)) continue;
      if (p[b] == 0 || p[b] == spec_.cells[b]) return true;
    }
    return false;
  }
  bool face_on_boundary(Axis normal, const Lattice& p) const {
    const int a = axis_index(normal);
    return p[a] == 0 || p[a] == spec_.cells[a];
  }

  // --- reduced (interior) numbering ----------------------------------------

  /// Reduced index of a global node, or -1 when eliminated.
  Index reduced_node(Index global) const { return node_reduced_[global]; }
  Index reduced_edge(Index global) const { return edge_reduced_[global]; }
  Index reduced_face(Index global) const { return face_reduced_[global]; }

  Index global_node(Index reduced) const { return interior_nodes_[reduced]; }
  Index global_edge(Index reduced) const { return interior_edges_[reduced]; }
  Index global_face(Index reduced) const { return interior_faces_[reduced]; }

  /// Maps an entity index in the requested numbering to the global index.
  Index to_global(EntityKind kind, Boundary b, Index idx) const {
    if (b == Boundary::Full || kind == EntityKind::Cell) return idx;
    switch (kind) {
      case EntityKind::Node: return global_node(idx);
      case EntityKind::Edge: return global_edge(idx);
      case EntityKind::Face: return global_face(idx);
      default: return idx;
    }
  }
  /// Maps a global entity index into the requested numbering (-1 if dropped).
  Index from_global(EntityKind kind, Boundary b, Index global) const {
    if (b == Boundary::Full || kind == EntityKind::Cell) return global;
    switch (kind) {
      case EntityKind::Node: return reduced_node(global);
      case EntityKind::Edge: return reduced_edge(global);
      case EntityKind::Face: return reduced_face(global);
      default: return global;
    }
  }

  /// Reduced index of the ground node (interior), if the grid has one.
  std::optional<Index> ground() const { return ground_; }

  /// Selects the ground node. Throws when the node is outside the grid or on
  /// the boundary.
  void set_ground(const Lattice& p) {
    if (!contains_node(p))
      throw InvalidArgument("ground node lies outside the grid");
    if (node_on_boundary(p))
      throw InvalidArgument("ground node must be an interior node, got a boundary node");
    ground_ = reduced_node(node_index(p));
  }

  /// Node center, in meters.
  std::array<double, 3> node_position(const Lattice& p) const {
    return {p[0] * h(0), p[1] * h(1), p[2] * h(2)};
  }

  std::array<Index, 3> edge_dims(int a) const {
    const auto& n = spec_.cells;
    std::array<Index, 3> d{n[0] + 1, n[1] + 1, n[2] + 1};
    d[a] = n[a];
    return d;
  }
  std::array<Index, 3> face_dims(int a) const {
    const auto& n = spec_.cells;
    std::array<Index, 3> d{n[0], n[1], n[2]};
    d[a] = n[a] + 1;
    return d;
  }

 private:
  static Index lattice_index(Index offset, const std::array<Index, 3>& d, const Lattice& p) {
    return offset + p[0] + d[0] * (p[1] + d[1] * p[2]);
  }

  template <class Dims>
  std::pair<Axis, Lattice> decode(const std::array<Index, 3>& offsets, Index idx,
                                  Dims dims) const {
    int a = 2;
    while (a > 0 && idx < offsets[a]) --a;
    Index local = idx - offsets[a];
    const auto d = dims(a);
    Lattice p{};
    p[0] = int(local % d[0]);
    local /= d[0];
    p[1] = int(local % d[1]);
    p[2] = int(local / d[1]);
    return {axis_from_index(a), p};
  }

  void number_interior() {
    node_reduced_.assign(num_nodes_, -1);
    edge_reduced_.assign(num_edges_, -1);
    face_reduced_.assign(num_faces_, -1);
    for (Index g = 0; g < num_nodes_; ++g) {
      if (!node_on_boundary(node_lattice(g))) {
        node_reduced_[g] = Index(interior_nodes_.size());
        interior_nodes_.push_back(g);
      }
    }
    for (Index g = 0; g < num_edges_; ++g) {
      const auto [axis, p] = edge_lattice(g);
      if (!edge_on_boundary(axis, p)) {
        edge_reduced_[g] = Index(interior_edges_.size());
        interior_edges_.push_back(g);
      }
    }
    for (Index g = 0; g < num_faces_; ++g) {
      const auto [axis, p] = face_lattice(g);
      if (!face_on_boundary(axis, p)) {
        face_reduced_[g] = Index(interior_faces_.size());
        interior_faces_.push_back(g);
      }
    }
  }

  GridSpec spec_;
  Index num_nodes_ = 0, num_edges_ = 0, num_faces_ = 0, num_cells_ = 0;
  std::array<Index, 3> edge_offset_{}, face_offset_{};
  std::vector<Index> node_reduced_, edge_reduced_, face_reduced_;
  std::vector<Index> interior_nodes_, interior_edges_, interior_faces_;
  std::optional<Index> ground_;
};

/// Builds the entity numbering and selects the ground node.
///
/// Without an explicit selector the interior node closest to the grid center
/// (ties broken towards the lower corner) is used. Grids without interior
/// nodes have no ground node.
inline DofMap build_grid(const GridSpec& spec, std::optional<Lattice> ground = std::nullopt) {
  DofMap map(spec);
  if (ground) {
    map.set_ground(*ground);
  } else if (map.num_interior_nodes() > 0) {
    Lattice c{};
    for (int a = 0; a < 3; ++a) c[a] = std::max(1, spec.cells[a] / 2);
    map.set_ground(c);
  }
  return map;
}

}  // namespace emqs
