#pragma once

// Brute-force reference assembly for tiny grids.
//
// Nothing here calls the sparse assembly path: entities are enumerated from
// their lattice definition, incidence signs come from geometry, and material
// matrices are accumulated cell by cell. Only the numbering convention
// documented on DofMap is shared.

#include <array>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "emqs/formulation.hpp"

namespace emqs::oracle {

using Dense = Eigen::MatrixXd;
using Vec3 = std::array<double, 3>;

struct DenseOperators {
  Dense G, C;
  Vector eps, kappa, mu;
  std::optional<Vector> kappa_hat, eps_hat;
};

namespace detail {

struct EdgeRec {
  Lattice tail;
  int axis;
};
struct FaceRec {
  Lattice corner;
  int normal;
};

inline Vec3 cross(const Vec3& u, const Vec3& v) {
  return {u[1] * v[2] - u[2] * v[1], u[2] * v[0] - u[0] * v[2], u[0] * v[1] - u[1] * v[0]};
}
inline double dot(const Vec3& u, const Vec3& v) { return u[0] * v[0] + u[1] * v[1] + u[2] * v[2]; }

}  // namespace detail

/// Operators on the PEC-reduced complex, built by definition.
inline DenseOperators dense_operators(const GridSpec& spec, const MaterialField& mat,
                                      GaugeRegion region = GaugeRegion::Whole) {
  const auto n = spec.cells;
  const auto hsp = spec.spacing;
  auto inside = [&](int v, int a) { return v > 0 && v < n[a]; };

  // Interior nodes, lexicographic with i fastest.
  std::map<Lattice, Index> node_id;
  for (int k = 0; k <= n[2]; ++k)
    for (int j = 0; j <= n[1]; ++j)
      for (int i = 0; i <= n[0]; ++i)
        if (inside(i, 0) && inside(j, 1) && inside(k, 2)) {
          const Index id = Index(node_id.size());
          node_id[{i, j, k}] = id;
        }

  // Interior edges: axis-major, then lexicographic in the tail node.
  std::vector<detail::EdgeRec> edges;
  std::map<std::pair<Lattice, int>, Index> edge_id;
  for (int a = 0; a < 3; ++a) {
    std::array<int, 3> hi{n[0], n[1], n[2]};
    for (int b = 0; b < 3; ++b) hi[b] += (b == a) ? 0 : 1;
    for (int k = 0; k < hi[2]; ++k)
      for (int j = 0; j < hi[1]; ++j)
        for (int i = 0; i < hi[0]; ++i) {
          const Lattice p{i, j, k};
          bool tangential = false;
          for (int b = 0; b < 3; ++b)
            if (b != a && !inside(p[b], b)) tangential = true;
          if (tangential) continue;
          edge_id[{p, a}] = Index(edges.size());
          edges.push_back({p, a});
        }
  }

  // Interior faces: normal-major, lexicographic in the lower corner.
  std::vector<detail::FaceRec> faces;
  for (int a = 0; a < 3; ++a) {
    std::array<int, 3> hi{n[0], n[1], n[2]};
    hi[a] += 1;
    for (int k = 0; k < hi[2]; ++k)
      for (int j = 0; j < hi[1]; ++j)
        for (int i = 0; i < hi[0]; ++i) {
          const Lattice p{i, j, k};
          if (inside(p[a], a)) faces.push_back({p, a});
        }
  }

  DenseOperators ops;
  const Index ne = Index(edges.size()), nn = Index(node_id.size()), nf = Index(faces.size());

  // Gradient: +1 at the head node, -1 at the tail node.
  ops.G = Dense::Zero(ne, nn);
  for (Index e = 0; e < ne; ++e) {
    Lattice head = edges[e].tail;
    head[edges[e].axis] += 1;
    if (auto it = node_id.find(head); it != node_id.end()) ops.G(e, it->second) = 1.0;
    if (auto it = node_id.find(edges[e].tail); it != node_id.end()) ops.G(e, it->second) = -1.0;
  }

  // Curl: an edge belongs to a face when both endpoints are face corners; the
  // sign compares the edge direction with n x (edge midpoint - face center).
  ops.C = Dense::Zero(nf, ne);
  for (Index f = 0; f < nf; ++f) {
    const auto& F = faces[f];
    Vec3 normal{0, 0, 0};
    normal[F.normal] = 1.0;
    Vec3 center{};
    for (int b = 0; b < 3; ++b)
      center[b] = (F.corner[b] + (b == F.normal ? 0.0 : 0.5)) * hsp[b];
    auto on_face = [&](const Lattice& q) {
      if (q[F.normal] != F.corner[F.normal]) return false;
      for (int b = 0; b < 3; ++b)
        if (b != F.normal && (q[b] < F.corner[b] || q[b] > F.corner[b] + 1)) return false;
      return true;
    };
    for (Index e = 0; e < ne; ++e) {
      Lattice head = edges[e].tail;
      head[edges[e].axis] += 1;
      if (!on_face(edges[e].tail) || !on_face(head)) continue;
      Vec3 dir{0, 0, 0};
      dir[edges[e].axis] = 1.0;
      Vec3 mid{};
      for (int b = 0; b < 3; ++b)
        mid[b] = (edges[e].tail[b] + (b == edges[e].axis ? 0.5 : 0.0)) * hsp[b];
      const Vec3 r{mid[0] - center[0], mid[1] - center[1], mid[2] - center[2]};
      ops.C(f, e) = detail::dot(dir, detail::cross(normal, r)) > 0 ? 1.0 : -1.0;
    }
  }

  // Material matrices, accumulated from every cell onto its 12 edges and 6 faces.
  Vector mask = Vector::Ones(mat.size());
  if (region == GaugeRegion::NonConductive)
    for (Index c = 0; c < mat.size(); ++c) mask[c] = mat.kappa[c] == 0.0 ? 1.0 : 0.0;

  auto edge_matrix = [&](const Vector& coef, bool masked) {
    Vector d = Vector::Zero(ne);
    for (int k = 0; k < n[2]; ++k)
      for (int j = 0; j < n[1]; ++j)
        for (int i = 0; i < n[0]; ++i) {
          const Lattice q{i, j, k};
          const Index cell = i + Index(n[0]) * (j + Index(n[1]) * k);
          const double value = masked ? coef[cell] * mask[cell] : coef[cell];
          for (int a = 0; a < 3; ++a) {
            const int b = (a + 1) % 3, c = (a + 2) % 3;
            for (int db = 0; db < 2; ++db)
              for (int dc = 0; dc < 2; ++dc) {
                Lattice p = q;
                p[b] += db;
                p[c] += dc;
                auto it = edge_id.find({p, a});
                if (it == edge_id.end()) continue;
                d[it->second] += value * hsp[b] * hsp[c] / (4.0 * hsp[a]);
              }
          }
        }
    return d;
  };

  ops.eps = edge_matrix(mat.eps, false);
  ops.kappa = edge_matrix(mat.kappa, false);
  if (mat.kappa_hat) ops.kappa_hat = edge_matrix(*mat.kappa_hat, true);
  if (mat.eps_hat) ops.eps_hat = edge_matrix(*mat.eps_hat, true);

  Vector reluctance = Vector::Zero(nf);
  std::map<std::pair<Lattice, int>, Index> face_id;
  for (Index f = 0; f < nf; ++f) face_id[{faces[f].corner, faces[f].normal}] = f;
  for (int k = 0; k < n[2]; ++k)
    for (int j = 0; j < n[1]; ++j)
      for (int i = 0; i < n[0]; ++i) {
        const Lattice q{i, j, k};
        const Index cell = i + Index(n[0]) * (j + Index(n[1]) * k);
        for (int a = 0; a < 3; ++a)
          for (int s = 0; s < 2; ++s) {
            Lattice p = q;
            p[a] += s;
            auto it = face_id.find({p, a});
            if (it != face_id.end()) reluctance[it->second] += mat.nu[cell] * hsp[a] / 2.0;
          }
      }
  ops.mu = Vector(nf);
  for (Index f = 0; f < nf; ++f) {
    const int a = faces[f].normal;
    ops.mu[f] = hsp[(a + 1) % 3] * hsp[(a + 2) % 3] / reluctance[f];
  }
  return ops;
}

/// Dense block operators of a formulation, written out as in the continuous
/// operator matrices with eps -> Me, grad -> G, -div -> G^T, curl -> C.
struct DenseSystem {
  Dense E, J, R, B;
};

inline DenseSystem dense_system(FormulationTag tag, const DenseOperators& ops) {
  using FT = FormulationTag;
  const Dense& G = ops.G;
  const Dense& C = ops.C;
  const Index ne = G.rows(), nn = G.cols(), nf = C.rows();
  const Dense Me = ops.eps.asDiagonal();
  const Dense Mk = ops.kappa.asDiagonal();
  const Dense Mmu = ops.mu.asDiagonal();
  const Dense I = Dense::Identity(ne, ne);
  const Dense Zee = Dense::Zero(ne, ne), Zen = Dense::Zero(ne, nn), Zef = Dense::Zero(ne, nf);
  const Dense Zne = Zen.transpose(), Znn = Dense::Zero(nn, nn), Znf = Dense::Zero(nn, nf);
  const Dense Zfe = Zef.transpose(), Zfn = Znf.transpose(), Zff = Dense::Zero(nf, nf);
  const Dense Div = G.transpose();  // -div

  const int nb = has_lambda(tag) ? 4 : 3;
  using Row = std::vector<Dense>;
  std::vector<Row> e, j, r;
  std::vector<Dense> b;

  // Rows (a, phi, h), columns (a, phi, h).
  e = {Row{Zee, Me * G, Zef}, Row{Div * Me, Div * Me * G, Znf}, Row{Zfe, Zfn, Mmu}};
  j = {Row{Zee, Zen, -C.transpose()}, Row{Zne, Znn, Znf}, Row{C, Zfn, Zff}};
  r = {Row{Mk, Mk * G, Zef}, Row{Div * Mk, Div * Mk * G, Znf}, Row{Zfe, Zfn, Zff}};
  b = {I, Div, Zfe};

  switch (tag) {
    case FT::Maxwell:
      e[0][0] = Me;
      break;
    case FT::DarwinUngauged:
      e[1][0] = Zne;
      break;
    case FT::DarwinKappaGauged:
      e[1][0] = Zne;
      r[1][0] = Div * Mk + Div * Dense(ops.kappa_hat->asDiagonal());
      break;
    case FT::DarwinEpsGauged:
      e[1][0] = Div * Dense(ops.eps_hat->asDiagonal());
      break;
    default:
      break;
  }

  if (nb == 4) {
    for (auto* m : {&e, &j, &r}) {
      (*m)[0].push_back(Zen);
      (*m)[1].push_back(Znn);
      (*m)[2].push_back(Zfn.eval());
      m->push_back(Row{Zne, Znn, Znf, Znn});
    }
    b.push_back(Zne);
    switch (tag) {
      case FT::EmqsLagrange:
        e[0][3] = Me * G;
        e[3][0] = Div * Me;
        break;
      case FT::EmqsSplit:
        e[0][3] = Me * G;
        e[1][3] = Div * Me * G;
        e[3][0] = Div * Me;
        e[3][1] = Div * Me * G;
        e[3][3] = Div * Me * G;
        b[3] = Div;
        break;
      case FT::EmqsCoulombSkew: {
        const Dense Mkh = ops.kappa_hat->asDiagonal();
        j[0][3] = -Mkh * G;
        j[3][0] = Div * Mkh;
        break;
      }
      default:
        break;
    }
  }

  auto glue = [](const std::vector<Row>& rows) {
    Index R = 0, Cn = 0;
    for (const auto& row : rows) R += row[0].rows();
    for (const auto& m : rows[0]) Cn += m.cols();
    Dense out(R, Cn);
    Index r0 = 0;
    for (const auto& row : rows) {
      Index c0 = 0;
      for (const auto& m : row) {
        out.block(r0, c0, m.rows(), m.cols()) = m;
        c0 += m.cols();
      }
      r0 += row[0].rows();
    }
    return out;
  };
  DenseSystem s;
  s.E = glue(e);
  s.J = glue(j);
  s.R = glue(r);
  std::vector<Row> bcol;
  for (const auto& m : b) bcol.push_back(Row{m});
  s.B = glue(bcol);
  return s;
}

struct OracleResult {
  bool pass = true;
  double max_difference = 0.0;
  /// "E(a,phi)[3,1]"-style location of the worst entry, empty when exact.
  std::string location;
};

/// Compares an assembled system with the dense reference entry by entry.
inline OracleResult compare_with_dense(const BlockSystem& sys, const DenseSystem& ref,
                                       double tolerance = 0.0) {
  OracleResult res;
  const BlockLayout& L = sys.layout;
  auto check = [&](const char* name, const SparseMatrix& got, const Dense& want, bool col_blocks) {
    if (got.rows() != want.rows() || got.cols() != want.cols()) {
      res.pass = false;
      res.max_difference = std::numeric_limits<double>::infinity();
      res.location = std::string(name) + " has the wrong shape";
      return;
    }
    const Dense diff = (Dense(got) - want).cwiseAbs();
    if (diff.size() == 0) return;
    Index r = 0, c = 0;
    const double m = diff.maxCoeff(&r, &c);
    if (m > res.max_difference) {
      res.max_difference = m;
      const Block rb = L.block_of(r);
      std::ostringstream os;
      os << name << "(" << block_name(rb);
      Index cc = c;
      if (col_blocks) {
        const Block cb = L.block_of(c);
        os << "," << block_name(cb);
        cc = c - L.offset(cb);
      }
      os << ")[" << r - L.offset(rb) << "," << cc << "]";
      res.location = os.str();
    }
  };
  check("E", sys.E, ref.E, true);
  check("J", sys.J, ref.J, true);
  check("R", sys.R, ref.R, true);
  check("B", sys.B, ref.B, false);
  res.pass = res.pass && res.max_difference <= tolerance;
  if (res.pass) res.location.clear();
  return res;
}

}  // namespace emqs::oracle
