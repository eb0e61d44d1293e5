#pragma once

#include <algorithm>
#include <array>
#include <numeric>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include "emqs/material.hpp"

namespace emqs {

enum class FormulationTag {
  Maxwell,
  DarwinUngauged,
  DarwinKappaGauged,
  DarwinEpsGauged,
  EmqsSymmetrized,
  EmqsLagrange,
  EmqsSplit,
  EmqsCoulombSkew,
};

inline constexpr std::array<FormulationTag, 8> kAllTags = {
    FormulationTag::Maxwell,         FormulationTag::DarwinUngauged,
    FormulationTag::DarwinKappaGauged, FormulationTag::DarwinEpsGauged,
    FormulationTag::EmqsSymmetrized, FormulationTag::EmqsLagrange,
    FormulationTag::EmqsSplit,       FormulationTag::EmqsCoulombSkew,
};

inline std::string_view tag_name(FormulationTag t) {
  switch (t) {
    case FormulationTag::Maxwell: return "MAXWELL";
    case FormulationTag::DarwinUngauged: return "DARWIN_UNGAUGED";
    case FormulationTag::DarwinKappaGauged: return "DARWIN_KAPPA_GAUGED";
    case FormulationTag::DarwinEpsGauged: return "DARWIN_EPS_GAUGED";
    case FormulationTag::EmqsSymmetrized: return "EMQS_SYMMETRIZED";
    case FormulationTag::EmqsLagrange: return "EMQS_LAGRANGE";
    case FormulationTag::EmqsSplit: return "EMQS_SPLIT";
    case FormulationTag::EmqsCoulombSkew: return "EMQS_COULOMB_SKEW";
  }
  return "?";
}

inline std::string valid_tag_list() {
  std::string s;
  for (auto t : kAllTags) {
    if (!s.empty()) s += ", ";
    s += tag_name(t);
  }
  return s;
}

inline FormulationTag parse_tag(std::string_view name) {
  for (auto t : kAllTags)
    if (tag_name(t) == name) return t;
  throw InvalidArgument("unknown formulation '" + std::string(name) +
                        "'; valid tags: " + valid_tag_list());
}

inline bool has_lambda(FormulationTag t) {
  return t == FormulationTag::EmqsLagrange || t == FormulationTag::EmqsSplit ||
         t == FormulationTag::EmqsCoulombSkew;
}

/// Tags whose E is symmetric by construction.
inline bool symmetric_e(FormulationTag t) {
  return t != FormulationTag::DarwinUngauged && t != FormulationTag::DarwinKappaGauged &&
         t != FormulationTag::DarwinEpsGauged;
}

/// Tags whose R is symmetric positive semi-definite by construction.
inline bool symmetric_r(FormulationTag t) { return t != FormulationTag::DarwinKappaGauged; }

inline bool needs_kappa_hat(FormulationTag t) {
  return t == FormulationTag::DarwinKappaGauged || t == FormulationTag::EmqsCoulombSkew;
}
inline bool needs_eps_hat(FormulationTag t) { return t == FormulationTag::DarwinEpsGauged; }

struct Formulation {
  FormulationTag tag = FormulationTag::EmqsSymmetrized;
  GaugeRegion region = GaugeRegion::Whole;
  bool operator==(const Formulation&) const = default;
};

enum class Block : int { A = 0, Phi = 1, H = 2, Lambda = 3 };

inline const char* block_name(Block b) {
  switch (b) {
    case Block::A: return "a";
    case Block::Phi: return "phi";
    case Block::H: return "h";
    case Block::Lambda: return "lambda";
  }
  return "?";
}

/// State layout x = (a, phi, h[, lambda]).
struct BlockLayout {
  int blocks = 3;
  std::array<Index, 4> sizes{0, 0, 0, 0};

  BlockLayout() = default;
  BlockLayout(Index edges, Index nodes, Index faces, bool lambda)
      : blocks(lambda ? 4 : 3), sizes{edges, nodes, faces, lambda ? nodes : 0} {}

  Index size(Block b) const { return sizes[int(b)]; }
  Index offset(Block b) const {
    Index o = 0;
    for (int i = 0; i < int(b); ++i) o += sizes[i];
    return o;
  }
  Index total() const { return sizes[0] + sizes[1] + sizes[2] + sizes[3]; }
  bool has(Block b) const { return int(b) < blocks; }

  /// Block containing state index i.
  Block block_of(Index i) const {
    for (int b = 0; b < blocks; ++b) {
      if (i < sizes[b]) return Block(b);
      i -= sizes[b];
    }
    return Block(blocks - 1);
  }

  template <class Vec>
  auto segment(Vec& x, Block b) const {
    return x.segment(offset(b), size(b));
  }
};

/// Discrete port-Hamiltonian quadruple E x' = (J - R) x + B u, y = B^T x.
///
/// `pinned` lists state indices held at zero when time stepping. They are
/// the degrees of freedom the block operators leave undetermined:
///  * MAXWELL: every phi (temporal gauge; phi enters only through a + G phi).
///  * EMQS_SPLIT: lambda at nodes without a conductive edge, where phi and
///    lambda appear only as phi + lambda, plus one lambda per conductive
///    component not connected to the boundary.
///  * EMQS_COULOMB_SKEW: lambda at nodes without a kappa-hat edge, plus one
///    lambda per floating kappa-hat component.
/// The matrices themselves are never modified by pinning.
struct BlockSystem {
  Formulation formulation;
  BlockLayout layout;
  SparseMatrix E, J, R, B;
  std::vector<Index> pinned;

  FormulationTag tag() const { return formulation.tag; }
  Index dim() const { return layout.total(); }
};

namespace detail {

/// Collects sparse blocks into one matrix.
class BlockAssembler {
 public:
  BlockAssembler(const BlockLayout& rows, Index cols_total, const BlockLayout* cols)
      : rows_(rows), cols_(cols), cols_total_(cols_total) {}

  void add(Block r, Block c, const SparseMatrix& m, double scale = 1.0) {
    add_at(rows_.offset(r), cols_ ? cols_->offset(c) : 0, m, scale);
  }
  void add_at(Index r0, Index c0, const SparseMatrix& m, double scale = 1.0) {
    for (Index k = 0; k < m.outerSize(); ++k)
      for (SparseMatrix::InnerIterator it(m, k); it; ++it)
        t_.emplace_back(r0 + it.row(), c0 + it.col(), scale * it.value());
  }
  SparseMatrix build() const {
    SparseMatrix m(rows_.total(), cols_total_);
    m.setFromTriplets(t_.begin(), t_.end());
    m.prune(0.0);
    m.makeCompressed();
    return m;
  }

 private:
  BlockLayout rows_;
  const BlockLayout* cols_;
  Index cols_total_;
  std::vector<Triplet> t_;
};

inline SparseMatrix identity(Index n) {
  SparseMatrix I(n, n);
  I.setIdentity();
  return I;
}

/// Nodes that a nodal coupling G^T diag(w) G leaves undetermined: nodes with
/// no weighted edge, and one node per weighted component that does not reach
/// the boundary.
inline std::vector<Index> floating_nodes(const SparseMatrix& G, const Vector& w,
                                         std::optional<Index> ground) {
  const Index n = G.cols();
  std::vector<Index> parent(n);
  std::iota(parent.begin(), parent.end(), Index{0});
  auto find = [&](Index i) {
    while (parent[i] != i) i = parent[i] = parent[parent[i]];
    return i;
  };
  std::vector<char> touched(n, 0), grounded_node(n, 0);
  const Eigen::SparseMatrix<double, Eigen::RowMajor> rows = G;
  for (Index e = 0; e < rows.outerSize(); ++e) {
    if (!(w[e] > 0.0)) continue;
    std::vector<Index> ends;
    for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(rows, e); it; ++it)
      ends.push_back(it.col());
    for (Index v : ends) touched[v] = 1;
    if (ends.size() == 1) grounded_node[ends[0]] = 1;
    if (ends.size() == 2) parent[find(ends[0])] = find(ends[1]);
  }
  std::vector<char> root_grounded(n, 0);
  for (Index v = 0; v < n; ++v)
    if (grounded_node[v]) root_grounded[find(v)] = 1;

  std::vector<Index> out;
  std::vector<Index> chosen(n, -1);
  for (Index v = 0; v < n; ++v) {
    if (!touched[v]) {
      out.push_back(v);
      continue;
    }
    const Index r = find(v);
    if (root_grounded[r]) continue;
    if (chosen[r] < 0 || (ground && v == *ground)) chosen[r] = v;
  }
  for (Index v = 0; v < n; ++v)
    if (chosen[v] >= 0) out.push_back(chosen[v]);
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace detail

struct AssemblyOptions {
  /// Ground node (reduced numbering) preferred when a floating component
  /// needs one; see `DofMap::ground()`.
  std::optional<Index> ground;
  /// When false no degree of freedom is pinned.
  bool pin_undetermined = true;
};

/// Assembles the block operators of a formulation.
///
/// Discrete dictionary: grad -> G, curl -> C, dual curl -> C^T, -div -> G^T,
/// material coefficients -> diagonal Hodge matrices.
inline BlockSystem assemble_system(const Formulation& form, const IncidenceOps& ops,
                                   const HodgeSet& hodges, const AssemblyOptions& opts = {}) {
  using FT = FormulationTag;
  const FT tag = form.tag;
  const Index ne = ops.num_edges(), nn = ops.num_nodes(), nf = ops.num_faces();
  if (hodges.eps.size() != ne || hodges.kappa.size() != ne || hodges.mu.size() != nf)
    throw InvalidArgument("assemble_system: Hodge matrices do not match the incidence operators");
  if (needs_kappa_hat(tag) && !hodges.kappa_hat)
    throw InvalidArgument(std::string(tag_name(tag)) +
                          " requires an artificial conductivity (kappa_hat)");
  if (needs_eps_hat(tag) && !hodges.eps_hat)
    throw InvalidArgument(std::string(tag_name(tag)) +
                          " requires an artificial permittivity (eps_hat)");

  const SparseMatrix& G = ops.G;
  const SparseMatrix& C = ops.C;
  const SparseMatrix Ct = C.transpose();
  const SparseMatrix Gt = G.transpose();

  const SparseMatrix Me = diagonal_matrix(hodges.eps);
  const SparseMatrix Mk = diagonal_matrix(hodges.kappa);
  const SparseMatrix Mmu = diagonal_matrix(hodges.mu);

  const SparseMatrix MeG = Me * G;
  const SparseMatrix GtMe = Gt * Me;
  const SparseMatrix GtMeG = Gt * MeG;
  const SparseMatrix MkG = Mk * G;
  const SparseMatrix GtMk = Gt * Mk;
  const SparseMatrix GtMkG = Gt * MkG;

  BlockSystem sys;
  sys.formulation = form;
  sys.layout = BlockLayout(ne, nn, nf, has_lambda(tag));
  const BlockLayout& L = sys.layout;

  detail::BlockAssembler E(L, L.total(), &L), J(L, L.total(), &L), R(L, L.total(), &L),
      B(L, ne, nullptr);

  // Blocks shared by every formulation.
  E.add(Block::A, Block::Phi, MeG);
  E.add(Block::Phi, Block::Phi, GtMeG);
  E.add(Block::H, Block::H, Mmu);
  J.add(Block::A, Block::H, Ct, -1.0);
  J.add(Block::H, Block::A, C);
  R.add(Block::A, Block::A, Mk);
  R.add(Block::A, Block::Phi, MkG);
  R.add(Block::Phi, Block::A, GtMk);
  R.add(Block::Phi, Block::Phi, GtMkG);
  B.add(Block::A, Block::A, detail::identity(ne));
  B.add(Block::Phi, Block::A, Gt);

  switch (tag) {
    case FT::Maxwell:
      E.add(Block::A, Block::A, Me);
      E.add(Block::Phi, Block::A, GtMe);
      break;
    case FT::DarwinUngauged:
      break;
    case FT::DarwinKappaGauged:
      R.add(Block::Phi, Block::A, Gt * diagonal_matrix(*hodges.kappa_hat));
      break;
    case FT::DarwinEpsGauged:
      E.add(Block::Phi, Block::A, Gt * diagonal_matrix(*hodges.eps_hat));
      break;
    case FT::EmqsSymmetrized:
      E.add(Block::Phi, Block::A, GtMe);
      break;
    case FT::EmqsLagrange:
      E.add(Block::Phi, Block::A, GtMe);
      E.add(Block::A, Block::Lambda, MeG);
      E.add(Block::Lambda, Block::A, GtMe);
      break;
    case FT::EmqsSplit:
      E.add(Block::Phi, Block::A, GtMe);
      E.add(Block::A, Block::Lambda, MeG);
      E.add(Block::Phi, Block::Lambda, GtMeG);
      E.add(Block::Lambda, Block::A, GtMe);
      E.add(Block::Lambda, Block::Phi, GtMeG);
      E.add(Block::Lambda, Block::Lambda, GtMeG);
      B.add(Block::Lambda, Block::A, Gt);
      break;
    case FT::EmqsCoulombSkew: {
      E.add(Block::Phi, Block::A, GtMe);
      const SparseMatrix Mkh = diagonal_matrix(*hodges.kappa_hat);
      J.add(Block::A, Block::Lambda, Mkh * G, -1.0);
      J.add(Block::Lambda, Block::A, Gt * Mkh);
      break;
    }
  }

  sys.E = E.build();
  sys.J = J.build();
  sys.R = R.build();
  sys.B = B.build();

  if (opts.pin_undetermined) {
    std::vector<Index> nodes;
    Index base = 0;
    if (tag == FT::Maxwell) {
      nodes.resize(nn);
      std::iota(nodes.begin(), nodes.end(), Index{0});
      base = L.offset(Block::Phi);
    } else if (tag == FT::EmqsSplit) {
      nodes = detail::floating_nodes(G, hodges.kappa, opts.ground);
      base = L.offset(Block::Lambda);
    } else if (tag == FT::EmqsCoulombSkew) {
      nodes = detail::floating_nodes(G, *hodges.kappa_hat, opts.ground);
      base = L.offset(Block::Lambda);
    }
    for (Index v : nodes) sys.pinned.push_back(base + v);
  }
  return sys;
}

/// y = B^T x, the negative electric line integrals on the interior edges.
inline Vector output(const BlockSystem& sys, const Vector& x) {
  if (x.size() != sys.dim())
    throw InvalidArgument("output: state has " + std::to_string(x.size()) +
                          " entries, layout expects " + std::to_string(sys.dim()));
  return sys.B.transpose() * x;
}

struct StructureReport {
  double e_symmetry_defect = 0.0;
  double j_skew_defect = 0.0;
  double j_diagonal_max = 0.0;
  double r_symmetry_defect = 0.0;
  /// Smallest eigenvalue of (R + R^T)/2; absent above the dense limit.
  std::optional<double> r_min_eigenvalue;
};

inline double max_abs(const SparseMatrix& m) {
  double v = 0.0;
  for (Index k = 0; k < m.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(m, k); it; ++it) v = std::max(v, std::abs(it.value()));
  return v;
}

inline constexpr Index kDenseEigenLimit = 2000;

inline StructureReport structure_report(const BlockSystem& sys,
                                        Index dense_limit = kDenseEigenLimit) {
  StructureReport r;
  const SparseMatrix Et = sys.E.transpose();
  const SparseMatrix Jt = sys.J.transpose();
  const SparseMatrix Rt = sys.R.transpose();
  r.e_symmetry_defect = max_abs(SparseMatrix(sys.E - Et));
  r.j_skew_defect = max_abs(SparseMatrix(sys.J + Jt));
  r.j_diagonal_max = sys.dim() > 0 ? Vector(sys.J.diagonal()).cwiseAbs().maxCoeff() : 0.0;
  r.r_symmetry_defect = max_abs(SparseMatrix(sys.R - Rt));
  if (sys.dim() <= dense_limit) {
    const Eigen::MatrixXd Rs = 0.5 * (Eigen::MatrixXd(sys.R) + Eigen::MatrixXd(Rt));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Rs, Eigen::EigenvaluesOnly);
    r.r_min_eigenvalue = sys.dim() > 0 ? es.eigenvalues().minCoeff() : 0.0;
  }
  return r;
}

}  // namespace emqs
