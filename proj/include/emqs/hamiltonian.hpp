#pragma once

#include <cmath>
#include <string>

#include "emqs/formulation.hpp"

namespace emqs {

enum class HamiltonianKind { FullMaxwell, Emqs, EmqsSplit, EmqsReduced };

inline std::string_view kind_name(HamiltonianKind k) {
  switch (k) {
    case HamiltonianKind::FullMaxwell: return "FULL_MAXWELL";
    case HamiltonianKind::Emqs: return "EMQS";
    case HamiltonianKind::EmqsSplit: return "EMQS_SPLIT";
    case HamiltonianKind::EmqsReduced: return "EMQS_REDUCED";
  }
  return "?";
}

/// Energy whose gradient the formulation's E^T x is supposed to reproduce.
inline HamiltonianKind matching_kind(FormulationTag t) {
  switch (t) {
    case FormulationTag::Maxwell: return HamiltonianKind::FullMaxwell;
    case FormulationTag::EmqsSplit: return HamiltonianKind::EmqsSplit;
    default: return HamiltonianKind::Emqs;
  }
}

inline bool kind_needs_lambda(HamiltonianKind k) { return k == HamiltonianKind::EmqsSplit; }

namespace detail {

/// Block views of a state vector, sized from the incidence operators.
struct StateBlocks {
  Index ne, nn, nf;
  bool lambda;

  StateBlocks(const IncidenceOps& ops, Index size)
      : ne(ops.num_edges()), nn(ops.num_nodes()), nf(ops.num_faces()), lambda(false) {
    if (size == ne + nn + nf)
      lambda = false;
    else if (size == ne + 2 * nn + nf)
      lambda = true;
    else
      throw InvalidArgument("state of size " + std::to_string(size) +
                            " matches neither the 3-block nor the 4-block layout");
  }
  BlockLayout layout() const { return BlockLayout(ne, nn, nf, lambda); }
};

inline double weighted_dot(const Vector& w, const Vector& u, const Vector& v) {
  return (w.array() * u.array() * v.array()).sum();
}

}  // namespace detail

/// Field-wise energy: explicit sums of Hodge-weighted norms and products.
///
///   FULL_MAXWELL  1/2(|G phi|^2_e + |h|^2_mu + |a|^2_e) + <a, G phi>_e
///   EMQS          1/2(|G phi|^2_e + |h|^2_mu) + <a, G phi>_e
///   EMQS_SPLIT    1/2(|G phi|^2_e + |G lam|^2_e + |h|^2_mu)
///                   + <a, G(phi + lam)>_e + <G phi, G lam>_e
///   EMQS_REDUCED  1/2(|G phi|^2_e + |h|^2_mu)
inline double hamiltonian(HamiltonianKind kind, const HodgeSet& hodges, const IncidenceOps& ops,
                          const Vector& x) {
  const detail::StateBlocks sb(ops, x.size());
  if (kind_needs_lambda(kind) && !sb.lambda)
    throw InvalidArgument(std::string(kind_name(kind)) + " needs a state with a lambda block");
  const BlockLayout L = sb.layout();
  const Vector a = L.segment(x, Block::A);
  const Vector phi = L.segment(x, Block::Phi);
  const Vector h = L.segment(x, Block::H);
  const Vector& w = hodges.eps;
  const Vector gphi = ops.G * phi;

  const double magnetic = 0.5 * detail::weighted_dot(hodges.mu, h, h);
  const double electric = 0.5 * detail::weighted_dot(w, gphi, gphi);
  switch (kind) {
    case HamiltonianKind::FullMaxwell:
      return electric + magnetic + 0.5 * detail::weighted_dot(w, a, a) +
             detail::weighted_dot(w, a, gphi);
    case HamiltonianKind::Emqs:
      return electric + magnetic + detail::weighted_dot(w, a, gphi);
    case HamiltonianKind::EmqsSplit: {
      const Vector glam = ops.G * L.segment(x, Block::Lambda);
      return electric + 0.5 * detail::weighted_dot(w, glam, glam) + magnetic +
             detail::weighted_dot(w, a, gphi + glam) + detail::weighted_dot(w, gphi, glam);
    }
    case HamiltonianKind::EmqsReduced:
      return electric + magnetic;
  }
  return 0.0;
}

/// 1/2 x^T E x. Meaningful only for symmetric E.
inline double quadratic_energy(const BlockSystem& sys, const Vector& x) {
  return 0.5 * x.dot(sys.E * x);
}

/// Derivative of the field-wise energy, term by term. Independent of any
/// assembled E.
inline Vector analytic_gradient(HamiltonianKind kind, const HodgeSet& hodges,
                                const IncidenceOps& ops, const Vector& x) {
  const detail::StateBlocks sb(ops, x.size());
  if (kind_needs_lambda(kind) && !sb.lambda)
    throw InvalidArgument(std::string(kind_name(kind)) + " needs a state with a lambda block");
  const BlockLayout L = sb.layout();
  const Vector a = L.segment(x, Block::A);
  const Vector phi = L.segment(x, Block::Phi);
  const Vector h = L.segment(x, Block::H);
  const Vector& w = hodges.eps;
  const SparseMatrix Gt = ops.G.transpose();

  Vector g = Vector::Zero(x.size());
  L.segment(g, Block::H) = hodges.mu.cwiseProduct(h);
  const Vector gphi = ops.G * phi;
  switch (kind) {
    case HamiltonianKind::FullMaxwell: {
      const Vector d = w.cwiseProduct(a + gphi);
      L.segment(g, Block::A) = d;
      L.segment(g, Block::Phi) = Gt * d;
      break;
    }
    case HamiltonianKind::Emqs:
      L.segment(g, Block::A) = w.cwiseProduct(gphi);
      L.segment(g, Block::Phi) = Gt * w.cwiseProduct(gphi + a);
      break;
    case HamiltonianKind::EmqsSplit: {
      const Vector glam = ops.G * L.segment(x, Block::Lambda);
      L.segment(g, Block::A) = w.cwiseProduct(gphi + glam);
      const Vector d = Gt * w.cwiseProduct(a + gphi + glam);
      L.segment(g, Block::Phi) = d;
      L.segment(g, Block::Lambda) = d;
      break;
    }
    case HamiltonianKind::EmqsReduced:
      L.segment(g, Block::Phi) = Gt * w.cwiseProduct(gphi);
      break;
  }
  return g;
}

/// grad H = E^T x for formulations with a compatible Hamiltonian.
inline Vector grad_hamiltonian(const BlockSystem& sys, const Vector& x) {
  if (!symmetric_e(sys.tag()))
    throw InvalidArgument(std::string(tag_name(sys.tag())) +
                          ": no compatible Hamiltonian (E is not self-adjoint)");
  if (x.size() != sys.dim())
    throw InvalidArgument("grad_hamiltonian: state size does not match the layout");
  return sys.E.transpose() * x;
}

/// max |E^T x - grad H(x)| with grad H from `analytic_gradient`.
inline double compatibility_residual(const BlockSystem& sys, HamiltonianKind kind,
                                     const HodgeSet& hodges, const IncidenceOps& ops,
                                     const Vector& x) {
  const Vector lhs = sys.E.transpose() * x;
  const Vector rhs = analytic_gradient(kind, hodges, ops, x);
  if (lhs.size() == 0) return 0.0;
  return (lhs - rhs).cwiseAbs().maxCoeff();
}

/// Central differences of `hamiltonian` against `analytic_gradient`;
/// returns the max-norm deviation.
inline double finite_difference_gradient_check(HamiltonianKind kind, const HodgeSet& hodges,
                                               const IncidenceOps& ops, const Vector& x,
                                               double step) {
  if (!(step > 0.0)) throw InvalidArgument("finite difference step must be > 0");
  const Vector g = analytic_gradient(kind, hodges, ops, x);
  Vector xp = x;
  double dev = 0.0;
  for (Index i = 0; i < x.size(); ++i) {
    xp[i] = x[i] + step;
    const double hp = hamiltonian(kind, hodges, ops, xp);
    xp[i] = x[i] - step;
    const double hm = hamiltonian(kind, hodges, ops, xp);
    xp[i] = x[i];
    dev = std::max(dev, std::abs((hp - hm) / (2.0 * step) - g[i]));
  }
  return dev;
}

}  // namespace emqs
