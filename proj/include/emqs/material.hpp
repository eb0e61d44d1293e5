#pragma once

#include <optional>
#include <string>

#include "emqs/incidence.hpp"

namespace emqs {

/// Half-open box of cells, [lo, hi) along each axis.
struct CellBox {
  Lattice lo{0, 0, 0};
  Lattice hi{0, 0, 0};

  bool contains(const Lattice& c) const {
    for (int a = 0; a < 3; ++a)
      if (c[a] < lo[a] || c[a] >= hi[a]) return false;
    return true;
  }
  bool operator==(const CellBox&) const = default;
};

/// Where the artificial coefficients (kappa-hat, eps-hat) act.
enum class GaugeRegion { Whole, NonConductive };

/// Per-cell material coefficients.
///
/// kappa [S/m] >= 0, eps [F/m] > 0, nu [m/H] > 0. The artificial
/// coefficients are optional; formulations that need them reject a field
/// without them.
struct MaterialField {
  Vector kappa;
  Vector eps;
  Vector nu;
  std::optional<Vector> kappa_hat;
  std::optional<Vector> eps_hat;

  static MaterialField uniform(const DofMap& map, double kappa, double eps, double nu) {
    const Index n = map.num_cells();
    MaterialField m;
    m.kappa = Vector::Constant(n, kappa);
    m.eps = Vector::Constant(n, eps);
    m.nu = Vector::Constant(n, nu);
    return m;
  }

  Index size() const { return eps.size(); }

  /// Overwrites the given coefficients of every cell in `box`.
  MaterialField& fill_box(const DofMap& map, const CellBox& box, std::optional<double> k,
                          std::optional<double> e, std::optional<double> n) {
    for (Index c = 0; c < map.num_cells(); ++c) {
      if (!box.contains(map.cell_lattice(c))) continue;
      if (k) kappa[c] = *k;
      if (e) eps[c] = *e;
      if (n) nu[c] = *n;
    }
    return *this;
  }

  /// kappa-hat := eps / tau in every cell.
  MaterialField& set_kappa_hat_eps_over_tau(double tau) {
    if (!(tau > 0.0)) throw InvalidArgument("material: time constant tau must be > 0");
    kappa_hat = eps / tau;
    return *this;
  }
  MaterialField& set_kappa_hat(double value) {
    kappa_hat = Vector::Constant(size(), value);
    return *this;
  }
  MaterialField& set_eps_hat(double value) {
    eps_hat = Vector::Constant(size(), value);
    return *this;
  }

  void validate(Index num_cells) const {
    auto check_size = [&](const Vector& v, const char* name) {
      if (v.size() != num_cells)
        throw InvalidArgument(std::string("material: '") + name + "' has " +
                              std::to_string(v.size()) + " entries, grid has " +
                              std::to_string(num_cells) + " cells");
    };
    check_size(kappa, "kappa");
    check_size(eps, "eps");
    check_size(nu, "nu");
    if (kappa_hat) check_size(*kappa_hat, "kappa_hat");
    if (eps_hat) check_size(*eps_hat, "eps_hat");
    for (Index c = 0; c < num_cells; ++c) {
      if (!(kappa[c] >= 0.0))
        throw InvalidArgument("material: negative conductivity in cell " + std::to_string(c));
      if (!(eps[c] > 0.0))
        throw InvalidArgument("material: non-positive permittivity in cell " +
                              std::to_string(c));
      if (!(nu[c] > 0.0))
        throw InvalidArgument("material: non-positive reluctivity in cell " + std::to_string(c));
      if (kappa_hat && !((*kappa_hat)[c] >= 0.0))
        throw InvalidArgument("material: negative artificial conductivity in cell " +
                              std::to_string(c));
      if (eps_hat && !((*eps_hat)[c] >= 0.0))
        throw InvalidArgument("material: negative artificial permittivity in cell " +
                              std::to_string(c));
    }
  }
};

/// Cell mask for the artificial coefficients.
inline Vector gauge_mask(const MaterialField& mat, GaugeRegion region) {
  if (region == GaugeRegion::Whole) return Vector::Ones(mat.size());
  return (mat.kappa.array() == 0.0).cast<double>().matrix();
}

enum class Coefficient { Eps, Kappa, KappaHat, EpsHat, Mu };

inline const char* coefficient_name(Coefficient c) {
  switch (c) {
    case Coefficient::Eps: return "eps";
    case Coefficient::Kappa: return "kappa";
    case Coefficient::KappaHat: return "kappa_hat";
    case Coefficient::EpsHat: return "eps_hat";
    case Coefficient::Mu: return "mu";
  }
  return "?";
}

/// Diagonal of a material matrix.
///
/// Edge coefficients (eps, kappa, kappa-hat, eps-hat): sum over the cells
/// around the edge of coef * (quarter dual area) / edge length; on a uniform
/// grid this is the arithmetic mean times h_b h_c / h_a.
/// Face coefficient (mu): face area divided by the reluctance of the dual
/// edge, sum over the adjacent cells of nu * h_a / 2.
///
/// `mask` (per cell, 0/1) is applied to the artificial coefficients only.
inline Vector assemble_hodge(const DofMap& map, const MaterialField& mat, Coefficient which,
                             Boundary b = Boundary::Pec, const Vector* mask = nullptr) {
  mat.validate(map.num_cells());
  const Vector* coef = nullptr;
  switch (which) {
    case Coefficient::Eps: coef = &mat.eps; break;
    case Coefficient::Kappa: coef = &mat.kappa; break;
    case Coefficient::KappaHat:
      if (!mat.kappa_hat) throw InvalidArgument("material: artificial conductivity not defined");
      coef = &*mat.kappa_hat;
      break;
    case Coefficient::EpsHat:
      if (!mat.eps_hat) throw InvalidArgument("material: artificial permittivity not defined");
      coef = &*mat.eps_hat;
      break;
    case Coefficient::Mu: coef = &mat.nu; break;
  }
  const bool masked = mask && (which == Coefficient::KappaHat || which == Coefficient::EpsHat);

  auto cell_value = [&](const Lattice& c) {
    const Index ci = map.cell_index(c);
    return masked ? (*coef)[ci] * (*mask)[ci] : (*coef)[ci];
  };

  if (which == Coefficient::Mu) {
    const Index n = map.count(EntityKind::Face, b);
    Vector d(n);
    for (Index f = 0; f < n; ++f) {
      const auto [normal, p] = map.face_lattice(map.to_global(EntityKind::Face, b, f));
      const int a = axis_index(normal);
      const double area = map.h((a + 1) % 3) * map.h((a + 2) % 3);
      double reluctance = 0.0;
      for (int s = 0; s < 2; ++s) {
        const Lattice c = detail::shifted(p, a, -s);
        if (map.contains_cell(c)) reluctance += cell_value(c) * map.h(a) / 2.0;
      }
      d[f] = area / reluctance;
    }
    return d;
  }

  const Index n = map.count(EntityKind::Edge, b);
  Vector d(n);
  for (Index e = 0; e < n; ++e) {
    const auto [axis, p] = map.edge_lattice(map.to_global(EntityKind::Edge, b, e));
    const int a = axis_index(axis);
    const int ab = (a + 1) % 3, ac = (a + 2) % 3;
    const double quarter = map.h(ab) * map.h(ac) / (4.0 * map.h(a));
    double sum = 0.0;
    for (int sb = 0; sb < 2; ++sb) {
      for (int sc = 0; sc < 2; ++sc) {
        const Lattice c = detail::shifted(detail::shifted(p, ab, -sb), ac, -sc);
        if (map.contains_cell(c)) sum += cell_value(c);
      }
    }
    d[e] = sum * quarter;
  }
  return d;
}

/// Diagonals of all material matrices on the PEC-reduced complex.
struct HodgeSet {
  Vector eps;    // interior edges
  Vector kappa;  // interior edges
  Vector mu;     // interior faces
  std::optional<Vector> kappa_hat;
  std::optional<Vector> eps_hat;
};

inline HodgeSet assemble_hodge_set(const DofMap& map, const MaterialField& mat,
                                   GaugeRegion region = GaugeRegion::Whole,
                                   Boundary b = Boundary::Pec) {
  const Vector mask = gauge_mask(mat, region);
  HodgeSet h;
  h.eps = assemble_hodge(map, mat, Coefficient::Eps, b);
  h.kappa = assemble_hodge(map, mat, Coefficient::Kappa, b);
  h.mu = assemble_hodge(map, mat, Coefficient::Mu, b);
  if (mat.kappa_hat) h.kappa_hat = assemble_hodge(map, mat, Coefficient::KappaHat, b, &mask);
  if (mat.eps_hat) h.eps_hat = assemble_hodge(map, mat, Coefficient::EpsHat, b, &mask);
  return h;
}

inline SparseMatrix diagonal_matrix(const Vector& d) {
  SparseMatrix m(d.size(), d.size());
  m.reserve(Eigen::VectorXi::Constant(d.size(), 1));
  for (Index i = 0; i < d.size(); ++i) m.insert(i, i) = d[i];
  m.makeCompressed();
  return m;
}

}  // namespace emqs
