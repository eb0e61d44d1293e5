#pragma once

#include <string>

#include "emqs/emqs.hpp"

namespace emqs::fx {

/// n^3 unit cells with a conductive sub-box [1, n) x [1, n) x [1, max(2, n-1)),
/// artificial coefficients on the whole domain (kappa_hat = eps / 4). Dyadic
/// values keep every Hodge entry exact in binary.
inline Problem mixed_problem(int n, GaugeRegion region = GaugeRegion::Whole) {
  GridSpec spec;
  spec.cells = {n, n, n};
  const DofMap map(spec);
  MaterialField mat = MaterialField::uniform(map, 0.0, 1.0, 1.0);
  mat.fill_box(map, {{1, 1, 1}, {n, n, std::max(2, n - 1)}}, 1.0, 2.0, 0.5);
  mat.set_kappa_hat_eps_over_tau(4.0);
  mat.set_eps_hat(0.5);
  return Problem(spec, mat, region);
}

/// Insulator everywhere (kappa = 0) with the artificial conductivity kept.
inline Problem insulating_problem(int n) {
  GridSpec spec;
  spec.cells = {n, n, n};
  const DofMap map(spec);
  MaterialField mat = MaterialField::uniform(map, 0.0, 1.0, 1.0);
  mat.set_kappa_hat_eps_over_tau(4.0);
  return Problem(spec, mat);
}

/// Counter-clockwise current loop around the interior node square in z = 1.
inline Vector loop_pattern(const DofMap& map) {
  Vector u = Vector::Zero(map.num_interior_edges());
  auto add = [&](Axis a, Lattice p, double v) {
    if (!map.edge_on_boundary(a, p)) u[map.reduced_edge(map.edge_index(a, p))] += v;
  };
  add(Axis::X, {1, 1, 1}, 1.0);
  add(Axis::Y, {2, 1, 1}, 1.0);
  add(Axis::X, {1, 2, 1}, -1.0);
  add(Axis::Y, {1, 1, 1}, -1.0);
  return u;
}

/// Single interior edge carrying unit current; charges its two end nodes.
inline Vector dipole_pattern(const DofMap& map) {
  Vector u = Vector::Zero(map.num_interior_edges());
  u[map.reduced_edge(map.edge_index(Axis::X, {1, 1, 1}))] = 1.0;
  return u;
}

inline StepperConfig midpoint(double dt, Index steps) {
  StepperConfig c;
  c.dt = dt;
  c.steps = steps;
  return c;
}

inline std::string scenario_path(const std::string& name) {
  return std::string(EMQS_SCENARIO_DIR) + "/" + name;
}

}  // namespace emqs::fx
