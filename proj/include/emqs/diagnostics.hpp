#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "emqs/dense_oracle.hpp"
#include "emqs/integrator.hpp"

namespace emqs {

/// One machine-readable check outcome. `pass` means the observed value met
/// the expectation, which for negative controls is the presence of a defect.
struct Verdict {
  std::string check;
  std::string tag;
  std::string expected;  // "<= tol", "> 0", "== 0", ...
  double measured = 0.0;
  double tolerance = 0.0;
  bool pass = false;
  std::string detail;
};

inline bool all_pass(const std::vector<Verdict>& v) {
  return std::all_of(v.begin(), v.end(), [](const Verdict& x) { return x.pass; });
}

namespace detail {

inline Verdict at_most(std::string check, std::string tag, double measured, double tol) {
  return {std::move(check), std::move(tag), "<= tolerance", measured, tol,
          std::isfinite(measured) && measured <= tol, {}};
}
inline Verdict exactly_zero(std::string check, std::string tag, double measured) {
  return {std::move(check), std::move(tag), "== 0", measured, 0.0, measured == 0.0, {}};
}
inline Verdict positive(std::string check, std::string tag, double measured) {
  return {std::move(check), std::move(tag), "> 0", measured, 0.0, measured > 0.0, {}};
}

}  // namespace detail

/// Grid, operators and materials shared by every formulation of a scenario.
struct Problem {
  DofMap map;
  IncidenceOps ops;
  MaterialField material;
  GaugeRegion region = GaugeRegion::Whole;
  HodgeSet hodges;

  Problem(const GridSpec& spec, MaterialField mat, GaugeRegion gauge = GaugeRegion::Whole,
          std::optional<Lattice> ground = std::nullopt)
      : map(build_grid(spec, ground)),
        ops(assemble_incidence(map)),
        material(std::move(mat)),
        region(gauge),
        hodges(assemble_hodge_set(map, material, region)) {}

  BlockSystem system(FormulationTag tag, bool pin = true) const {
    AssemblyOptions opts;
    opts.ground = map.ground();
    opts.pin_undetermined = pin;
    return assemble_system({tag, region}, ops, hodges, opts);
  }

  Vector zero_edges() const { return Vector::Zero(ops.num_edges()); }
  Vector zero_nodes() const { return Vector::Zero(ops.num_nodes()); }
};

/// Assembles `tag`, initializes from (A0, phi0) and runs.
inline RunResult simulate(const Problem& p, FormulationTag tag, const StepperConfig& cfg,
                          const SourceWaveform& src, const Vector& A0, const Vector& phi0) {
  const BlockSystem sys = p.system(tag);
  return run(sys, p.ops, p.hodges, consistent_init(sys, A0, phi0), cfg, src);
}

// ---------------------------------------------------------------------------
// Structure

/// Expected symmetry profile of every tag, checked on the assembled system.
inline std::vector<Verdict> run_structure_suite(const Problem& p,
                                                const std::vector<FormulationTag>& tags) {
  std::vector<Verdict> out;
  std::optional<BlockSystem> maxwell;
  for (FormulationTag tag : tags) {
    const std::string name(tag_name(tag));
    const BlockSystem sys = p.system(tag);
    const StructureReport rep = structure_report(sys);

    if (symmetric_e(tag))
      out.push_back(detail::exactly_zero("e_symmetry_defect", name, rep.e_symmetry_defect));
    else
      out.push_back(detail::positive("e_symmetry_defect", name, rep.e_symmetry_defect));
    out.push_back(detail::exactly_zero("j_skew_defect", name, rep.j_skew_defect));
    out.push_back(detail::exactly_zero("j_diagonal", name, rep.j_diagonal_max));

    if (symmetric_r(tag)) {
      out.push_back(detail::exactly_zero("r_symmetry_defect", name, rep.r_symmetry_defect));
      if (rep.r_min_eigenvalue) {
        const double tol = 1e-12 * std::max(1.0, max_abs(sys.R));
        Verdict v{"r_min_eigenvalue", name, ">= -tolerance", *rep.r_min_eigenvalue, tol,
                  *rep.r_min_eigenvalue >= -tol, {}};
        out.push_back(v);
      }
    } else {
      out.push_back(detail::positive("r_symmetry_defect", name, rep.r_symmetry_defect));
    }

    // The phi row is the divergence of the a row of the full Maxwell system.
    if (tag == FormulationTag::Maxwell || tag == FormulationTag::EmqsSymmetrized) {
      if (!maxwell) maxwell = p.system(FormulationTag::Maxwell);
      const BlockLayout& L = sys.layout;
      const Index ra = L.offset(Block::A), rp = L.offset(Block::Phi);
      const Index ne = L.size(Block::A), nn = L.size(Block::Phi);
      const SparseMatrix Gt = p.ops.G.transpose();
      auto row_defect = [&](const SparseMatrix& own, const SparseMatrix& full) {
        const SparseMatrix lhs = own.middleRows(rp, nn);
        const SparseMatrix rhs = Gt * SparseMatrix(full.middleRows(ra, ne));
        return max_abs(SparseMatrix(lhs - rhs));
      };
      double worst = std::max(row_defect(sys.E, maxwell->E), row_defect(sys.R, maxwell->R));
      const SparseMatrix bl = sys.B.middleRows(rp, nn);
      const SparseMatrix br = Gt * SparseMatrix(maxwell->B.middleRows(ra, ne));
      worst = std::max(worst, max_abs(SparseMatrix(bl - br)));
      out.push_back(detail::exactly_zero("row2_divergence_identity", name, worst));
      const SparseMatrix divj = Gt * SparseMatrix(maxwell->J.middleRows(ra, ne));
      out.push_back(detail::exactly_zero("div_of_curl_term", name, max_abs(divj)));
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Dense oracle

/// Sparse assembly against the brute-force dense assembly. With
/// `perturb_hodge` the first eps entry of the sparse side is scaled by
/// (1 + 2^-20) before assembly, which the check must detect.
inline Verdict dense_oracle_check(const Problem& p, FormulationTag tag, bool perturb_hodge = false) {
  const std::string name(tag_name(tag));
  const auto dense_ops = oracle::dense_operators(p.map.spec(), p.material, p.region);
  const auto ref = oracle::dense_system(tag, dense_ops);
  HodgeSet hodges = p.hodges;
  if (perturb_hodge && hodges.eps.size() > 0) hodges.eps[0] *= 1.0 + std::ldexp(1.0, -20);
  AssemblyOptions opts;
  opts.ground = p.map.ground();
  const BlockSystem sys = assemble_system({tag, p.region}, p.ops, hodges, opts);
  const auto res = oracle::compare_with_dense(sys, ref);
  Verdict v;
  v.tag = name;
  v.measured = res.max_difference;
  v.tolerance = 0.0;
  if (perturb_hodge) {
    v.check = "dense_oracle_negative_control";
    v.expected = "mismatch detected";
    v.pass = !res.pass;
  } else {
    v.check = "dense_oracle";
    v.expected = "== 0";
    v.pass = res.pass;
  }
  v.detail = res.location;
  return v;
}

// ---------------------------------------------------------------------------
// Energy

namespace detail {

inline Vector random_vector(std::mt19937_64& rng, Index n) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Vector v(n);
  for (Index i = 0; i < n; ++i) v[i] = u(rng);
  return v;
}

inline double matrix_inf_norm(const SparseMatrix& m) { return row_sum_norm(m); }

}  // namespace detail

/// Compatibility E^T x = grad H on seeded random states. The residual is
/// measured relative to |E|_inf |x|_max, the size of the entries of E^T x.
inline std::vector<Verdict> compatibility_suite(const Problem& p, std::uint64_t seed,
                                                int states = 20, double tol = 1e-12) {
  using FT = FormulationTag;
  std::vector<Verdict> out;
  const FT symmetric[] = {FT::Maxwell, FT::EmqsSymmetrized, FT::EmqsSplit};
  const FT skew[] = {FT::EmqsCoulombSkew};
  auto pairs = std::vector<FT>(std::begin(symmetric), std::end(symmetric));
  if (p.hodges.kappa_hat) pairs.insert(pairs.end(), std::begin(skew), std::end(skew));

  for (FT tag : pairs) {
    const BlockSystem sys = p.system(tag);
    const HamiltonianKind kind = matching_kind(tag);
    std::mt19937_64 rng(seed);
    double worst = 0.0;
    for (int s = 0; s < states; ++s) {
      const Vector x = detail::random_vector(rng, sys.dim());
      const double scale = detail::matrix_inf_norm(sys.E) * detail::inf_norm(x);
      const double r = compatibility_residual(sys, kind, p.hodges, p.ops, x);
      worst = std::max(worst, detail::safe_ratio(r, scale));
    }
    auto v = detail::at_most("compatibility", std::string(tag_name(tag)), worst, tol);
    v.detail = std::string("kind ") + std::string(kind_name(kind));
    out.push_back(v);
  }

  // Negative result: the ungauged Darwin system has no compatible energy.
  {
    const BlockSystem sys = p.system(FT::DarwinUngauged, false);
    const SparseMatrix GtMe = SparseMatrix(p.ops.G.transpose()) * diagonal_matrix(p.hodges.eps);
    std::mt19937_64 rng(seed);
    double least = std::numeric_limits<double>::infinity();
    int used = 0;
    for (int s = 0; s < states; ++s) {
      const Vector x = detail::random_vector(rng, sys.dim());
      if (detail::inf_norm(GtMe * sys.layout.segment(x, Block::A)) == 0.0) continue;
      ++used;
      least = std::min(least, compatibility_residual(sys, HamiltonianKind::Emqs, p.hodges,
                                                     p.ops, x));
    }
    if (used == 0) least = 0.0;
    auto v = detail::positive("compatibility_defect", std::string(tag_name(FT::DarwinUngauged)),
                              least);
    v.detail = "kind EMQS, minimum over " + std::to_string(used) + " states";
    out.push_back(v);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Ledger audits

/// H+ - H- <= dt y^T u between consecutive ledger rows (the per-step
/// inequality when the record stride is 1). Relative to max(1, |H-|).
inline Verdict dissipativity_audit(const EnergyLedger& ledger, double tol = 1e-10) {
  Verdict v{"dissipativity", std::string(tag_name(ledger.tag)), "<= tolerance", 0.0, tol, true,
            {}};
  if (ledger.rows.size() < 2) {
    v.detail = "vacuous: no steps";
    return v;
  }
  Index worst_step = -1;
  for (std::size_t k = 1; k < ledger.rows.size(); ++k) {
    const auto& a = ledger.rows[k - 1];
    const auto& b = ledger.rows[k];
    const double excess =
        (b.h_quadratic - a.h_quadratic - (b.work_in - a.work_in)) / std::max(1.0, std::abs(a.h_quadratic));
    if (!std::isfinite(excess)) {
      v.pass = false;
      v.measured = excess;
      v.detail = "energy undefined (E is not symmetric)";
      return v;
    }
    if (worst_step < 0 || excess > v.measured) {
      v.measured = excess;
      worst_step = b.step;
    }
  }
  v.pass = v.measured <= tol;
  v.detail = "worst step " + std::to_string(worst_step);
  return v;
}

/// Per-step identity H+ - H- = dt(-xm^T R xm + ym^T um), worst relative residual.
inline Verdict balance_audit(const EnergyLedger& ledger, double tol = 1e-10) {
  double worst = 0.0;
  for (const auto& r : ledger.rows) {
    if (std::isnan(r.balance_relative)) {
      worst = r.balance_relative;
      break;
    }
    worst = std::max(worst, r.balance_relative);
  }
  return detail::at_most("energy_balance", std::string(tag_name(ledger.tag)), worst, tol);
}

/// H non-increasing from row to row (source off).
inline Verdict monotone_energy_audit(const EnergyLedger& ledger, double tol = 1e-10) {
  double worst = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 1; k < ledger.rows.size(); ++k) {
    const auto& a = ledger.rows[k - 1];
    const auto& b = ledger.rows[k];
    worst = std::max(worst, (b.h_quadratic - a.h_quadratic) / std::max(1.0, std::abs(a.h_quadratic)));
  }
  if (ledger.rows.size() < 2) worst = 0.0;
  return detail::at_most("energy_non_increasing", std::string(tag_name(ledger.tag)), worst, tol);
}

/// |H - H0| / |H0| over the run.
inline Verdict conservation_audit(const EnergyLedger& ledger, double tol = 1e-10) {
  double worst = 0.0;
  if (!ledger.rows.empty()) {
    const double h0 = ledger.rows.front().h_quadratic;
    for (const auto& r : ledger.rows)
      worst = std::max(worst, detail::safe_ratio(std::abs(r.h_quadratic - h0), std::abs(h0)));
  }
  return detail::at_most("energy_conserved", std::string(tag_name(ledger.tag)), worst, tol);
}

/// H <= H0 + accumulated port work + slack, with the field-wise energy of the
/// matching kind.
inline Verdict energy_bound_audit(const EnergyLedger& ledger, double slack = 1e-8) {
  double worst = -std::numeric_limits<double>::infinity();
  if (ledger.rows.empty()) worst = 0.0;
  for (const auto& r : ledger.rows)
    worst = std::max(worst, r.h_fieldwise - ledger.rows.front().h_fieldwise - r.work_in);
  return detail::at_most("energy_bounded_by_port_work", std::string(tag_name(ledger.tag)), worst,
                         slack);
}

inline Verdict gauge_audit(const EnergyLedger& ledger, double tol = 1e-10) {
  double worst = 0.0;
  for (const auto& r : ledger.rows) worst = std::max(worst, r.gauge_relative);
  return detail::at_most("implicit_coulomb_gauge", std::string(tag_name(ledger.tag)), worst, tol);
}

inline Verdict flux_audit(const EnergyLedger& ledger, double tol = 1e-10) {
  double worst = 0.0;
  for (const auto& r : ledger.rows) worst = std::max(worst, r.flux_relative);
  return detail::at_most("flux_constraint", std::string(tag_name(ledger.tag)), worst, tol);
}

/// max_t |lambda| relative to max_t |phi|.
inline Verdict lambda_audit(const EnergyLedger& ledger, double tol = 1e-8) {
  double lam = 0.0, phi = 0.0;
  for (const auto& r : ledger.rows) {
    lam = std::max(lam, r.lambda_max);
    phi = std::max(phi, r.phi_max);
  }
  auto v = detail::at_most("lambda_vanishes", std::string(tag_name(ledger.tag)),
                           detail::safe_ratio(lam, phi), tol);
  std::ostringstream os;
  os << "max |lambda| " << lam << ", max |phi| " << phi;
  v.detail = os.str();
  return v;
}

// ---------------------------------------------------------------------------
// Comparisons

struct ComparisonStep {
  Index step = 0;
  double t = 0.0;
  double a = 0.0, potential = 0.0, h = 0.0, y = 0.0;
};

struct ComparisonSummary {
  double max = 0.0;
  double rms = 0.0;
};

/// Relative discrepancy between two runs of the same scenario. Each
/// quantity is |q1(t) - q2(t)|_max / max_t |q1(t)|_max. The potential is phi,
/// or phi + lambda for EMQS_SPLIT.
struct ComparisonReport {
  FormulationTag first = FormulationTag::EmqsSymmetrized;
  FormulationTag second = FormulationTag::EmqsSymmetrized;
  std::vector<ComparisonStep> steps;
  ComparisonSummary a, potential, h, y;
  /// Names of the quantities the verdict is based on.
  std::vector<std::string> gated;
  double tolerance = 1e-8;
  bool informational = false;
  std::optional<bool> pass;
};

/// Formulations whose trajectories are expected to coincide.
inline bool equivalence_class_emqs(FormulationTag t) {
  return t == FormulationTag::EmqsSymmetrized || t == FormulationTag::EmqsLagrange ||
         t == FormulationTag::EmqsSplit || t == FormulationTag::EmqsCoulombSkew;
}

inline ComparisonReport compare_runs(const BlockSystem& s1, const RunResult& r1,
                                     const BlockSystem& s2, const RunResult& r2,
                                     double tol = 1e-8) {
  const auto& L1 = s1.layout;
  const auto& L2 = s2.layout;
  for (Block b : {Block::A, Block::Phi, Block::H})
    if (L1.size(b) != L2.size(b))
      throw InvalidArgument(std::string("compare: incompatible layouts, block ") + block_name(b) +
                            " has " + std::to_string(L1.size(b)) + " vs " +
                            std::to_string(L2.size(b)) + " entries (different grids?)");
  if (r1.trajectory.size() != r2.trajectory.size())
    throw InvalidArgument("compare: runs recorded different numbers of steps");

  ComparisonReport rep;
  rep.first = s1.tag();
  rep.second = s2.tag();
  rep.tolerance = tol;
  rep.informational = !(equivalence_class_emqs(rep.first) && equivalence_class_emqs(rep.second)) &&
                      rep.first != rep.second;

  auto potential = [](const BlockLayout& L, const FormulationTag tag, const Vector& x) {
    Vector p = L.segment(x, Block::Phi);
    if (tag == FormulationTag::EmqsSplit) p += L.segment(x, Block::Lambda);
    return p;
  };

  const std::size_t n = r1.trajectory.size();
  double sa = 0, sp = 0, sh = 0, sy = 0;
  for (const auto& tp : r1.trajectory) {
    sa = std::max(sa, detail::inf_norm(L1.segment(tp.x, Block::A)));
    sp = std::max(sp, detail::inf_norm(potential(L1, rep.first, tp.x)));
    sh = std::max(sh, detail::inf_norm(L1.segment(tp.x, Block::H)));
    sy = std::max(sy, detail::inf_norm(tp.y));
  }
  double qa = 0, qp = 0, qh = 0, qy = 0;
  for (std::size_t k = 0; k < n; ++k) {
    const auto& p1 = r1.trajectory[k];
    const auto& p2 = r2.trajectory[k];
    if (p1.step != p2.step)
      throw InvalidArgument("compare: runs use different record strides");
    ComparisonStep st;
    st.step = p1.step;
    st.t = p1.t;
    st.a = detail::safe_ratio(
        detail::inf_norm(L1.segment(p1.x, Block::A) - L2.segment(p2.x, Block::A)), sa);
    st.potential = detail::safe_ratio(
        detail::inf_norm(potential(L1, rep.first, p1.x) - potential(L2, rep.second, p2.x)), sp);
    st.h = detail::safe_ratio(
        detail::inf_norm(L1.segment(p1.x, Block::H) - L2.segment(p2.x, Block::H)), sh);
    st.y = detail::safe_ratio(detail::inf_norm(p1.y - p2.y), sy);
    rep.a.max = std::max(rep.a.max, st.a);
    rep.potential.max = std::max(rep.potential.max, st.potential);
    rep.h.max = std::max(rep.h.max, st.h);
    rep.y.max = std::max(rep.y.max, st.y);
    qa += st.a * st.a;
    qp += st.potential * st.potential;
    qh += st.h * st.h;
    qy += st.y * st.y;
    rep.steps.push_back(st);
  }
  if (n > 0) {
    rep.a.rms = std::sqrt(qa / double(n));
    rep.potential.rms = std::sqrt(qp / double(n));
    rep.h.rms = std::sqrt(qh / double(n));
    rep.y.rms = std::sqrt(qy / double(n));
  }

  if (!rep.informational) {
    const bool split = rep.first == FormulationTag::EmqsSplit ||
                       rep.second == FormulationTag::EmqsSplit;
    rep.gated = split ? std::vector<std::string>{"y", "potential"}
                      : std::vector<std::string>{"a", "potential", "h", "y"};
    double worst = std::max(rep.y.max, rep.potential.max);
    if (!split) worst = std::max({worst, rep.a.max, rep.h.max});
    rep.pass = worst <= tol;
  }
  return rep;
}

/// The quantity a comparison verdict is based on: the largest gated maximum.
inline double gated_max(const ComparisonReport& r) {
  double m = 0.0;
  for (const auto& g : r.gated) {
    if (g == "a") m = std::max(m, r.a.max);
    if (g == "potential") m = std::max(m, r.potential.max);
    if (g == "h") m = std::max(m, r.h.max);
    if (g == "y") m = std::max(m, r.y.max);
  }
  return m;
}

// ---------------------------------------------------------------------------
// Quasistatic sweep

struct SweepRow {
  double factor = 1.0;
  double dt = 0.0;
  double discrepancy = 0.0;  // max_t |y1 - y2| / max_t |y1|
};

struct SweepTable {
  FormulationTag reference = FormulationTag::Maxwell;
  FormulationTag candidate = FormulationTag::EmqsSymmetrized;
  std::vector<SweepRow> rows;
  /// Strict decrease along increasing factors; absent with fewer than 2 rows.
  std::optional<Verdict> monotone;
};

/// Slows the source by each factor (and stretches dt by the same factor, so
/// every run covers the same number of source periods) and compares the
/// outputs of `reference` and `candidate`.
inline SweepTable quasistatic_sweep(const Problem& p, const StepperConfig& cfg,
                                    const SourceWaveform& src, const Vector& A0,
                                    const Vector& phi0, std::vector<double> factors,
                                    FormulationTag reference = FormulationTag::Maxwell,
                                    FormulationTag candidate = FormulationTag::EmqsSymmetrized) {
  if (factors.empty()) throw InvalidArgument("sweep: at least one time-scale factor is required");
  for (double f : factors)
    if (!(f > 0.0)) throw InvalidArgument("sweep: time-scale factors must be > 0");
  std::sort(factors.begin(), factors.end());
  SweepTable table;
  table.reference = reference;
  table.candidate = candidate;
  const BlockSystem s1 = p.system(reference);
  const BlockSystem s2 = p.system(candidate);
  for (double f : factors) {
    StepperConfig c = cfg;
    c.dt = cfg.dt * f;
    SourceWaveform w = src;
    w.profile = slowed(src.profile, f);
    const RunResult r1 = run(s1, p.ops, p.hodges, consistent_init(s1, A0, phi0), c, w);
    const RunResult r2 = run(s2, p.ops, p.hodges, consistent_init(s2, A0, phi0), c, w);
    const ComparisonReport rep = compare_runs(s1, r1, s2, r2);
    table.rows.push_back({f, c.dt, rep.y.max});
  }
  if (table.rows.size() >= 2) {
    double worst_ratio = 0.0;
    for (std::size_t k = 1; k < table.rows.size(); ++k)
      worst_ratio = std::max(worst_ratio, detail::safe_ratio(table.rows[k].discrepancy,
                                                             table.rows[k - 1].discrepancy));
    Verdict v{"quasistatic_monotone",
              std::string(tag_name(reference)) + " vs " + std::string(tag_name(candidate)),
              "< 1 (ratio of consecutive discrepancies)", worst_ratio, 1.0, worst_ratio < 1.0, {}};
    table.monotone = v;
  }
  return table;
}

}  // namespace emqs
