#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "emqs/hamiltonian.hpp"
#include "emqs/linear_solver.hpp"
#include "emqs/source.hpp"

namespace emqs {

struct StepperConfig {
  double dt = 1.0;
  double theta = 0.5;
  Index steps = 0;
  SolverConfig solver;
  Index record_stride = 1;

  void validate() const {
    if (!(dt > 0.0)) throw InvalidArgument("stepper: dt must be > 0");
    if (!(theta >= 0.5 && theta <= 1.0)) throw InvalidArgument("stepper: theta must lie in [0.5, 1]");
    if (steps < 0) throw InvalidArgument("stepper: steps must be >= 0");
    if (record_stride < 1) throw InvalidArgument("stepper: record_stride must be >= 1");
  }
  bool operator==(const StepperConfig&) const = default;
};

/// x = (a, phi, h[, lambda]) with a = dA/dt on edges, plus the accumulated
/// vector potential A on edges.
struct SimState {
  Vector x;
  Vector A_acc;
  double t = 0.0;
};

namespace detail {

inline SparseMatrix sub_block(const SparseMatrix& M, const BlockLayout& L, Block r, Block c) {
  return M.block(L.offset(r), L.offset(c), L.size(r), L.size(c));
}

/// Curl, gradient and mu recovered from an assembled system.
struct SystemParts {
  SparseMatrix C;  // faces x edges, J(h, a)
  SparseMatrix G;  // edges x nodes, B(phi, :)^T
  Vector mu;       // E(h, h) diagonal
  explicit SystemParts(const BlockSystem& sys) {
    const auto& L = sys.layout;
    C = sub_block(sys.J, L, Block::H, Block::A);
    G = SparseMatrix(sys.B.block(L.offset(Block::Phi), 0, L.size(Block::Phi), sys.B.cols()))
            .transpose();
    mu = sub_block(sys.E, L, Block::H, Block::H).diagonal();
  }
};

inline std::string state_label(const BlockLayout& L, Index i) {
  const Block b = L.block_of(i);
  return std::string(block_name(b)) + "[" + std::to_string(i - L.offset(b)) + "]";
}

}  // namespace detail

/// Initial state satisfying mu h = C A0: h = mu^-1 C A0, a = 0, phi = phi0,
/// lambda = 0, A_acc = A0, t = 0.
///
/// For MAXWELL phi is pinned (temporal gauge); the gradient of phi0 is moved
/// into a instead, which leaves y = a + G phi unchanged.
inline SimState consistent_init(const BlockSystem& sys, const Vector& A0, const Vector& phi0) {
  const auto& L = sys.layout;
  if (A0.size() != L.size(Block::A))
    throw InvalidArgument("consistent_init: A0 must have one entry per interior edge");
  if (phi0.size() != L.size(Block::Phi))
    throw InvalidArgument("consistent_init: phi0 must have one entry per interior node");
  const detail::SystemParts parts(sys);
  SimState s;
  s.x = Vector::Zero(sys.dim());
  L.segment(s.x, Block::Phi) = phi0;
  L.segment(s.x, Block::H) = (parts.C * A0).cwiseQuotient(parts.mu);
  if (sys.tag() == FormulationTag::Maxwell && !sys.pinned.empty()) {
    L.segment(s.x, Block::A) = parts.G * phi0;
    L.segment(s.x, Block::Phi).setZero();
  }
  for (Index i : sys.pinned) s.x[i] = 0.0;
  s.A_acc = A0;
  s.t = 0.0;
  return s;
}

/// Step matrix K = E - theta dt (J - R) with pinned rows and columns
/// replaced by the identity.
inline SparseMatrix step_matrix(const BlockSystem& sys, const StepperConfig& cfg) {
  SparseMatrix K = sys.E - (cfg.theta * cfg.dt) * (sys.J - sys.R);
  if (!sys.pinned.empty()) {
    std::vector<char> mask(sys.dim(), 0);
    for (Index i : sys.pinned) mask[i] = 1;
    K.prune([&mask](Index r, Index c, double) { return !mask[r] && !mask[c]; });
    for (Index i : sys.pinned) K.coeffRef(i, i) = 1.0;
  }
  K.makeCompressed();
  return K;
}

/// theta-method for E x' = (J - R) x + B u:
///   [E - theta dt (J - R)] x+ = [E + (1 - theta) dt (J - R)] x- + dt B u(t- + theta dt)
/// Pinned rows and columns are replaced by the identity.
class ThetaStepper {
 public:
  ThetaStepper(const BlockSystem& sys, const StepperConfig& cfg) : sys_(&sys), cfg_(cfg) {
    cfg_.validate();
    const SparseMatrix K = emqs::step_matrix(sys, cfg_);
    rhs_ = sys.E + ((1.0 - cfg_.theta) * cfg_.dt) * (sys.J - sys.R);
    if (!sys.pinned.empty()) {
      std::vector<char> mask(sys.dim(), 0);
      for (Index i : sys.pinned) mask[i] = 1;
      rhs_.prune([&mask](Index r, Index, double) { return !mask[r]; });
    }
    const BlockLayout L = sys.layout;
    try {
      solver_.compute(K, cfg_.solver, [L](Index i) { return detail::state_label(L, i); });
    } catch (const SingularSystemError& e) {
      throw SingularSystemError(
          std::string(tag_name(sys.tag())) + ": step matrix E - theta dt (J - R) is singular (" +
          e.what() +
          "). Check the gauge settings: DARWIN_UNGAUGED has no gauge condition, "
          "the gauged variants need kappa_hat / eps_hat on the gauge region, and "
          "pinning (grounding) of undetermined potentials must be enabled.");
    }
  }

  const StepperConfig& config() const { return cfg_; }
  const SparseMatrix& step_matrix() const { return solver_.matrix(); }

  /// Time at which the source is sampled for the step starting at t.
  double source_time(double t) const { return t + cfg_.theta * cfg_.dt; }

  SimState step(const SimState& s, const Vector& u) const {
    const auto& L = sys_->layout;
    Vector b = rhs_ * s.x + cfg_.dt * (sys_->B * u);
    for (Index i : sys_->pinned) b[i] = 0.0;
    SimState next;
    next.x = solver_.solve(b);
    const auto a_old = L.segment(s.x, Block::A);
    const auto a_new = L.segment(next.x, Block::A);
    next.A_acc = s.A_acc + cfg_.dt * (cfg_.theta * a_new + (1.0 - cfg_.theta) * a_old);
    next.t = s.t + cfg_.dt;
    return next;
  }

  SimState step(const SimState& s, const SourceWaveform& src) const {
    return step(s, src(source_time(s.t)));
  }

 private:
  const BlockSystem* sys_;
  StepperConfig cfg_;
  SparseMatrix rhs_;
  LinearSolver solver_;
};

/// One-shot step.
inline SimState step_theta(const BlockSystem& sys, const SimState& s, const StepperConfig& cfg,
                           const SourceWaveform& u) {
  return ThetaStepper(sys, cfg).step(s, u);
}

/// One row per recorded step. Step quantities (dissipation, port power) are
/// those of the last step before the record; `*_relative` columns hold the
/// worst value over all steps since the previous record.
struct LedgerRow {
  Index step = 0;
  double t = 0.0;
  double h_quadratic = 0.0;  // 1/2 x^T E x (NaN for non-symmetric E)
  double h_fieldwise = 0.0;  // field-wise energy of the matching kind
  double dissipation = 0.0;  // xm^T R xm at the evaluation point
  double port_power = 0.0;   // ym^T um
  double work_in = 0.0;      // sum dt * port_power
  double work_dissipated = 0.0;
  double balance_residual = 0.0;  // H+ - H- - dt(-diss + port), worst |.|
  double balance_relative = 0.0;  // residual / max(1, |H-|)
  double gauge_residual = 0.0;    // |G^T Me (a+ - a-)|_max, worst
  double gauge_relative = 0.0;    // residual / (|G^T Me|_inf max_t |a|_max)
  double lambda_max = 0.0;
  double phi_max = 0.0;
  double flux_residual = 0.0;  // |Mmu h - C A_acc|_max at the record
  double flux_relative = 0.0;  // worst relative value since the last record,
                               // against max_t max(|Mmu h|, |C|_inf |A_acc|)
};

struct EnergyLedger {
  FormulationTag tag = FormulationTag::EmqsSymmetrized;
  HamiltonianKind kind = HamiltonianKind::Emqs;
  double dt = 0.0;
  double theta = 0.5;
  std::vector<LedgerRow> rows;
};

struct TrajectoryPoint {
  Index step = 0;
  double t = 0.0;
  Vector x;
  Vector y;
  Vector A_acc;
};

struct RunResult {
  std::vector<TrajectoryPoint> trajectory;
  EnergyLedger ledger;
};

namespace detail {

inline double inf_norm(const Vector& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

inline double row_sum_norm(const SparseMatrix& m) {
  Vector s = Vector::Zero(m.rows());
  for (Index k = 0; k < m.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(m, k); it; ++it) s[it.row()] += std::abs(it.value());
  return inf_norm(s);
}

inline double safe_ratio(double num, double den) {
  if (num == 0.0) return 0.0;
  return den > 0.0 ? num / den : std::numeric_limits<double>::infinity();
}

}  // namespace detail

/// Integrates `cfg.steps` steps from `init` and records trajectory and ledger
/// every `cfg.record_stride` steps (plus the initial state).
inline RunResult run(const BlockSystem& sys, const IncidenceOps& ops, const HodgeSet& hodges,
                     const SimState& init, const StepperConfig& cfg, const SourceWaveform& src) {
  cfg.validate();
  const auto& L = sys.layout;
  if (init.x.size() != sys.dim()) throw InvalidArgument("run: initial state does not match layout");
  if (src.pattern.size() != L.size(Block::A))
    throw InvalidArgument("run: source pattern must have one entry per interior edge");

  const bool sym = symmetric_e(sys.tag());
  const HamiltonianKind kind = matching_kind(sys.tag());
  const SparseMatrix GtMe = SparseMatrix(ops.G.transpose()) * diagonal_matrix(hodges.eps);
  const double gtme_norm = detail::row_sum_norm(GtMe);
  const double c_norm = detail::row_sum_norm(ops.C);

  auto energy_q = [&](const Vector& x) {
    return sym ? quadratic_energy(sys, x) : std::numeric_limits<double>::quiet_NaN();
  };
  // Relative residuals are measured against the largest field seen so far,
  // so that zero crossings of the fields do not inflate them.
  double flux_scale = 0.0, a_scale = 0.0;
  auto flux = [&](const SimState& s, double& rel) {
    const Vector mh = hodges.mu.cwiseProduct(L.segment(s.x, Block::H));
    const double res = detail::inf_norm(mh - ops.C * s.A_acc);
    flux_scale = std::max({flux_scale, detail::inf_norm(mh), c_norm * detail::inf_norm(s.A_acc)});
    rel = detail::safe_ratio(res, flux_scale);
    return res;
  };

  RunResult out;
  out.ledger.tag = sys.tag();
  out.ledger.kind = kind;
  out.ledger.dt = cfg.dt;
  out.ledger.theta = cfg.theta;

  auto record = [&](Index step, const SimState& s, LedgerRow row) {
    row.step = step;
    row.t = s.t;
    row.h_quadratic = energy_q(s.x);
    row.h_fieldwise = hamiltonian(kind, hodges, ops, s.x);
    row.phi_max = detail::inf_norm(L.segment(s.x, Block::Phi));
    row.lambda_max = L.has(Block::Lambda) ? detail::inf_norm(L.segment(s.x, Block::Lambda)) : 0.0;
    double rel = 0.0;
    row.flux_residual = flux(s, rel);
    row.flux_relative = std::max(row.flux_relative, rel);
    out.ledger.rows.push_back(row);
    out.trajectory.push_back({step, s.t, s.x, output(sys, s.x), s.A_acc});
  };

  record(0, init, LedgerRow{});
  if (cfg.steps == 0) return out;

  const ThetaStepper stepper(sys, cfg);
  SimState s = init;
  double work_in = 0.0, work_diss = 0.0;
  LedgerRow acc;
  for (Index k = 1; k <= cfg.steps; ++k) {
    const Vector u = src(stepper.source_time(s.t));
    SimState next = stepper.step(s, u);

    const Vector xm = cfg.theta * next.x + (1.0 - cfg.theta) * s.x;
    const double diss = xm.dot(sys.R * xm);
    const double port = output(sys, xm).dot(u);
    work_in += cfg.dt * port;
    work_diss += cfg.dt * diss;

    const double h_old = energy_q(s.x), h_new = energy_q(next.x);
    const double bal = h_new - h_old - cfg.dt * (-diss + port);
    acc.balance_residual = std::max(acc.balance_residual, std::abs(bal));
    acc.balance_relative =
        std::max(acc.balance_relative, std::abs(bal) / std::max(1.0, std::abs(h_old)));
    if (!sym) acc.balance_residual = acc.balance_relative = std::numeric_limits<double>::quiet_NaN();

    const Vector da = L.segment(next.x, Block::A) - L.segment(s.x, Block::A);
    const double gres = detail::inf_norm(GtMe * da);
    a_scale = std::max({a_scale, detail::inf_norm(L.segment(next.x, Block::A)),
                        detail::inf_norm(L.segment(s.x, Block::A))});
    const double gscale = gtme_norm * a_scale;
    acc.gauge_residual = std::max(acc.gauge_residual, gres);
    acc.gauge_relative = std::max(acc.gauge_relative, detail::safe_ratio(gres, gscale));

    double frel = 0.0;
    flux(next, frel);
    acc.flux_relative = std::max(acc.flux_relative, frel);

    s = std::move(next);
    if (k % cfg.record_stride == 0 || k == cfg.steps) {
      acc.dissipation = diss;
      acc.port_power = port;
      acc.work_in = work_in;
      acc.work_dissipated = work_diss;
      record(k, s, acc);
      acc = LedgerRow{};
    }
  }
  return out;
}

}  // namespace emqs
