#pragma once

#include <cmath>
#include <functional>
#include <memory>
#include <sstream>
#include <string>

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/OrderingMethods>
#include <Eigen/SparseLU>
#include <Eigen/SparseQR>

#include "emqs/material.hpp"

namespace emqs {

enum class SolverKind { Direct, Iterative };

struct SolverConfig {
  SolverKind kind = SolverKind::Direct;
  /// Relative residual required from the iterative solver.
  double tolerance = 1e-12;
  int max_iterations = 2000;
  /// Direct solves whose relative residual exceeds this are reported as
  /// numerically singular.
  double residual_guard = 1e-8;
  /// Rank-revealing QR before the LU factorization.
  bool check_rank = true;
  /// Iterative refinement rounds after each direct solve.
  int refinement_steps = 3;

  bool operator==(const SolverConfig&) const = default;
};

/// Labels a row/column index for error messages (e.g. "phi[3]").
using IndexLabeler = std::function<std::string(Index)>;

/// Factorizes once, solves many right-hand sides.
class LinearSolver {
 public:
  LinearSolver() = default;
  LinearSolver(const SparseMatrix& K, SolverConfig cfg, IndexLabeler label = {}) {
    compute(K, cfg, std::move(label));
  }

  void compute(const SparseMatrix& K, SolverConfig cfg, IndexLabeler label = {}) {
    if (K.rows() != K.cols()) throw InvalidArgument("linear solver: matrix is not square");
    cfg_ = cfg;
    K_ = K;
    K_.makeCompressed();
    label_ = std::move(label);
    if (K_.rows() == 0) return;
    if (cfg_.kind == SolverKind::Direct) {
      if (cfg_.check_rank) check_rank();
      lu_ = std::make_unique<Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>>>();
      lu_->compute(K_);
      if (lu_->info() != Eigen::Success)
        throw SingularSystemError("sparse LU failed: " + lu_->lastErrorMessage());
    } else {
      it_ = std::make_unique<Eigen::BiCGSTAB<SparseMatrix, Eigen::IncompleteLUT<double>>>();
      it_->setTolerance(cfg_.tolerance);
      it_->setMaxIterations(cfg_.max_iterations);
      it_->compute(K_);
      if (it_->info() != Eigen::Success)
        throw SingularSystemError("incomplete LU preconditioner failed");
    }
  }

  Vector solve(const Vector& b) const {
    if (b.size() != K_.rows()) throw InvalidArgument("linear solver: right-hand side size mismatch");
    if (b.size() == 0) return b;
    const double bnorm = b.norm();
    if (bnorm == 0.0) return Vector::Zero(b.size());
    Vector x;
    if (cfg_.kind == SolverKind::Direct) {
      x = lu_->solve(b);
      // A few rounds of iterative refinement: the step matrices mix blocks of
      // very different scale and plain LU leaves avoidable roundoff behind.
      Vector r = b - K_ * x;
      for (int k = 0; k < cfg_.refinement_steps && x.allFinite(); ++k) {
        const Vector dx = lu_->solve(r);
        const Vector xn = x + dx;
        const Vector rn = b - K_ * xn;
        if (!(rn.norm() < r.norm())) break;
        x = xn;
        r = rn;
      }
      const double rel = r.norm() / bnorm;
      if (!x.allFinite() || !(rel <= cfg_.residual_guard)) {
        std::ostringstream os;
        os << "direct solve is numerically singular (relative residual " << rel << ")";
        throw SingularSystemError(os.str());
      }
    } else {
      x = it_->solve(b);
      const double rel = (K_ * x - b).norm() / bnorm;
      if (it_->info() != Eigen::Success || !x.allFinite() || !(rel <= cfg_.tolerance * 10)) {
        std::ostringstream os;
        os << "BiCGSTAB did not converge after " << it_->iterations()
           << " iterations (relative residual " << rel << ")";
        throw ConvergenceError(os.str(), rel);
      }
    }
    return x;
  }

  const SparseMatrix& matrix() const { return K_; }

 private:
  void check_rank() {
    // Columns are equilibrated first so the rank decision does not depend on
    // the physical units of the blocks.
    Vector scale(K_.cols());
    for (Index j = 0; j < K_.cols(); ++j) {
      const double n = K_.col(j).norm();
      scale[j] = n > 0.0 ? 1.0 / n : 1.0;
    }
    const SparseMatrix Ks = K_ * diagonal_matrix(scale);
    Eigen::SparseQR<SparseMatrix, Eigen::COLAMDOrdering<int>> qr;
    qr.compute(Ks);
    if (qr.info() != Eigen::Success)
      throw SingularSystemError("rank check: sparse QR failed: " + qr.lastErrorMessage());
    const Index rank = qr.rank();
    if (rank < K_.cols()) {
      std::ostringstream os;
      os << "matrix is singular: rank " << rank << " of " << K_.cols()
         << "; undetermined columns include";
      const auto& perm = qr.colsPermutation().indices();
      const Index shown = std::min<Index>(K_.cols() - rank, 8);
      for (Index k = 0; k < shown; ++k) {
        const Index col = perm[rank + k];
        os << ' ' << (label_ ? label_(col) : std::to_string(col));
      }
      throw SingularSystemError(os.str());
    }
  }

  SolverConfig cfg_;
  SparseMatrix K_;
  IndexLabeler label_;
  std::unique_ptr<Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>>> lu_;
  std::unique_ptr<Eigen::BiCGSTAB<SparseMatrix, Eigen::IncompleteLUT<double>>> it_;
};

/// One-shot solve of K x = b.
inline Vector solve_linear(const SparseMatrix& K, const Vector& b, const SolverConfig& cfg = {}) {
  return LinearSolver(K, cfg).solve(b);
}

}  // namespace emqs
