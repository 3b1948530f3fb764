#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "bifi/util.hpp"

namespace bifi {

enum class LsMethod { Qr, SvdPinv };

struct LsSolveReport {
  Eigen::MatrixXd coefficients;  // M x P
  double residual_fro = 0.0;     // ||C Psi - U||_F, recomputed
  int rank_used = 0;
  LsMethod method = LsMethod::Qr;
};

/// Minimum-Frobenius-norm minimizer of ||C Psi - U||_F. QR when Psi has full
/// row rank, SVD pseudoinverse otherwise.
LsSolveReport least_squares(const Eigen::MatrixXd& psi, const Eigen::MatrixXd& u);

enum class KappaPolicy { Explicit, Holdout };

struct SparseSolveOptions {
  KappaPolicy kappa_policy = KappaPolicy::Holdout;
  double kappa = 0.0;                 // residual budget when Explicit
  std::vector<double> lambda_grid;    // penalty weights; empty = automatic grid
  double admm_penalty = 1.0;
  int max_iters = 8000;
  double primal_tol = 1e-9;
  double dual_tol = 1e-9;
  double holdout_fraction = 0.2;
  std::uint64_t seed = 0;
};

struct SparseSolveReport {
  Eigen::MatrixXd coefficients;
  double objective = 0.0;       // ||C||_{1,2}
  double residual_fro = 0.0;
  double selected_lambda = 0.0; // 0 when the plain LS candidate won
  double kappa_used = 0.0;
  int iterations = 0;
  bool converged = true;
};

/// sqrt(sum_i ||C(i,:)||_1^2).
double l12_norm(const Eigen::MatrixXd& c);

/// argmin_b  w * ||b||_1^2 + 0.5 * ||b - v||_2^2  (closed form via sorted scan).
Eigen::VectorXd squared_l1_prox(Eigen::Ref<const Eigen::VectorXd> v, double w);

/// min ||C||_{1,2} subject to ||C Psi - U||_F <= kappa. Solved through the
/// penalized reformulation min lambda*sum_i ||C(i,:)||_1^2 + 0.5||C Psi - U||_F^2
/// swept over a lambda grid by ADMM with row-wise proximal shrinkage; the
/// returned solution is the feasible candidate with the smallest objective,
/// including a support-restricted least-squares polish and the plain LS
/// solution when feasible. Under the Holdout policy kappa is calibrated from
/// the validation residual of a preliminary LS fit on an 80/20 column split.
SparseSolveReport l12_minimize(const Eigen::MatrixXd& psi, const Eigen::MatrixXd& u,
                               const SparseSolveOptions& opts);

}  // namespace bifi
