#pragma once

#include <Eigen/Dense>
#include <optional>
#include <utility>
#include <vector>

#include "bifi/basis.hpp"
#include "bifi/solvers.hpp"

namespace bifi {

enum class Fidelity { Low, High };

/// Paired realizations at one fidelity: `inputs` is N x d in the canonical
/// domain, `qoi` holds one column per realization. `point_coords` carries the
/// spatial locations of the QoI rows when known (empty otherwise).
struct Ensemble {
  Eigen::MatrixXd inputs;
  Eigen::MatrixXd qoi;
  Fidelity fidelity = Fidelity::Low;
  Eigen::VectorXd point_coords;

  int sample_count() const { return static_cast<int>(inputs.rows()); }
  int point_count() const { return static_cast<int>(qoi.rows()); }
  void validate() const;
};

struct KlDecomposition {
  Eigen::VectorXd mean;          // c_1 of the PC coefficients
  Eigen::VectorXd eigenvalues;   // descending, >= 0
  Eigen::MatrixXd eigenvectors;  // orthonormal columns

  /// Modes with lambda_i > 1e-14 * lambda_1.
  int positive_count() const;
};

struct ReducedBasis {
  int rank = 1;                       // r, constant function included
  Eigen::MatrixXd weights;            // (r-1) x (P-1)
  PcBasis basis;
  Eigen::VectorXd lf_mean;
  Eigen::VectorXd eigenvalues;
};

struct BfModel {
  Eigen::MatrixXd coefficients;  // M x r
  ReducedBasis reduced;
  int n_used = 0;
  std::vector<int> hf_indices;
};

struct StatSummary {
  Eigen::VectorXd mean;
  Eigen::VectorXd variance;
};

enum class CoeffBasisKind { Pc, Reduced };

struct RankPolicy {
  static RankPolicy fixed(int r);
  static RankPolicy energy(double theta);

  bool is_explicit = false;
  int r = 0;
  double theta = 0.9999;
};

enum class LfFitMethod { Auto, LeastSquares, Sparse };

Eigen::MatrixXd fit_lf_pc(const Ensemble& lf, const PcBasis& basis,
                          const SparseSolveOptions& opts,
                          LfFitMethod method = LfFitMethod::Auto);

/// Spectral decomposition of the covariance implied by the PC coefficients,
/// computed as an SVD of the coefficient block excluding the mean column.
KlDecomposition kl_decompose(const Eigen::MatrixXd& c_lf);

int select_rank(const Eigen::VectorXd& eigenvalues, const RankPolicy& policy);

ReducedBasis build_reduced_basis(const Eigen::MatrixXd& c_lf, const KlDecomposition& kl,
                                 int r, const PcBasis& basis);

/// r x N evaluation of the reduced functions; row 0 is the constant 1.
Eigen::MatrixXd eval_reduced_basis(const ReducedBasis& rb,
                                   Eigen::Ref<const Eigen::MatrixXd> samples);

/// Least-squares coefficients against a reduced measurement matrix; warns
/// when n falls below the r*log(r) sampling guideline.
LsSolveReport bf_regress(const Eigen::MatrixXd& eta_n, const Eigen::MatrixXd& h_n);

Eigen::MatrixXd bf_predict(const BfModel& model, Eigen::Ref<const Eigen::MatrixXd> samples);

/// mean = first column, variance = row-wise sum of squares of the rest; exact
/// for orthonormal bases, and used for the reduced basis through its
/// orthonormality identity.
StatSummary statistics(const Eigen::MatrixXd& coefficients,
                       CoeffBasisKind kind = CoeffBasisKind::Pc);

/// Relative 2-norm errors (mean, variance) of est against ref.
std::pair<double, double> relative_error(const StatSummary& est, const StatSummary& ref);

std::vector<int> select_hf_subset(int n_total, int n, std::uint64_t seed);

struct SmrOptions {
  RankPolicy rank;
  SparseSolveOptions solver;
  LfFitMethod lf_fit = LfFitMethod::Auto;
};

struct SmrDiagnostics {
  Eigen::VectorXd eigenvalues;
  int r = 1;
  Eigen::MatrixXd lf_coefficients;
  double lf_residual_fro = 0.0;
};

struct SmrResult {
  BfModel model;
  StatSummary stats;
  SmrDiagnostics diagnostics;
};

/// End-to-end reduction: LF PC fit, KL of the coefficients, reduced basis,
/// BF regression on the HF subset, statistics from the BF coefficients.
SmrResult run_smr(const Ensemble& lf, const Ensemble& hf_subset, const PcBasis& basis,
                  const SmrOptions& opts, std::vector<int> hf_indices = {});

}  // namespace bifi
