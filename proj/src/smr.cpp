#include "bifi/smr.hpp"

#include <cmath>

namespace bifi {

namespace {

constexpr double kRankCutoff = 1e-14;  // relative eigenvalue floor for 1/sqrt(lambda)

}  // namespace

void Ensemble::validate() const {
  if (qoi.cols() != inputs.rows()) {
    throw DataError("ensemble: qoi column count must equal input realization count");
  }
  if (!inputs.allFinite() || !qoi.allFinite()) {
    throw DataError("ensemble: non-finite entries");
  }
  if (point_coords.size() != 0 && point_coords.size() != qoi.rows()) {
    throw DataError("ensemble: point_coords length must match qoi rows");
  }
}

int KlDecomposition::positive_count() const {
  if (eigenvalues.size() == 0) return 0;
  const double floor = kRankCutoff * eigenvalues(0);
  if (!(eigenvalues(0) > 0)) return 0;
  int count = 0;
  for (Eigen::Index i = 0; i < eigenvalues.size(); ++i) {
    if (eigenvalues(i) > floor) ++count;
  }
  return count;
}

RankPolicy RankPolicy::fixed(int r) {
  if (r < 1) throw ConfigError("rank must be >= 1");
  RankPolicy p;
  p.is_explicit = true;
  p.r = r;
  return p;
}

RankPolicy RankPolicy::energy(double theta) {
  if (!(theta > 0.0) || theta > 1.0) throw ConfigError("energy threshold must lie in (0,1]");
  RankPolicy p;
  p.is_explicit = false;
  p.theta = theta;
  return p;
}

Eigen::MatrixXd fit_lf_pc(const Ensemble& lf, const PcBasis& basis,
                          const SparseSolveOptions& opts, LfFitMethod method) {
  lf.validate();
  const Eigen::MatrixXd psi = measurement_matrix(basis, lf.inputs);
  const int n = lf.sample_count();
  bool use_ls = method == LfFitMethod::LeastSquares;
  if (method == LfFitMethod::Auto) use_ls = n >= 2 * basis.size();
  if (use_ls) return least_squares(psi, lf.qoi).coefficients;
  return l12_minimize(psi, lf.qoi, opts).coefficients;
}

KlDecomposition kl_decompose(const Eigen::MatrixXd& c_lf) {
  if (c_lf.cols() < 2) throw DataError("kl_decompose: need at least 2 coefficient columns");
  KlDecomposition kl;
  kl.mean = c_lf.col(0);
  const Eigen::MatrixXd block = c_lf.rightCols(c_lf.cols() - 1);
  Eigen::BDCSVD<Eigen::MatrixXd> svd(block, Eigen::ComputeThinU);
  kl.eigenvalues = svd.singularValues().array().square();
  kl.eigenvectors = svd.matrixU();
  return kl;
}

int select_rank(const Eigen::VectorXd& eigenvalues, const RankPolicy& policy) {
  KlDecomposition tmp;
  tmp.eigenvalues = eigenvalues;
  const int positive = tmp.positive_count();
  if (policy.is_explicit) {
    return std::max(1, std::min(policy.r, 1 + positive));
  }
  const double total = eigenvalues.sum();
  if (!(total > 0.0)) {
    throw NumericalError("select_rank: all-zero spectrum under threshold policy");
  }
  double acc = 0.0;
  for (Eigen::Index i = 0; i < eigenvalues.size(); ++i) {
    acc += eigenvalues(i);
    if (acc / total >= policy.theta) return static_cast<int>(i) + 2;
  }
  return static_cast<int>(eigenvalues.size()) + 1;
}

ReducedBasis build_reduced_basis(const Eigen::MatrixXd& c_lf, const KlDecomposition& kl,
                                 int r, const PcBasis& basis) {
  if (r < 1) throw ConfigError("reduced rank must be >= 1");
  const int positive = kl.positive_count();
  if (r - 1 > positive) {
    throw NumericalError("requested rank exceeds 1 + number of positive KL modes");
  }
  if (c_lf.cols() != basis.size()) {
    throw DataError("coefficient column count does not match basis size");
  }
  ReducedBasis rb{r, Eigen::MatrixXd(r - 1, c_lf.cols() - 1), basis, kl.mean,
                  kl.eigenvalues};
  const Eigen::MatrixXd block = c_lf.rightCols(c_lf.cols() - 1);
  for (int i = 0; i < r - 1; ++i) {
    // omega_ij = <phi_i, c_{j+1}> / sqrt(lambda_i)
    rb.weights.row(i) = kl.eigenvectors.col(i).transpose() * block / std::sqrt(kl.eigenvalues(i));
  }
  return rb;
}

Eigen::MatrixXd eval_reduced_basis(const ReducedBasis& rb,
                                   Eigen::Ref<const Eigen::MatrixXd> samples) {
  const int n = static_cast<int>(samples.rows());
  Eigen::MatrixXd eta(rb.rank, n);
  eta.row(0).setOnes();
  if (rb.rank > 1) {
    const Eigen::MatrixXd psi = measurement_matrix(rb.basis, samples);
    eta.bottomRows(rb.rank - 1) = rb.weights * psi.bottomRows(psi.rows() - 1);
  }
  return eta;
}

LsSolveReport bf_regress(const Eigen::MatrixXd& eta_n, const Eigen::MatrixXd& h_n) {
  const int r = static_cast<int>(eta_n.rows());
  const int n = static_cast<int>(eta_n.cols());
  const double guideline = r > 1 ? r * std::log(static_cast<double>(r)) : 0.0;
  if (n < guideline) {
    log_warn("bf_regress: n = " + std::to_string(n) + " below the r*log(r) ~ " +
             std::to_string(guideline) + " sampling guideline");
  }
  return least_squares(eta_n, h_n);
}

Eigen::MatrixXd bf_predict(const BfModel& model, Eigen::Ref<const Eigen::MatrixXd> samples) {
  return model.coefficients * eval_reduced_basis(model.reduced, samples);
}

StatSummary statistics(const Eigen::MatrixXd& coefficients, CoeffBasisKind) {
  if (coefficients.cols() < 1) throw DataError("statistics: empty coefficient matrix");
  StatSummary s;
  s.mean = coefficients.col(0);
  if (coefficients.cols() > 1) {
    s.variance = coefficients.rightCols(coefficients.cols() - 1).rowwise().squaredNorm();
  } else {
    s.variance = Eigen::VectorXd::Zero(coefficients.rows());
  }
  return s;
}

std::pair<double, double> relative_error(const StatSummary& est, const StatSummary& ref) {
  if (est.mean.size() != ref.mean.size() || est.variance.size() != ref.variance.size()) {
    throw DataError("relative_error: summary lengths differ");
  }
  const double mean_norm = ref.mean.norm();
  const double var_norm = ref.variance.norm();
  if (!(mean_norm > 0.0) || !(var_norm > 0.0)) {
    throw NumericalError("relative_error: zero-norm reference");
  }
  return {(ref.mean - est.mean).norm() / mean_norm,
          (ref.variance - est.variance).norm() / var_norm};
}

std::vector<int> select_hf_subset(int n_total, int n, std::uint64_t seed) {
  if (n < 1 || n > n_total) throw ConfigError("HF subset size out of range");
  Rng rng(seed);
  return rng.sample_without_replacement(n_total, n);
}

SmrResult run_smr(const Ensemble& lf, const Ensemble& hf_subset, const PcBasis& basis,
                  const SmrOptions& opts, std::vector<int> hf_indices) {
  lf.validate();
  hf_subset.validate();
  // Shared-realization check: every subset input must appear in the LF set.
  for (int i = 0; i < hf_subset.sample_count(); ++i) {
    bool found = false;
    for (int j = 0; j < lf.sample_count() && !found; ++j) {
      found = (hf_subset.inputs.row(i) - lf.inputs.row(j)).cwiseAbs().maxCoeff() == 0.0;
    }
    if (!found) {
      throw DataError("run_smr: HF subset inputs are not a subset of the LF realizations");
    }
  }

  SmrResult out;
  out.diagnostics.lf_coefficients = fit_lf_pc(lf, basis, opts.solver, opts.lf_fit);
  const KlDecomposition kl = kl_decompose(out.diagnostics.lf_coefficients);
  out.diagnostics.eigenvalues = kl.eigenvalues;
  const int r = select_rank(kl.eigenvalues, opts.rank);
  out.diagnostics.r = r;

  ReducedBasis rb = build_reduced_basis(out.diagnostics.lf_coefficients, kl, r, basis);
  const Eigen::MatrixXd eta_n = eval_reduced_basis(rb, hf_subset.inputs);
  const LsSolveReport fit = bf_regress(eta_n, hf_subset.qoi);
  out.model = BfModel{fit.coefficients, std::move(rb), hf_subset.sample_count(),
                      std::move(hf_indices)};
  out.stats = statistics(out.model.coefficients, CoeffBasisKind::Reduced);
  return out;
}

}  // namespace bifi
