#pragma once

#include <Eigen/Dense>
#include <vector>

#include "bifi/util.hpp"

namespace bifi {

enum class PolyFamily { Legendre, Hermite };

PolyFamily poly_family_from_string(const std::string& name);
std::string to_string(PolyFamily family);

struct MultiIndex {
  std::vector<int> degrees;

  int total() const {
    int s = 0;
    for (int d : degrees) s += d;
    return s;
  }
  bool operator==(const MultiIndex& other) const { return degrees == other.degrees; }
};

/// All multi-indices with |alpha| <= p in d dimensions, graded lexicographic
/// order (ascending total degree, lexicographically descending within a
/// degree class). The all-zeros index comes first.
std::vector<MultiIndex> total_degree_indices(int d, int p);

/// Binomial basis count (p+d)!/(p! d!); throws ConfigError on overflow.
std::uint64_t total_degree_count(int d, int p);

/// Normalized univariate polynomial value: Legendre scaled by sqrt(2k+1) so
/// that E[psi_k^2] = 1 under U[-1,1]; probabilists' Hermite scaled by
/// 1/sqrt(k!) for the standard normal. Legendre requires |x| <= 1.
double eval_poly_1d(PolyFamily family, int degree, double x);

class PcBasis {
 public:
  PcBasis(int dimension, int order, PolyFamily family);

  int dimension() const { return dimension_; }
  int order() const { return order_; }
  PolyFamily family() const { return family_; }
  int size() const { return static_cast<int>(indices_.size()); }
  const std::vector<MultiIndex>& indices() const { return indices_; }

  double eval(const MultiIndex& index, Eigen::Ref<const Eigen::VectorXd> xi) const;
  double eval(int term, Eigen::Ref<const Eigen::VectorXd> xi) const;

 private:
  int dimension_;
  int order_;
  PolyFamily family_;
  std::vector<MultiIndex> indices_;
};

/// P x N matrix with entry (j, i) = psi_j(xi_i); `samples` is N x d with one
/// realization per row, coordinates in the canonical domain.
Eigen::MatrixXd measurement_matrix(const PcBasis& basis,
                                   Eigen::Ref<const Eigen::MatrixXd> samples);

}  // namespace bifi
