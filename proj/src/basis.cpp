#include "bifi/basis.hpp"

#include <cmath>
#include <limits>

namespace bifi {

namespace {

constexpr double kDomainTol = 1e-12;

void append_compositions(int remaining, int slot, std::vector<int>& current,
                         std::vector<MultiIndex>& out) {
  const int d = static_cast<int>(current.size());
  if (slot == d - 1) {
    current[slot] = remaining;
    out.push_back(MultiIndex{current});
    return;
  }
  // Descending first coordinate gives lexicographically descending order
  // inside each total-degree class.
  for (int k = remaining; k >= 0; --k) {
    current[slot] = k;
    append_compositions(remaining - k, slot + 1, current, out);
  }
}

}  // namespace

PolyFamily poly_family_from_string(const std::string& name) {
  if (name == "legendre" || name == "uniform") return PolyFamily::Legendre;
  if (name == "hermite" || name == "gaussian") return PolyFamily::Hermite;
  throw ConfigError("unknown polynomial family: " + name);
}

std::string to_string(PolyFamily family) {
  return family == PolyFamily::Legendre ? "legendre" : "hermite";
}

std::uint64_t total_degree_count(int d, int p) {
  if (d < 1 || p < 0) throw ConfigError("basis requires d >= 1 and p >= 0");
  std::uint64_t count = 1;
  for (std::uint64_t i = 1; i <= static_cast<std::uint64_t>(d); ++i) {
    const std::uint64_t num = static_cast<std::uint64_t>(p) + i;
    if (count > std::numeric_limits<std::uint64_t>::max() / num) {
      throw ConfigError("basis size (p+d)!/(p!d!) overflows 64-bit count");
    }
    count = count * num / i;  // exact: product of first i terms is divisible by i!
  }
  return count;
}

std::vector<MultiIndex> total_degree_indices(int d, int p) {
  const std::uint64_t count = total_degree_count(d, p);
  if (count > (1ULL << 31)) {
    throw ConfigError("basis size too large to materialize");
  }
  std::vector<MultiIndex> out;
  out.reserve(static_cast<std::size_t>(count));
  std::vector<int> current(static_cast<std::size_t>(d), 0);
  for (int deg = 0; deg <= p; ++deg) {
    append_compositions(deg, 0, current, out);
  }
  return out;
}

double eval_poly_1d(PolyFamily family, int degree, double x) {
  if (degree < 0) throw ConfigError("polynomial degree must be non-negative");
  if (family == PolyFamily::Legendre) {
    if (std::abs(x) > 1.0 + kDomainTol) {
      throw DataError("Legendre evaluation outside canonical domain [-1,1]");
    }
    // Three-term recurrence for P_k, then sqrt(2k+1) normalization.
    if (degree == 0) return 1.0;
    double pm1 = 1.0;
    double pk = x;
    for (int k = 1; k < degree; ++k) {
      const double pk1 = ((2.0 * k + 1.0) * x * pk - k * pm1) / (k + 1.0);
      pm1 = pk;
      pk = pk1;
    }
    return std::sqrt(2.0 * degree + 1.0) * pk;
  }
  // Probabilists' Hermite, recurrence in normalized form h_k = He_k/sqrt(k!):
  // h_{k+1} = (x h_k - sqrt(k) h_{k-1}) / sqrt(k+1).
  if (degree == 0) return 1.0;
  double hm1 = 1.0;
  double hk = x;
  for (int k = 1; k < degree; ++k) {
    const double hk1 = (x * hk - std::sqrt(static_cast<double>(k)) * hm1) /
                       std::sqrt(static_cast<double>(k + 1));
    hm1 = hk;
    hk = hk1;
  }
  return hk;
}

PcBasis::PcBasis(int dimension, int order, PolyFamily family)
    : dimension_(dimension), order_(order), family_(family),
      indices_(total_degree_indices(dimension, order)) {}

double PcBasis::eval(const MultiIndex& index, Eigen::Ref<const Eigen::VectorXd> xi) const {
  if (static_cast<int>(index.degrees.size()) != dimension_ || xi.size() != dimension_) {
    throw DataError("multi-index / sample dimension mismatch");
  }
  double v = 1.0;
  for (int k = 0; k < dimension_; ++k) {
    if (index.degrees[k] > 0) v *= eval_poly_1d(family_, index.degrees[k], xi(k));
    else if (family_ == PolyFamily::Legendre && std::abs(xi(k)) > 1.0 + kDomainTol) {
      throw DataError("Legendre evaluation outside canonical domain [-1,1]");
    }
  }
  return v;
}

double PcBasis::eval(int term, Eigen::Ref<const Eigen::VectorXd> xi) const {
  if (term < 0 || term >= size()) throw DataError("basis term out of range");
  return eval(indices_[static_cast<std::size_t>(term)], xi);
}

Eigen::MatrixXd measurement_matrix(const PcBasis& basis,
                                   Eigen::Ref<const Eigen::MatrixXd> samples) {
  const int d = basis.dimension();
  const int p = basis.order();
  const int n = static_cast<int>(samples.rows());
  if (n > 0 && samples.cols() != d) {
    throw DataError("sample matrix must be N x d");
  }
  const int big_p = basis.size();
  Eigen::MatrixXd psi(big_p, n);
  // Per-sample table of 1d values up to degree p avoids re-running the
  // recurrence for every multi-index.
  Eigen::MatrixXd table(d, p + 1);
  for (int i = 0; i < n; ++i) {
    for (int k = 0; k < d; ++k) {
      for (int deg = 0; deg <= p; ++deg) {
        table(k, deg) = eval_poly_1d(basis.family(), deg, samples(i, k));
      }
    }
    for (int j = 0; j < big_p; ++j) {
      const MultiIndex& idx = basis.indices()[static_cast<std::size_t>(j)];
      double v = 1.0;
      for (int k = 0; k < d; ++k) v *= table(k, idx.degrees[static_cast<std::size_t>(k)]);
      psi(j, i) = v;
    }
  }
  return psi;
}

}  // namespace bifi
