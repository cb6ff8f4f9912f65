#pragma once

#include <cstddef>
#include <vector>

#include "adaclust/matrix.hpp"

namespace adaclust {

struct ContingencyTable {
  // counts(u, v): points with true class u and predicted cluster v, after
  // both labelings are compacted to 0..n-1 in order of first appearance.
  std::vector<std::vector<long>> counts;
  long total = 0;

  static ContingencyTable build(const std::vector<int>& labels_true,
                                const std::vector<int>& labels_pred);
  std::size_t n_true() const { return counts.size(); }
  std::size_t n_pred() const { return counts.empty() ? 0 : counts[0].size(); }
};

// Normalized mutual information, I(U;V) / sqrt(H(U) H(V)), natural logs.
double nmi(const std::vector<int>& labels_true, const std::vector<int>& labels_pred);

// Sum of squared Euclidean distances from each row to its assigned centroid.
double inertia(const Matrix& X, const std::vector<int>& assign, const Matrix& centroids);

// Per-sample quasi-log-likelihood.
inline double per_sample(double quasi_loglik, std::size_t n) {
  return n ? quasi_loglik / static_cast<double>(n) : 0.0;
}

}  // namespace adaclust
