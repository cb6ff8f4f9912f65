#pragma once

#include <cstdint>
#include <vector>

#include "adaclust/matrix.hpp"
#include "adaclust/rng.hpp"

namespace adaclust {

// D^2 seeding. Returns K row indices of X. Throws InitError when X has fewer
// than K distinct rows.
std::vector<std::size_t> kmeans_pp_init(const Matrix& X, std::size_t K, Rng& rng);

Matrix rows_of(const Matrix& X, const std::vector<std::size_t>& idx);

// Index of the nearest centroid (squared Euclidean), lowest index on ties.
std::size_t nearest_centroid(std::span<const double> x, const Matrix& centroids,
                             double* dist2 = nullptr);

struct KMeansConfig {
  int max_iter = 1000;
  std::uint64_t seed = 0;
};

struct KMeansResult {
  std::vector<int> assign;
  Matrix centroids;
  double inertia = 0.0;
  std::vector<double> inertia_trace;
  int iterations = 0;
};

// Lloyd iterations from k-means++ seeds until the partition is stable.
KMeansResult fit_kmeans(const Matrix& X, std::size_t K, const KMeansConfig& config);
KMeansResult fit_kmeans_from(const Matrix& X, Matrix centroids, int max_iter);

}  // namespace adaclust
