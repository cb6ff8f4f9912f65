#include "adaclust/kmeans.hpp"

#include <algorithm>
#include <limits>
#include <set>
#include <string>

#include "adaclust/error.hpp"
#include "adaclust/evaluation.hpp"
#include "adaclust/simd.hpp"

namespace adaclust {
namespace {

std::size_t count_distinct_rows(const Matrix& X, std::size_t stop_at) {
  std::set<std::vector<double>> seen;
  for (std::size_t i = 0; i < X.rows() && seen.size() < stop_at; ++i) {
    auto r = X.row(i);
    seen.emplace(r.begin(), r.end());
  }
  return seen.size();
}

}  // namespace

Matrix rows_of(const Matrix& X, const std::vector<std::size_t>& idx) {
  Matrix out(idx.size(), X.cols());
  for (std::size_t k = 0; k < idx.size(); ++k) std::ranges::copy(X.row(idx[k]), out.row(k).begin());
  return out;
}

std::vector<std::size_t> kmeans_pp_init(const Matrix& X, std::size_t K, Rng& rng) {
  const std::size_t n = X.rows();
  if (K == 0) throw InitError("k-means++ needs K >= 1");
  if (count_distinct_rows(X, K) < K)
    throw InitError("fewer than K = " + std::to_string(K) + " distinct points");

  std::vector<std::size_t> centers;
  centers.reserve(K);
  centers.push_back(static_cast<std::size_t>(uniform01(rng) * n));
  std::vector<double> d2(n);
  for (std::size_t i = 0; i < n; ++i)
    d2[i] = simd::squared_distance(X.row(i), X.row(centers[0]));

  while (centers.size() < K) {
    double total = 0.0;
    for (double v : d2) total += v;
    const double u = uniform01(rng) * total;
    std::size_t pick = n;
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (d2[i] <= 0.0) continue;
      acc += d2[i];
      pick = i;
      if (acc > u) break;
    }
    centers.push_back(pick);
    for (std::size_t i = 0; i < n; ++i)
      d2[i] = std::min(d2[i], simd::squared_distance(X.row(i), X.row(pick)));
  }
  return centers;
}

std::size_t nearest_centroid(std::span<const double> x, const Matrix& centroids, double* dist2) {
  std::size_t best = 0;
  double bd = std::numeric_limits<double>::infinity();
  for (std::size_t h = 0; h < centroids.rows(); ++h) {
    const double d = simd::squared_distance(x, centroids.row(h));
    if (d < bd) {
      bd = d;
      best = h;
    }
  }
  if (dist2) *dist2 = bd;
  return best;
}

KMeansResult fit_kmeans_from(const Matrix& X, Matrix centroids, int max_iter) {
  const std::size_t n = X.rows(), K = centroids.rows(), J = X.cols();
  KMeansResult res;
  res.assign.assign(n, -1);
  std::vector<double> dist(n);

  for (int it = 0; it < max_iter; ++it) {
    bool changed = false;
    double inertia = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const int h = static_cast<int>(nearest_centroid(X.row(i), centroids, &dist[i]));
      changed |= h != res.assign[i];
      res.assign[i] = h;
      inertia += dist[i];
    }
    res.inertia_trace.push_back(inertia);
    res.iterations = it + 1;
    if (!changed) break;

    Matrix sums(K, J);
    std::vector<std::size_t> counts(K, 0);
    for (std::size_t i = 0; i < n; ++i) {
      simd::axpy(1.0, X.row(i), sums.row(res.assign[i]));
      ++counts[res.assign[i]];
    }
    for (std::size_t h = 0; h < K; ++h) {
      if (counts[h] == 0) {
        // empty cluster: move it onto the point worst served by its centroid
        const auto far = static_cast<std::size_t>(std::ranges::max_element(dist) - dist.begin());
        --counts[res.assign[far]];
        simd::axpy(-1.0, X.row(far), sums.row(res.assign[far]));
        res.assign[far] = static_cast<int>(h);
        counts[h] = 1;
        std::ranges::copy(X.row(far), sums.row(h).begin());
        dist[far] = 0.0;
      }
    }
    for (std::size_t h = 0; h < K; ++h)
      for (std::size_t j = 0; j < J; ++j)
        centroids(h, j) = counts[h] ? sums(h, j) / counts[h] : centroids(h, j);
  }
  res.centroids = std::move(centroids);
  res.inertia = inertia(X, res.assign, res.centroids);
  return res;
}

KMeansResult fit_kmeans(const Matrix& X, std::size_t K, const KMeansConfig& config) {
  Rng rng(config.seed);
  const auto seeds = kmeans_pp_init(X, K, rng);
  return fit_kmeans_from(X, rows_of(X, seeds), config.max_iter);
}

}  // namespace adaclust
