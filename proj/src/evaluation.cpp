#include "adaclust/evaluation.hpp"

#include <cmath>
#include <map>
#include <string>

#include "adaclust/error.hpp"
#include "adaclust/simd.hpp"

namespace adaclust {
namespace {

std::vector<int> compact(const std::vector<int>& labels, std::size_t& n_classes) {
  std::map<int, int> ids;
  std::vector<int> out(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    auto [it, inserted] = ids.try_emplace(labels[i], static_cast<int>(ids.size()));
    out[i] = it->second;
  }
  n_classes = ids.size();
  return out;
}

double entropy(const std::vector<long>& counts, long total) {
  double h = 0.0;
  for (long c : counts)
    if (c > 0) {
      const double p = static_cast<double>(c) / total;
      h -= p * std::log(p);
    }
  return h;
}

}  // namespace

ContingencyTable ContingencyTable::build(const std::vector<int>& labels_true,
                                         const std::vector<int>& labels_pred) {
  if (labels_true.size() != labels_pred.size())
    throw LengthMismatch("label vectors differ in length: " + std::to_string(labels_true.size()) +
                         " vs " + std::to_string(labels_pred.size()));
  std::size_t nu = 0, nv = 0;
  const auto u = compact(labels_true, nu);
  const auto v = compact(labels_pred, nv);
  ContingencyTable t;
  t.counts.assign(nu, std::vector<long>(nv, 0));
  for (std::size_t i = 0; i < u.size(); ++i) ++t.counts[u[i]][v[i]];
  t.total = static_cast<long>(u.size());
  return t;
}

double nmi(const std::vector<int>& labels_true, const std::vector<int>& labels_pred) {
  const auto t = ContingencyTable::build(labels_true, labels_pred);
  if (t.total == 0) throw LengthMismatch("empty labelings");
  if (t.n_true() == 1 && t.n_pred() == 1) return 1.0;

  std::vector<long> row(t.n_true(), 0), col(t.n_pred(), 0);
  for (std::size_t a = 0; a < t.n_true(); ++a)
    for (std::size_t b = 0; b < t.n_pred(); ++b) {
      row[a] += t.counts[a][b];
      col[b] += t.counts[a][b];
    }
  const double hu = entropy(row, t.total), hv = entropy(col, t.total);
  if (hu <= 0.0 || hv <= 0.0) return 0.0;

  const double n = static_cast<double>(t.total);
  double mi = 0.0;
  for (std::size_t a = 0; a < t.n_true(); ++a)
    for (std::size_t b = 0; b < t.n_pred(); ++b) {
      const long c = t.counts[a][b];
      if (c == 0) continue;
      mi += (c / n) * std::log(c * n / (static_cast<double>(row[a]) * col[b]));
    }
  const double v = mi / std::sqrt(hu * hv);
  return std::min(1.0, std::max(0.0, v));
}

double inertia(const Matrix& X, const std::vector<int>& assign, const Matrix& centroids) {
  if (assign.size() != X.rows()) throw LengthMismatch("assignment length differs from row count");
  double s = 0.0;
  for (std::size_t i = 0; i < X.rows(); ++i)
    s += simd::squared_distance(X.row(i), centroids.row(static_cast<std::size_t>(assign[i])));
  return s;
}

}  // namespace adaclust
