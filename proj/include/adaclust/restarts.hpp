#pragma once

// Independent restarts on a worker pool. Each restart gets its own seed
// derive_seed(seed, index); the winner is the highest score, ties to the
// lowest index, so the result does not depend on scheduling.

#include <cmath>
#include <cstdint>
#include <exception>
#include <functional>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "adaclust/error.hpp"
#include "adaclust/rng.hpp"

namespace adaclust {

void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& body);

struct RestartRecord {
  std::size_t index = 0;
  bool ok = false;
  double score = 0.0;
  std::string error_kind;
  std::string message;
};

template <class R>
struct RestartRun {
  R best;
  std::size_t best_index = 0;
  std::vector<RestartRecord> records;  // in restart order
  std::size_t failures() const {
    std::size_t n = 0;
    for (const auto& r : records) n += r.ok ? 0 : 1;
    return n;
  }
};

// fit(index, seed) runs one restart; score ranks it (higher is better).
// Library errors skip the restart; when every restart fails the error of the
// lowest-index restart is rethrown.
template <class R>
RestartRun<R> run_restarts(std::size_t restarts, std::uint64_t seed, int threads,
                           const std::function<R(std::size_t, std::uint64_t)>& fit,
                           const std::function<double(const R&)>& score) {
  if (restarts < 1) throw ConfigError("restarts must be at least 1");
  struct Slot {
    std::optional<R> best;
    std::size_t index = 0;
    double score = 0.0;
  };
  std::mutex mu;
  Slot winner;
  std::vector<RestartRecord> records(restarts);
  std::vector<std::exception_ptr> errors(restarts);

  parallel_for(restarts, threads, [&](std::size_t k) {
    RestartRecord rec;
    rec.index = k;
    try {
      R r = fit(k, derive_seed(seed, k));
      const double s = score(r);
      if (std::isnan(s)) throw NonFinite("restart score is NaN");
      rec.ok = true;
      rec.score = s;
      std::lock_guard<std::mutex> lock(mu);
      if (!winner.best || s > winner.score || (s == winner.score && k < winner.index)) {
        winner.best = std::move(r);
        winner.index = k;
        winner.score = s;
      }
    } catch (const Error& e) {
      errors[k] = std::current_exception();
      rec.error_kind = e.kind();
      rec.message = e.what();
    }
    records[k] = std::move(rec);
  });

  if (!winner.best) {
    for (auto& e : errors)
      if (e) std::rethrow_exception(e);
    throw Error("all restarts failed");
  }
  return {std::move(*winner.best), winner.index, std::move(records)};
}

}  // namespace adaclust
