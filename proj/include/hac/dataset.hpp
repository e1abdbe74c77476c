#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace hac {

enum class BaseMetric { Euclidean, SquaredEuclidean };

inline const char* metric_name(BaseMetric m) {
  return m == BaseMetric::Euclidean ? "euclidean" : "sqeuclidean";
}

// A dense point set. `points` is row-major with n rows of d coordinates.
// Ground-truth labels, when present, hold one non-negative id per point.
struct Dataset {
  std::vector<double> points;
  std::size_t n = 0;
  std::size_t d = 0;
  std::optional<std::vector<std::uint64_t>> labels;
  std::string name;

  std::span<const double> row(std::size_t i) const {
    return {points.data() + i * d, d};
  }
};

// Loader-time validation; per-call paths assume a validated dataset.
inline void validate(const Dataset& ds) {
  if (ds.n < 1 || ds.d < 1)
    throw std::invalid_argument("dataset requires n >= 1 and d >= 1");
  if (ds.points.size() != ds.n * ds.d)
    throw std::invalid_argument("dataset buffer size does not match n * d");
  for (double v : ds.points)
    if (!std::isfinite(v))
      throw std::invalid_argument("dataset contains a non-finite coordinate");
  if (ds.labels && ds.labels->size() != ds.n)
    throw std::invalid_argument("label count differs from point count");
}

inline double point_distance(std::span<const double> p,
                             std::span<const double> q, BaseMetric m) {
  if (p.size() != q.size()) throw std::invalid_argument("dimension mismatch");
  double acc = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double diff = p[i] - q[i];
    acc += diff * diff;
  }
  return m == BaseMetric::Euclidean ? std::sqrt(acc) : acc;
}

inline double point_distance(const Dataset& ds, std::size_t p, std::size_t q,
                             BaseMetric m) {
  return point_distance(ds.row(p), ds.row(q), m);
}

// d(p, C) = min over c in C of d(p, c).
template <typename IndexRange>
double point_to_cluster_distance(std::size_t p, const IndexRange& cluster,
                                 const Dataset& ds, BaseMetric m) {
  bool any = false;
  double best = 0.0;
  for (auto c : cluster) {
    const double v = point_distance(ds, p, static_cast<std::size_t>(c), m);
    if (!any || v < best) best = v;
    any = true;
  }
  if (!any) throw std::invalid_argument("empty cluster");
  return best;
}

}  // namespace hac
