#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "hac/dataset.hpp"
#include "hac/engine.hpp"
#include "hac/min_tracking_map.hpp"
#include "hac/parallel.hpp"

namespace hac {

enum class ClassicalKind { Single, Complete, Average, Centroid, Ward };

inline const char* classical_kind_name(ClassicalKind k) {
  switch (k) {
    case ClassicalKind::Single: return "single";
    case ClassicalKind::Complete: return "complete";
    case ClassicalKind::Average: return "average";
    case ClassicalKind::Centroid: return "centroid";
    case ClassicalKind::Ward: return "ward";
  }
  return "?";
}

namespace detail {

inline std::vector<double> centroid_of(std::span<const std::uint32_t> c,
                                       const Dataset& ds) {
  std::vector<double> mu(ds.d, 0.0);
  for (std::uint32_t p : c) {
    const auto row = ds.row(p);
    for (std::size_t j = 0; j < ds.d; ++j) mu[j] += row[j];
  }
  for (double& v : mu) v /= static_cast<double>(c.size());
  return mu;
}

inline double squared_centroid_gap(std::span<const std::uint32_t> a,
                                   std::span<const std::uint32_t> b,
                                   const Dataset& ds) {
  const auto mu_a = centroid_of(a, ds);
  const auto mu_b = centroid_of(b, ds);
  double acc = 0.0;
  for (std::size_t j = 0; j < ds.d; ++j) {
    const double diff = mu_a[j] - mu_b[j];
    acc += diff * diff;
  }
  return acc;
}

}  // namespace detail

// Direct-definition value of a classical linkage between two point sets.
// Centroid and Ward's are squared-Euclidean quantities internally; with the
// Euclidean base metric the square root is reported, with SquaredEuclidean
// the squared quantity itself.
inline double classical_value(std::span<const std::uint32_t> a,
                              std::span<const std::uint32_t> b,
                              ClassicalKind kind, const Dataset& ds,
                              BaseMetric m) {
  if (a.empty() || b.empty()) throw std::invalid_argument("empty cluster");
  switch (kind) {
    case ClassicalKind::Single:
    case ClassicalKind::Complete:
    case ClassicalKind::Average: {
      bool first = true;
      double best = 0.0;
      double sum = 0.0;
      for (std::uint32_t p : a) {
        for (std::uint32_t q : b) {
          const double v = point_distance(ds, p, q, m);
          sum += v;
          if (first) {
            best = v;
            first = false;
          } else if (kind == ClassicalKind::Single) {
            best = std::min(best, v);
          } else {
            best = std::max(best, v);
          }
        }
      }
      if (kind == ClassicalKind::Average)
        return sum / static_cast<double>(a.size() * b.size());
      return best;
    }
    case ClassicalKind::Centroid: {
      const double sq = detail::squared_centroid_gap(a, b, ds);
      return m == BaseMetric::Euclidean ? std::sqrt(sq) : sq;
    }
    case ClassicalKind::Ward: {
      const double na = static_cast<double>(a.size());
      const double nb = static_cast<double>(b.size());
      const double sq =
          2.0 * na * nb / (na + nb) * detail::squared_centroid_gap(a, b, ds);
      return m == BaseMetric::Euclidean ? std::sqrt(sq) : sq;
    }
  }
  throw std::logic_error("unknown classical kind");
}

// Lance-Williams update in the internal domain (pairwise base-metric values
// for single/complete/average, squared-Euclidean quantities for
// centroid/Ward's).
inline double lance_williams_update(ClassicalKind kind, double d_ac,
                                    double d_bc, double d_ab, double sz_a,
                                    double sz_b, double sz_c) {
  switch (kind) {
    case ClassicalKind::Single:
      return std::min(d_ac, d_bc);
    case ClassicalKind::Complete:
      return std::max(d_ac, d_bc);
    case ClassicalKind::Average:
      return (sz_a * d_ac + sz_b * d_bc) / (sz_a + sz_b);
    case ClassicalKind::Centroid: {
      const double s = sz_a + sz_b;
      return (sz_a * d_ac + sz_b * d_bc) / s - (sz_a * sz_b * d_ab) / (s * s);
    }
    case ClassicalKind::Ward: {
      const double s = sz_a + sz_b + sz_c;
      return ((sz_a + sz_c) * d_ac + (sz_b + sz_c) * d_bc - sz_c * d_ab) / s;
    }
  }
  throw std::logic_error("unknown classical kind");
}

// Baseline linkages in the HAC-NN framework: a full internal distance matrix
// updated by the Lance-Williams recurrence plus a min-tracking map per
// cluster. NN is always re-read from the map minimum, which stays exact even
// for the non-reducible centroid linkage.
class ClassicalBackend {
 public:
  ClassicalBackend(ClassicalKind kind, BaseMetric metric)
      : kind_(kind), metric_(metric) {}

  void init(const Dataset& ds, ClusterState& state, ThreadPool* pool) {
    const std::size_t n = ds.n;
    dists_.assign(n * n, 0.0);
    const BaseMetric internal = internal_metric();
    parallel_for(pool, 0, n, 16, [&](std::size_t pb, std::size_t pe) {
      for (std::size_t p = pb; p < pe; ++p) {
        double* row = dists_.data() + p * n;
        for (std::size_t q = 0; q < n; ++q)
          row[q] = q == p ? 0.0 : point_distance(ds, p, q, internal);
      }
    });
    maps_.assign(n, {});
    for (std::uint32_t u = 0; u < n; ++u) {
      for (std::uint32_t v = 0; v < n; ++v) {
        if (v == u) continue;
        maps_[u].insert_or_assign(v, reported(dists_[u * n + v]));
      }
      if (n > 1) {
        const auto e = maps_[u].min();
        state.nn(u) = {e.id, e.value};
      }
    }
    map_entries_ = n * (n - 1);
    peak_entries_ = n * n + map_entries_;
  }

  void merge(const Dataset& ds, ClusterState& state, const MergeCtx& ctx,
             ThreadPool* pool) {
    (void)ds;
    (void)pool;
    const std::size_t n = state.point_count();
    const double sz_a = static_cast<double>(ctx.size_keep);
    const double sz_b = static_cast<double>(ctx.size_dead);
    const double d_ab =
        dists_[static_cast<std::size_t>(ctx.keep) * n + ctx.dead];

    map_entries_ -= maps_[ctx.keep].size();
    map_entries_ -= maps_[ctx.dead].size();
    maps_[ctx.keep].clear();
    maps_[ctx.dead].clear();

    for (std::uint32_t c = 0; c < n; ++c) {
      if (c == ctx.keep || c == ctx.dead || !state.alive(c)) continue;
      const double d_ac =
          dists_[static_cast<std::size_t>(ctx.keep) * n + c];
      const double d_bc =
          dists_[static_cast<std::size_t>(ctx.dead) * n + c];
      const double updated = lance_williams_update(
          kind_, d_ac, d_bc, d_ab, sz_a, sz_b,
          static_cast<double>(state.size_at(c)));
      dists_[static_cast<std::size_t>(ctx.keep) * n + c] = updated;
      dists_[static_cast<std::size_t>(c) * n + ctx.keep] = updated;
      const double rep = reported(updated);
      map_entries_ -= maps_[c].erase(ctx.id_keep) ? 1 : 0;
      map_entries_ -= maps_[c].erase(ctx.id_dead) ? 1 : 0;
      maps_[c].insert_or_assign(ctx.new_id, rep);
      maps_[ctx.keep].insert_or_assign(state.id_at(c), rep);
      map_entries_ += 2;
    }

    for (std::uint32_t s = 0; s < n; ++s) {
      if (s == ctx.dead || !state.alive(s)) continue;
      if (maps_[s].empty()) continue;
      const auto e = maps_[s].min();
      state.nn(s) = {e.id, e.value};
    }
    peak_entries_ = std::max(peak_entries_, n * n + map_entries_);
  }

  // Reported linkage value between two live slots.
  double linkage_value(const ClusterState& state, std::uint32_t u,
                       std::uint32_t v) const {
    return reported(dists_[u * state.point_count() + v]);
  }

  double selection_value(const ClusterState& state, std::uint32_t slot) const {
    return state.nn(slot).value;
  }

  ClassicalKind kind() const { return kind_; }
  BaseMetric metric() const { return metric_; }
  std::size_t peak_entries() const { return peak_entries_; }

 private:
  BaseMetric internal_metric() const {
    if (kind_ == ClassicalKind::Centroid || kind_ == ClassicalKind::Ward)
      return BaseMetric::SquaredEuclidean;
    return metric_;
  }

  double reported(double internal) const {
    const bool squared_internally =
        kind_ == ClassicalKind::Centroid || kind_ == ClassicalKind::Ward;
    if (squared_internally && metric_ == BaseMetric::Euclidean)
      return std::sqrt(std::max(0.0, internal));  // cancellation can dip below 0
    return internal;
  }

  ClassicalKind kind_;
  BaseMetric metric_;
  std::vector<double> dists_;
  std::vector<MinTrackingMap> maps_;
  std::size_t map_entries_ = 0;
  std::size_t peak_entries_ = 0;
};

}  // namespace hac
