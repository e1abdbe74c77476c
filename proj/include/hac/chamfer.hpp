#pragma once

#include <algorithm>
#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "hac/dataset.hpp"
#include "hac/engine.hpp"
#include "hac/min_tracking_map.hpp"
#include "hac/parallel.hpp"

namespace hac {

enum class ChamferVariant { Plain, Normalized, Symmetric, SymmetricNormalized };

constexpr bool is_symmetric(ChamferVariant v) {
  return v == ChamferVariant::Symmetric ||
         v == ChamferVariant::SymmetricNormalized;
}

constexpr bool is_normalized(ChamferVariant v) {
  return v == ChamferVariant::Normalized ||
         v == ChamferVariant::SymmetricNormalized;
}

inline const char* chamfer_variant_name(ChamferVariant v) {
  switch (v) {
    case ChamferVariant::Plain: return "chamfer";
    case ChamferVariant::Normalized: return "chamfer-n";
    case ChamferVariant::Symmetric: return "chamfer-s";
    case ChamferVariant::SymmetricNormalized: return "chamfer-ns";
  }
  return "?";
}

// Sum over points of `a`, in the given order, of the distance to the nearest
// point of `b`.
inline double chamfer_sum(std::span<const std::uint32_t> a,
                          std::span<const std::uint32_t> b, const Dataset& ds,
                          BaseMetric m) {
  double acc = 0.0;
  for (std::uint32_t p : a) acc += point_to_cluster_distance(p, b, ds, m);
  return acc;
}

// Direct-definition evaluation of a Chamfer variant; used by the oracle and
// tests, never on the merge path.
inline double chamfer_value(std::span<const std::uint32_t> a,
                            std::span<const std::uint32_t> b,
                            ChamferVariant v, const Dataset& ds,
                            BaseMetric m) {
  if (a.empty() || b.empty()) throw std::invalid_argument("empty cluster");
  switch (v) {
    case ChamferVariant::Plain:
      return chamfer_sum(a, b, ds, m);
    case ChamferVariant::Normalized:
      return chamfer_sum(a, b, ds, m) / static_cast<double>(a.size());
    case ChamferVariant::Symmetric:
      return chamfer_sum(a, b, ds, m) + chamfer_sum(b, a, ds, m);
    case ChamferVariant::SymmetricNormalized:
      return chamfer_sum(a, b, ds, m) / static_cast<double>(a.size()) +
             chamfer_sum(b, a, ds, m) / static_cast<double>(b.size());
  }
  throw std::logic_error("unknown chamfer variant");
}

// Optional per-merge verification knobs shared by the Chamfer backends.
// Observation-2 checks compare fresh incoming sums against stored values
// whose summation trees differ, so a small relative slack absorbs
// order-of-summation rounding.
struct ChamferDebug {
  bool check_observation2 = false;
  double observation2_slack = 1e-12;
  std::uint64_t observation2_checks = 0;
  std::uint64_t observation2_violations = 0;
  bool check_store_consistency = false;
  std::uint64_t consistency_pairs_per_merge = 3;
  double store_consistency_worst = 0.0;
  std::mt19937_64 rng{0x9e3779b97f4a7c15ull};
};

// The quadratic-time store: point-to-cluster distances and the ordered-pair
// Chamfer matrix, both indexed by slot. A merge reuses the kept slot's row
// and column; retired slots go stale and are never read.
struct ChamferStore {
  std::size_t n = 0;
  std::vector<double> p2c;  // [point * n + slot]
  std::vector<double> c2c;  // [source slot * n + target slot]

  void init(std::size_t n_points) {
    n = n_points;
    p2c.assign(n * n, 0.0);
    c2c.assign(n * n, 0.0);
  }

  double point_to_cluster(std::size_t p, std::uint32_t slot) const {
    return p2c[p * n + slot];
  }
  double cluster_to_cluster(std::uint32_t src, std::uint32_t dst) const {
    return c2c[src * n + dst];
  }
};

namespace detail {

inline void chamfer_init_pairwise(const Dataset& ds, BaseMetric m,
                                  ChamferStore& store, ClusterState& state,
                                  ThreadPool* pool) {
  const std::size_t n = ds.n;
  parallel_for(pool, 0, n, 16, [&](std::size_t pb, std::size_t pe) {
    for (std::size_t p = pb; p < pe; ++p) {
      double* row = store.p2c.data() + p * n;
      for (std::size_t q = 0; q < n; ++q)
        row[q] = q == p ? 0.0 : point_distance(ds, p, q, m);
    }
  });
  store.c2c = store.p2c;
  parallel_for(pool, 0, n, 64, [&](std::size_t ub, std::size_t ue) {
    for (std::size_t u = ub; u < ue; ++u) {
      const double* row = store.c2c.data() + u * n;
      bool found = false;
      double best = 0.0;
      std::uint32_t best_id = 0;
      for (std::uint32_t v = 0; v < n; ++v) {
        if (v == u) continue;
        if (!found || row[v] < best || (row[v] == best && v > best_id)) {
          found = true;
          best = row[v];
          best_id = v;
        }
      }
      if (found) state.nn(static_cast<std::uint32_t>(u)) = {best_id, best};
    }
  });
}

// Shared raw-store update for one merge (Eq. 1-3): outgoing row by additivity,
// point-to-cluster column by min, incoming values by one aggregation pass in
// ascending point order. Returns nothing; incoming sums land in `scratch`
// and are written into c2c rows. NN entries are NOT touched here.
inline void chamfer_update_raw(const Dataset& ds, ClusterState& state,
                               const MergeCtx& ctx, ChamferStore& store,
                               std::vector<double>& scratch, ThreadPool* pool,
                               ChamferDebug* debug) {
  const std::size_t n = store.n;
  const std::uint32_t keep = ctx.keep;
  const std::uint32_t dead = ctx.dead;

  // Outgoing: Ch(W, C) = Ch(A, C) + Ch(B, C).
  {
    double* row_keep = store.c2c.data() + static_cast<std::size_t>(keep) * n;
    const double* row_dead =
        store.c2c.data() + static_cast<std::size_t>(dead) * n;
    parallel_for(pool, 0, n, 2048, [&](std::size_t b, std::size_t e) {
      for (std::size_t c = b; c < e; ++c) row_keep[c] += row_dead[c];
    });
  }

  // Point-to-cluster: d(p, W) = min(d(p, A), d(p, B)) for points outside W.
  parallel_for(pool, 0, ds.n, 2048, [&](std::size_t pb, std::size_t pe) {
    for (std::size_t p = pb; p < pe; ++p) {
      const std::uint32_t o = state.owner_slot(static_cast<std::uint32_t>(p));
      if (o == keep || o == dead) continue;
      double* row = store.p2c.data() + p * n;
      row[keep] = std::min(row[keep], row[dead]);
    }
  });

  // Incoming: Ch(C, W) = sum over p in C of d(p, W), ascending point order.
  std::fill(scratch.begin(), scratch.end(), 0.0);
  for (std::size_t p = 0; p < ds.n; ++p) {
    const std::uint32_t o = state.owner_slot(static_cast<std::uint32_t>(p));
    if (o == keep || o == dead) continue;
    scratch[o] += store.p2c[p * n + keep];
  }
  for (std::uint32_t c = 0; c < n; ++c) {
    if (c == keep || c == dead || !state.alive(c)) continue;
    double& cell = store.c2c[static_cast<std::size_t>(c) * n + keep];
    if (debug != nullptr && debug->check_observation2) {
      const double old_a = cell;
      const double old_b = store.c2c[static_cast<std::size_t>(c) * n + dead];
      const double bound = std::min(old_a, old_b);
      ++debug->observation2_checks;
      if (scratch[c] > bound + debug->observation2_slack * std::abs(bound))
        ++debug->observation2_violations;
    }
    cell = scratch[c];
  }

  // Members of W never have their d(p, W) read again; keep the invariant
  // d(p, C) exact by storing zero.
  for (std::uint32_t p : state.members(keep)) store.p2c[p * n + keep] = 0.0;
  for (std::uint32_t p : state.members(dead)) store.p2c[p * n + keep] = 0.0;
}

inline void chamfer_check_store(const Dataset& ds, const ClusterState& state,
                                const MergeCtx& ctx, const ChamferStore& store,
                                BaseMetric m, ChamferDebug& debug) {
  std::vector<std::uint32_t> active;
  for (std::uint32_t s = 0; s < store.n; ++s)
    if ((state.alive(s) && s != ctx.dead) || s == ctx.keep) active.push_back(s);
  if (active.size() < 2) return;
  auto members_of = [&](std::uint32_t slot) {
    if (slot == ctx.keep) {
      // Pre-merge state: the merged member list is the two lists combined.
      std::vector<std::uint32_t> m2(state.members(ctx.keep).begin(),
                                    state.members(ctx.keep).end());
      m2.insert(m2.end(), state.members(ctx.dead).begin(),
                state.members(ctx.dead).end());
      std::sort(m2.begin(), m2.end());
      return m2;
    }
    return std::vector<std::uint32_t>(state.members(slot).begin(),
                                      state.members(slot).end());
  };
  for (std::uint64_t i = 0; i < debug.consistency_pairs_per_merge; ++i) {
    const std::uint32_t a = active[debug.rng() % active.size()];
    std::uint32_t b = active[debug.rng() % active.size()];
    if (a == b) continue;
    const auto ma = members_of(a);
    const auto mb = members_of(b);
    const double fresh = chamfer_sum(ma, mb, ds, m);
    const double stored = store.cluster_to_cluster(a, b);
    const double denom = std::max({std::abs(fresh), std::abs(stored), 1e-300});
    debug.store_consistency_worst =
        std::max(debug.store_consistency_worst, std::abs(fresh - stored) / denom);
  }
}

}  // namespace detail

// Exact quadratic-time backend for the asymmetric variants. Nearest
// neighbors follow the two-case update: a cluster whose NN was consumed
// adopts the merged cluster; otherwise the merged cluster wins only if its
// incoming value is at least as small (ties prefer the newer cluster).
class ChamferBackend {
 public:
  ChamferBackend(ChamferVariant variant, BaseMetric metric)
      : variant_(variant), metric_(metric) {
    if (is_symmetric(variant_))
      throw std::invalid_argument(
          "ChamferBackend handles asymmetric variants only");
  }

  void init(const Dataset& ds, ClusterState& state, ThreadPool* pool) {
    store_.init(ds.n);
    scratch_.assign(ds.n, 0.0);
    detail::chamfer_init_pairwise(ds, metric_, store_, state, pool);
    peak_entries_ = 2 * ds.n * ds.n + ds.n;
  }

  void merge(const Dataset& ds, ClusterState& state, const MergeCtx& ctx,
             ThreadPool* pool) {
    detail::chamfer_update_raw(ds, state, ctx, store_, scratch_, pool,
                               &debug);

    const std::size_t n = store_.n;
    const double* row =
        store_.c2c.data() + static_cast<std::size_t>(ctx.keep) * n;
    bool found = false;
    double best = 0.0;
    std::uint32_t best_id = 0;
    for (std::uint32_t c = 0; c < n; ++c) {
      if (c == ctx.keep || c == ctx.dead || !state.alive(c)) continue;
      const std::uint32_t id = state.id_at(c);
      if (!found || row[c] < best || (row[c] == best && id > best_id)) {
        found = true;
        best = row[c];
        best_id = id;
      }
    }
    if (found) state.nn(ctx.keep) = {best_id, best};

    for (std::uint32_t c = 0; c < n; ++c) {
      if (c == ctx.keep || c == ctx.dead || !state.alive(c)) continue;
      const double incoming =
          store_.c2c[static_cast<std::size_t>(c) * n + ctx.keep];
      NnEntry& e = state.nn(c);
      if (e.id == ctx.id_keep || e.id == ctx.id_dead)
        e = {ctx.new_id, incoming};
      else if (incoming <= e.value)
        e = {ctx.new_id, incoming};
    }

    if (debug.check_store_consistency)
      detail::chamfer_check_store(ds, state, ctx, store_, metric_, debug);
  }

  // Raw outgoing Chamfer value; NN entries are stored in the same units.
  double linkage_value(const ClusterState& state, std::uint32_t u,
                       std::uint32_t v) const {
    (void)state;
    return store_.cluster_to_cluster(u, v);
  }

  double selection_value(const ClusterState& state, std::uint32_t slot) const {
    const double raw = state.nn(slot).value;
    return variant_ == ChamferVariant::Normalized
               ? raw / static_cast<double>(state.size_at(slot))
               : raw;
  }

  ChamferVariant variant() const { return variant_; }
  BaseMetric metric() const { return metric_; }
  std::size_t peak_entries() const { return peak_entries_; }
  const ChamferStore& store() const { return store_; }

  ChamferDebug debug;

 private:
  ChamferVariant variant_;
  BaseMetric metric_;
  ChamferStore store_;
  std::vector<double> scratch_;
  std::size_t peak_entries_ = 0;
};

// O(n^2 log n) backend for the symmetric variants. Raw Chamfer values evolve
// exactly as in the quadratic algorithm, but final linkage values live in
// per-cluster min-tracking maps because a cluster's nearest neighbor can
// shift to a third cluster after a merge.
class SymmetricChamferBackend {
 public:
  SymmetricChamferBackend(ChamferVariant variant, BaseMetric metric)
      : variant_(variant), metric_(metric) {
    if (!is_symmetric(variant_))
      throw std::invalid_argument(
          "SymmetricChamferBackend handles symmetric variants only");
  }

  void init(const Dataset& ds, ClusterState& state, ThreadPool* pool) {
    store_.init(ds.n);
    scratch_.assign(ds.n, 0.0);
    detail::chamfer_init_pairwise(ds, metric_, store_, state, pool);
    maps_.assign(ds.n, {});
    const std::size_t n = ds.n;
    for (std::uint32_t u = 0; u < n; ++u) {
      for (std::uint32_t v = 0; v < n; ++v) {
        if (v == u) continue;
        maps_[u].insert_or_assign(v, symmetric_value_for(state, u, v));
      }
      if (n > 1) {
        const auto e = maps_[u].min();
        state.nn(u) = {e.id, e.value};
      }
    }
    map_entries_ = n * (n - 1);
    peak_entries_ = 2 * n * n + n + map_entries_;
  }

  void merge(const Dataset& ds, ClusterState& state, const MergeCtx& ctx,
             ThreadPool* pool) {
    const std::size_t n = store_.n;
    for (std::uint32_t c = 0; c < n; ++c) {
      if (c == ctx.keep || c == ctx.dead || !state.alive(c)) continue;
      map_entries_ -= maps_[c].erase(ctx.id_keep) ? 1 : 0;
      map_entries_ -= maps_[c].erase(ctx.id_dead) ? 1 : 0;
    }
    map_entries_ -= maps_[ctx.keep].size();
    map_entries_ -= maps_[ctx.dead].size();
    maps_[ctx.keep].clear();
    maps_[ctx.dead].clear();

    detail::chamfer_update_raw(ds, state, ctx, store_, scratch_, pool,
                               &debug);

    const std::uint32_t new_size = ctx.size_keep + ctx.size_dead;
    for (std::uint32_t c = 0; c < n; ++c) {
      if (c == ctx.keep || c == ctx.dead || !state.alive(c)) continue;
      const double sym = combined(
          store_.cluster_to_cluster(ctx.keep, c), new_size,
          store_.cluster_to_cluster(c, ctx.keep), state.size_at(c));
      maps_[c].insert_or_assign(ctx.new_id, sym);
      maps_[ctx.keep].insert_or_assign(state.id_at(c), sym);
      map_entries_ += 2;
    }

    for (std::uint32_t s = 0; s < n; ++s) {
      if (s == ctx.dead || !state.alive(s)) continue;
      if (maps_[s].empty()) continue;
      const auto e = maps_[s].min();
      state.nn(s) = {e.id, e.value};
    }

    peak_entries_ = std::max(peak_entries_, 2 * n * n + n + map_entries_);
    if (debug.check_store_consistency)
      detail::chamfer_check_store(ds, state, ctx, store_, metric_, debug);
  }

  // Final symmetric linkage value; identical expression to the map entries.
  double linkage_value(const ClusterState& state, std::uint32_t u,
                       std::uint32_t v) const {
    return symmetric_value_for(state, u, v);
  }

  double selection_value(const ClusterState& state, std::uint32_t slot) const {
    return state.nn(slot).value;
  }

  ChamferVariant variant() const { return variant_; }
  BaseMetric metric() const { return metric_; }
  std::size_t peak_entries() const { return peak_entries_; }
  const ChamferStore& store() const { return store_; }
  const MinTrackingMap& map_at(std::uint32_t slot) const { return maps_[slot]; }

  ChamferDebug debug;

 private:
  double combined(double out_raw, std::uint32_t out_size, double in_raw,
                  std::uint32_t in_size) const {
    if (variant_ == ChamferVariant::Symmetric) return out_raw + in_raw;
    return out_raw / static_cast<double>(out_size) +
           in_raw / static_cast<double>(in_size);
  }

  double symmetric_value_for(const ClusterState& state, std::uint32_t u,
                             std::uint32_t v) const {
    return combined(store_.cluster_to_cluster(u, v), state.size_at(u),
                    store_.cluster_to_cluster(v, u), state.size_at(v));
  }

  ChamferVariant variant_;
  BaseMetric metric_;
  ChamferStore store_;
  std::vector<double> scratch_;
  std::vector<MinTrackingMap> maps_;
  std::size_t map_entries_ = 0;
  std::size_t peak_entries_ = 0;
};

}  // namespace hac
