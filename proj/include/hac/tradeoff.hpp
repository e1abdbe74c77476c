#pragma once

#include <algorithm>
#include <cstdint>
#include <stdexcept>
#include <unordered_map>
#include <utility>
#include <vector>

#include "hac/chamfer.hpp"
#include "hac/dataset.hpp"
#include "hac/engine.hpp"
#include "hac/parallel.hpp"

namespace hac {

// Space-time trade-off configuration: clusters of size >= threshold keep
// their Chamfer row and point-distance column; smaller clusters are rebuilt
// on demand. threshold = 1 degenerates to the full quadratic store.
struct TradeoffConfig {
  std::size_t threshold = 1;
};

// Chamfer backend using O(n^2/t) space and O(n^2 t) time. Produces
// bit-identical output to ChamferBackend: rebuilt rows replay the exact
// floating-point summation history of the full store. A live entry
// Ch(X, C) was last written either when C was created (a left fold of
// d(p, C) over X's members in ascending point order) or when X was created
// (the sum of X's children's entries), so the replay recurses through X's
// merge tree and switches to the member fold at nodes older than C.
class TradeoffChamferBackend {
 public:
  TradeoffChamferBackend(ChamferVariant variant, BaseMetric metric,
                         TradeoffConfig cfg)
      : variant_(variant), metric_(metric), cfg_(cfg) {
    if (is_symmetric(variant_))
      throw std::invalid_argument(
          "tradeoff unsupported for symmetric variants");
    if (cfg_.threshold < 1)
      throw std::invalid_argument("tradeoff threshold must be >= 1");
  }

  void init(const Dataset& ds, ClusterState& state, ThreadPool* pool) {
    n_ = ds.n;
    dataset_ = &ds;
    rows_.assign(n_, {});
    cols_.assign(n_, {});
    children_.assign(n_ > 0 ? n_ - 1 : 0, {0, 0});
    scratch_.assign(n_, 0.0);
    live_entries_ = 0;
    peak_entries_ = 0;

    const bool store_singletons = cfg_.threshold <= 1;
    if (store_singletons) {
      for (std::uint32_t s = 0; s < n_; ++s) {
        rows_[s].assign(n_, 0.0);
        cols_[s].assign(n_, 0.0);
      }
      live_entries_ = 2 * n_ * n_;
    }
    parallel_for(pool, 0, n_, 16, [&](std::size_t pb, std::size_t pe) {
      std::vector<double> row(n_, 0.0);
      for (std::size_t p = pb; p < pe; ++p) {
        row[p] = 0.0;
        bool found = false;
        double best = 0.0;
        std::uint32_t best_id = 0;
        for (std::uint32_t q = 0; q < n_; ++q) {
          if (q == p) continue;
          const double d = point_distance(ds, p, q, metric_);
          row[q] = d;
          if (!found || d < best || (d == best && q > best_id)) {
            found = true;
            best = d;
            best_id = q;
          }
        }
        if (found) state.nn(static_cast<std::uint32_t>(p)) = {best_id, best};
        if (store_singletons) {
          rows_[p] = row;
          for (std::uint32_t q = 0; q < n_; ++q)
            cols_[q][p] = q == p ? 0.0 : row[q];
        }
      }
    });
    note_peak(2 * n_);
  }

  void merge(const Dataset& ds, ClusterState& state, const MergeCtx& ctx,
             ThreadPool* pool) {
    const std::uint32_t keep = ctx.keep;
    const std::uint32_t dead = ctx.dead;
    const bool large_a = !rows_[keep].empty();
    const bool large_b = !rows_[dead].empty();
    const std::uint32_t new_size = ctx.size_keep + ctx.size_dead;
    const bool new_large = new_size >= cfg_.threshold;

    children_[ctx.new_id - n_] = {ctx.id_keep, ctx.id_dead};

    // Outgoing row of the merged cluster.
    std::vector<double> row_buf_a, row_buf_b;
    if (!large_a) {
      row_buf_a.assign(n_, 0.0);
      rebuild_row(ds, state, ctx, keep, ctx.id_keep, row_buf_a, pool);
    }
    if (!large_b) {
      row_buf_b.assign(n_, 0.0);
      rebuild_row(ds, state, ctx, dead, ctx.id_dead, row_buf_b, pool);
    }
    const double* row_a = large_a ? rows_[keep].data() : row_buf_a.data();
    const double* row_b = large_b ? rows_[dead].data() : row_buf_b.data();

    std::vector<double> row_new(n_, 0.0);
    bool found = false;
    double best = 0.0;
    std::uint32_t best_id = 0;
    for (std::uint32_t c = 0; c < n_; ++c) {
      if (c == keep || c == dead || !state.alive(c)) continue;
      row_new[c] = row_a[c] + row_b[c];
      const std::uint32_t id = state.id_at(c);
      if (!found || row_new[c] < best || (row_new[c] == best && id > best_id)) {
        found = true;
        best = row_new[c];
        best_id = id;
      }
    }
    if (found) state.nn(keep) = {best_id, best};

    // Point distances to the merged cluster.
    std::vector<double> col_buf_a, col_buf_b;
    if (!large_a) {
      col_buf_a.assign(ds.n, 0.0);
      rebuild_col(ds, state, keep, dead, keep, col_buf_a, pool);
    }
    if (!large_b) {
      col_buf_b.assign(ds.n, 0.0);
      rebuild_col(ds, state, keep, dead, dead, col_buf_b, pool);
    }
    const double* col_a = large_a ? cols_[keep].data() : col_buf_a.data();
    const double* col_b = large_b ? cols_[dead].data() : col_buf_b.data();

    std::vector<double> col_new(ds.n, 0.0);
    parallel_for(pool, 0, ds.n, 2048, [&](std::size_t pb, std::size_t pe) {
      for (std::size_t p = pb; p < pe; ++p) {
        const std::uint32_t o =
            state.owner_slot(static_cast<std::uint32_t>(p));
        if (o == keep || o == dead) continue;
        col_new[p] = std::min(col_a[p], col_b[p]);
      }
    });

    // Incoming values, ascending point order, then the NN two-case update.
    std::fill(scratch_.begin(), scratch_.end(), 0.0);
    for (std::size_t p = 0; p < ds.n; ++p) {
      const std::uint32_t o = state.owner_slot(static_cast<std::uint32_t>(p));
      if (o == keep || o == dead) continue;
      scratch_[o] += col_new[p];
    }
    for (std::uint32_t c = 0; c < n_; ++c) {
      if (c == keep || c == dead || !state.alive(c)) continue;
      const double incoming = scratch_[c];
      if (!rows_[c].empty()) rows_[c][keep] = incoming;
      NnEntry& e = state.nn(c);
      if (e.id == ctx.id_keep || e.id == ctx.id_dead)
        e = {ctx.new_id, incoming};
      else if (incoming <= e.value)
        e = {ctx.new_id, incoming};
    }

    // Storage bookkeeping: materialize the merged cluster iff large, retire
    // the consumed clusters' storage.
    note_peak(2 * n_ + row_new.size() + col_new.size() +
              row_buf_a.size() + row_buf_b.size() + col_buf_a.size() +
              col_buf_b.size());
    if (large_a) release(rows_[keep]);
    if (large_b) release(rows_[dead]);
    if (large_a) release(cols_[keep]);
    if (large_b) release(cols_[dead]);
    if (new_large) {
      rows_[keep] = std::move(row_new);
      cols_[keep] = std::move(col_new);
      live_entries_ += rows_[keep].size() + cols_[keep].size();
    }
    note_peak(2 * n_);
  }

  double linkage_value(const ClusterState& state, std::uint32_t u,
                       std::uint32_t v) const {
    if (!rows_[u].empty()) return rows_[u][v];
    // Debug-only path: replay the value the full store would hold.
    LeafMemo leaves;
    fill_leaves(state.id_at(u), leaves);
    return replay_value(state, state.id_at(u), v, state.id_at(v), leaves);
  }

  double selection_value(const ClusterState& state, std::uint32_t slot) const {
    const double raw = state.nn(slot).value;
    return variant_ == ChamferVariant::Normalized
               ? raw / static_cast<double>(state.size_at(slot))
               : raw;
  }

  ChamferVariant variant() const { return variant_; }
  BaseMetric metric() const { return metric_; }
  const TradeoffConfig& config() const { return cfg_; }
  std::size_t live_entries() const { return live_entries_; }
  std::size_t peak_entries() const { return peak_entries_; }
  bool stores_row(std::uint32_t slot) const { return !rows_[slot].empty(); }
  double stored_row_value(std::uint32_t slot, std::uint32_t target) const {
    return rows_[slot][target];
  }
  double stored_col_value(std::uint32_t slot, std::size_t point) const {
    return cols_[slot][point];
  }

 private:
  void release(std::vector<double>& v) {
    live_entries_ -= v.size();
    v.clear();
    v.shrink_to_fit();
  }

  void note_peak(std::size_t transient) {
    peak_entries_ = std::max(peak_entries_, live_entries_ + transient);
  }

  // d(p, C) for the cluster at `slot`: stored column if materialized, else
  // an exact min over the member list.
  double point_to_slot(const Dataset& ds, const ClusterState& state,
                       std::size_t p, std::uint32_t slot) const {
    if (!cols_[slot].empty()) return cols_[slot][p];
    double best = 0.0;
    bool first = true;
    for (std::uint32_t q : state.members(slot)) {
      const double d = point_distance(ds, p, q, metric_);
      if (first || d < best) best = d;
      first = false;
    }
    return best;
  }

  using LeafMemo =
      std::unordered_map<std::uint32_t, std::vector<std::uint32_t>>;

  // Sorted leaf list per subtree node, filled bottom-up without recursion.
  void fill_leaves(std::uint32_t root, LeafMemo& memo) const {
    std::vector<std::pair<std::uint32_t, bool>> todo{{root, false}};
    while (!todo.empty()) {
      const auto [node, expanded] = todo.back();
      todo.pop_back();
      if (memo.count(node)) continue;
      if (node < n_) {
        memo.emplace(node, std::vector{node});
        continue;
      }
      const auto [l, r] = children_[node - n_];
      if (!expanded) {
        todo.emplace_back(node, true);
        todo.emplace_back(r, false);
        todo.emplace_back(l, false);
        continue;
      }
      const auto& ll = memo.at(l);
      const auto& rr = memo.at(r);
      std::vector<std::uint32_t> merged;
      merged.reserve(ll.size() + rr.size());
      std::merge(ll.begin(), ll.end(), rr.begin(), rr.end(),
                 std::back_inserter(merged));
      memo.emplace(node, std::move(merged));
    }
  }

  // The value the full quadratic store would hold in Ch(root_id, target).
  double replay_value(const ClusterState& state, std::uint32_t root_id,
                      std::uint32_t target_slot, std::uint32_t target_id,
                      const LeafMemo& memo) const {
    const Dataset& ds = *dataset_;
    std::vector<std::pair<std::uint32_t, bool>> todo{{root_id, false}};
    std::vector<double> vals;
    while (!todo.empty()) {
      const auto [node, combine] = todo.back();
      todo.pop_back();
      if (combine) {
        const double r = vals.back();
        vals.pop_back();
        const double l = vals.back();
        vals.pop_back();
        vals.push_back(l + r);
        continue;
      }
      if (node < n_ || node < target_id) {
        double acc = 0.0;
        for (std::uint32_t p : memo.at(node))
          acc += point_to_slot(ds, state, p, target_slot);
        vals.push_back(acc);
        continue;
      }
      const auto [l, r] = children_[node - n_];
      todo.emplace_back(node, true);
      todo.emplace_back(r, false);
      todo.emplace_back(l, false);
    }
    return vals.back();
  }

  // Fills, for every active target slot, the value the full store would hold
  // in the given small cluster's outgoing row.
  void rebuild_row(const Dataset& ds, const ClusterState& state,
                   const MergeCtx& ctx, std::uint32_t slot, std::uint32_t id,
                   std::vector<double>& out, ThreadPool* pool) {
    (void)slot;
    dataset_ = &ds;
    LeafMemo memo;
    fill_leaves(id, memo);  // read-only from here on
    parallel_for(pool, 0, n_, 64, [&](std::size_t cb, std::size_t ce) {
      for (std::size_t c = cb; c < ce; ++c) {
        if (c == ctx.keep || c == ctx.dead || !state.alive(c)) continue;
        out[c] = replay_value(state, id, static_cast<std::uint32_t>(c),
                              state.id_at(static_cast<std::uint32_t>(c)),
                              memo);
      }
    });
  }

  // Exact d(p, cluster) for every point outside the merging pair.
  void rebuild_col(const Dataset& ds, const ClusterState& state,
                   std::uint32_t keep, std::uint32_t dead, std::uint32_t slot,
                   std::vector<double>& out, ThreadPool* pool) {
    dataset_ = &ds;
    parallel_for(pool, 0, ds.n, 256, [&](std::size_t pb, std::size_t pe) {
      for (std::size_t p = pb; p < pe; ++p) {
        const std::uint32_t o =
            state.owner_slot(static_cast<std::uint32_t>(p));
        if (o == keep || o == dead) continue;
        out[p] = point_to_slot(ds, state, p, slot);
      }
    });
  }

  ChamferVariant variant_;
  BaseMetric metric_;
  TradeoffConfig cfg_;
  std::size_t n_ = 0;
  const Dataset* dataset_ = nullptr;
  std::vector<std::vector<double>> rows_;
  std::vector<std::vector<double>> cols_;
  std::vector<std::pair<std::uint32_t, std::uint32_t>> children_;
  std::vector<double> scratch_;
  std::size_t live_entries_ = 0;
  std::size_t peak_entries_ = 0;
};

}  // namespace hac
