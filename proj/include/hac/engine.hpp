#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <vector>

#include "hac/dataset.hpp"
#include "hac/dendrogram.hpp"
#include "hac/parallel.hpp"

namespace hac {

// Nearest-neighbor entry for an active cluster: the neighbor's id and the
// backend's raw linkage value toward it. NN ties resolve toward the larger
// neighbor id (the latest-created cluster), which lets a merged cluster
// unconditionally replace a consumed neighbor without a rescan.
struct NnEntry {
  std::uint32_t id = 0;
  double value = 0.0;
};

// Live clustering state shared between the engine and a linkage backend.
// Clusters occupy slots 0..n-1; a merge keeps the smaller slot of the pair
// and retires the larger one, so backends can recycle per-slot storage.
class ClusterState {
 public:
  void init(std::size_t n) {
    n_ = n;
    next_id_ = static_cast<std::uint32_t>(n);
    active_ = n;
    ids_.resize(n);
    sizes_.assign(n, 1);
    alive_.assign(n, 1);
    members_.assign(n, {});
    owner_.resize(n);
    nn_.assign(n, {});
    id_to_slot_.assign(2 * n - 1, kInvalidSlot);
    for (std::uint32_t p = 0; p < n; ++p) {
      ids_[p] = p;
      members_[p] = {p};
      owner_[p] = p;
      id_to_slot_[p] = p;
    }
  }

  std::size_t point_count() const { return n_; }
  std::size_t active_count() const { return active_; }
  std::uint32_t next_id() const { return next_id_; }

  bool alive(std::uint32_t slot) const { return alive_[slot] != 0; }
  std::uint32_t id_at(std::uint32_t slot) const { return ids_[slot]; }
  std::uint32_t size_at(std::uint32_t slot) const { return sizes_[slot]; }
  std::uint32_t owner_slot(std::uint32_t point) const { return owner_[point]; }
  std::uint32_t slot_of_id(std::uint32_t id) const { return id_to_slot_[id]; }

  std::span<const std::uint32_t> members(std::uint32_t slot) const {
    return members_[slot];
  }

  NnEntry& nn(std::uint32_t slot) { return nn_[slot]; }
  const NnEntry& nn(std::uint32_t slot) const { return nn_[slot]; }

  // Applies the topology change for merging the clusters at `keep` and
  // `dead` into a new cluster with id `new_id`, stored at `keep`. Member
  // lists stay sorted ascending.
  void merge_slots(std::uint32_t keep, std::uint32_t dead,
                   std::uint32_t new_id) {
    std::vector<std::uint32_t> merged;
    merged.reserve(members_[keep].size() + members_[dead].size());
    std::merge(members_[keep].begin(), members_[keep].end(),
               members_[dead].begin(), members_[dead].end(),
               std::back_inserter(merged));
    members_[keep] = std::move(merged);
    members_[dead].clear();
    members_[dead].shrink_to_fit();
    for (std::uint32_t p : members_[keep]) owner_[p] = keep;
    sizes_[keep] += sizes_[dead];
    alive_[dead] = 0;
    ids_[keep] = new_id;
    id_to_slot_[new_id] = keep;
    ++next_id_;
    --active_;
  }

  std::uint64_t total_active_size() const {
    std::uint64_t s = 0;
    for (std::uint32_t slot = 0; slot < n_; ++slot)
      if (alive_[slot]) s += sizes_[slot];
    return s;
  }

  static constexpr std::uint32_t kInvalidSlot = 0xffffffffu;

 private:
  std::size_t n_ = 0;
  std::size_t active_ = 0;
  std::uint32_t next_id_ = 0;
  std::vector<std::uint32_t> ids_;
  std::vector<std::uint32_t> sizes_;
  std::vector<std::uint8_t> alive_;
  std::vector<std::vector<std::uint32_t>> members_;
  std::vector<std::uint32_t> owner_;
  std::vector<NnEntry> nn_;
  std::vector<std::uint32_t> id_to_slot_;
};

// Pair picked for the next merge: source slot, its nearest neighbor's slot,
// and the selection value recorded as the merge cost.
struct BestPair {
  std::uint32_t slot_a = 0;
  std::uint32_t slot_b = 0;
  double value = 0.0;
};

// Scans every active cluster's stored NN entry and returns the pair
// minimizing the selection value. Ties: smaller value first, then smaller
// source cluster id. view(slot) maps a slot's stored NN entry to the
// comparable selection value (e.g. applies normalization).
template <class ValueView>
BestPair find_global_best(const ClusterState& state, ValueView&& view) {
  if (state.active_count() < 2)
    throw std::invalid_argument("nothing to merge");
  bool found = false;
  double best_value = 0.0;
  std::uint32_t best_id = 0;
  std::uint32_t best_slot = 0;
  for (std::uint32_t slot = 0; slot < state.point_count(); ++slot) {
    if (!state.alive(slot)) continue;
    const double v = view(slot);
    const std::uint32_t id = state.id_at(slot);
    if (!found || v < best_value || (v == best_value && id < best_id)) {
      found = true;
      best_value = v;
      best_id = id;
      best_slot = slot;
    }
  }
  return {best_slot, state.slot_of_id(state.nn(best_slot).id), best_value};
}

// Context handed to a backend's merge step. The state is still pre-merge;
// the engine applies merge_slots afterwards.
struct MergeCtx {
  std::uint32_t keep = 0;      // slot that will hold the merged cluster
  std::uint32_t dead = 0;      // slot being retired
  std::uint32_t id_keep = 0;   // pre-merge id at `keep`
  std::uint32_t id_dead = 0;   // pre-merge id at `dead`
  std::uint32_t new_id = 0;
  std::uint32_t size_keep = 0;
  std::uint32_t size_dead = 0;
};

struct EngineOptions {
  ThreadPool* pool = nullptr;
  // Exhaustive NN rescan after every merge (tests only; quadratic per merge).
  bool check_nn = false;
  // Invoked after each merge with the post-merge state and the record.
  std::function<void(const ClusterState&, const MergeRecord&)> observer;
};

namespace detail {

template <class Backend>
void assert_nn_sound(const ClusterState& state, const Backend& backend) {
  for (std::uint32_t u = 0; u < state.point_count(); ++u) {
    if (!state.alive(u)) continue;
    bool found = false;
    double best = 0.0;
    std::uint32_t best_id = 0;
    for (std::uint32_t v = 0; v < state.point_count(); ++v) {
      if (v == u || !state.alive(v)) continue;
      const double val = backend.linkage_value(state, u, v);
      const std::uint32_t id = state.id_at(v);
      if (!found || val < best || (val == best && id > best_id)) {
        found = true;
        best = val;
        best_id = id;
      }
    }
    if (!found) continue;
    if (state.nn(u).id != best_id || state.nn(u).value != best)
      throw std::logic_error("stored nearest neighbor diverges from rescan");
  }
}

}  // namespace detail

// The HAC-NN loop: repeatedly merge the globally best (cluster, NN) pair,
// delegating distance maintenance to the backend. Deterministic for a fixed
// dataset and backend configuration, independent of worker count.
template <class Backend>
Dendrogram run_hac(const Dataset& ds, Backend& backend,
                   const EngineOptions& opts = {}) {
  validate(ds);
  ClusterState state;
  state.init(ds.n);
  backend.init(ds, state, opts.pool);

  Dendrogram out;
  out.n = static_cast<std::uint32_t>(ds.n);
  out.merges.reserve(ds.n - 1);

  while (state.active_count() > 1) {
    const BestPair best = find_global_best(
        state, [&](std::uint32_t slot) {
          return backend.selection_value(state, slot);
        });
    const std::uint32_t keep = std::min(best.slot_a, best.slot_b);
    const std::uint32_t dead = std::max(best.slot_a, best.slot_b);
    MergeCtx ctx;
    ctx.keep = keep;
    ctx.dead = dead;
    ctx.id_keep = state.id_at(keep);
    ctx.id_dead = state.id_at(dead);
    ctx.new_id = state.next_id();
    ctx.size_keep = state.size_at(keep);
    ctx.size_dead = state.size_at(dead);

    MergeRecord record{ctx.id_keep, ctx.id_dead, best.value,
                       ctx.size_keep + ctx.size_dead};
    backend.merge(ds, state, ctx, opts.pool);
    state.merge_slots(keep, dead, ctx.new_id);
    out.merges.push_back(record);

    if (opts.check_nn && state.active_count() > 1)
      detail::assert_nn_sound(state, backend);
    if (opts.observer) opts.observer(state, record);
  }
  return out;
}

}  // namespace hac
