#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <queue>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace hac {

// One merge step. `left` is the id of the cluster whose storage slot the
// merged cluster inherits, `right` the id of the retired slot. `cost` is the
// linkage value of the pair at merge time, `size` the merged point count.
struct MergeRecord {
  std::uint32_t left = 0;
  std::uint32_t right = 0;
  double cost = 0.0;
  std::uint32_t size = 0;

  friend bool operator==(const MergeRecord&, const MergeRecord&) = default;
};

// Full HAC output. Leaves are ids 0..n-1; the i-th merge (0-based) creates
// id n+i. Every id except the final root appears exactly once as a child.
struct Dendrogram {
  std::uint32_t n = 0;
  std::vector<MergeRecord> merges;

  std::uint32_t num_nodes() const { return 2 * n - 1; }
  bool is_leaf(std::uint32_t id) const { return id < n; }

  friend bool operator==(const Dendrogram&, const Dendrogram&) = default;
};

inline void validate(const Dendrogram& dg) {
  if (dg.n < 1) throw std::invalid_argument("dendrogram requires n >= 1");
  if (dg.merges.size() + 1 != dg.n)
    throw std::invalid_argument("dendrogram must contain exactly n-1 merges");
  std::vector<std::uint32_t> child_uses(dg.num_nodes(), 0);
  std::vector<std::uint64_t> size(dg.num_nodes(), 1);
  for (std::size_t i = 0; i < dg.merges.size(); ++i) {
    const MergeRecord& m = dg.merges[i];
    const std::uint32_t created = dg.n + static_cast<std::uint32_t>(i);
    if (m.left == m.right)
      throw std::invalid_argument("merge " + std::to_string(i) +
                                  ": identical children");
    if (m.left >= created || m.right >= created)
      throw std::invalid_argument("merge " + std::to_string(i) +
                                  ": child id not yet created");
    if (++child_uses[m.left] > 1 || ++child_uses[m.right] > 1)
      throw std::invalid_argument("merge " + std::to_string(i) +
                                  ": child already consumed");
    size[created] = size[m.left] + size[m.right];
    if (size[created] != m.size)
      throw std::invalid_argument("merge " + std::to_string(i) +
                                  ": size does not equal child size sum");
  }
}

// Edge count of the longest root-to-leaf path; a single leaf has height 0.
inline std::size_t height(const Dendrogram& dg) {
  if (dg.merges.empty()) return 0;
  std::vector<std::uint32_t> h(dg.num_nodes(), 0);
  std::uint32_t next = dg.n;
  for (const MergeRecord& m : dg.merges) {
    h[next] = 1 + std::max(h[m.left], h[m.right]);
    ++next;
  }
  return h[next - 1];
}

// Per-method mean, over datasets, of height / geometric-mean-of-heights.
inline std::map<std::string, double> balance_score(
    const std::vector<std::map<std::string, std::uint64_t>>& heights_by_dataset) {
  if (heights_by_dataset.empty())
    throw std::invalid_argument("balance_score requires at least one dataset");
  std::map<std::string, double> acc;
  for (const auto& table : heights_by_dataset) {
    if (table.size() < 2)
      throw std::invalid_argument("balance_score requires at least two methods");
    if (table.size() != heights_by_dataset.front().size())
      throw std::invalid_argument("balance_score methods differ across datasets");
    double log_sum = 0.0;
    for (const auto& [method, h] : table) {
      if (h < 1)
        throw std::invalid_argument("balance_score requires heights >= 1");
      log_sum += std::log(static_cast<double>(h));
    }
    const double geomean = std::exp(log_sum / static_cast<double>(table.size()));
    for (const auto& [method, h] : table)
      acc[method] += static_cast<double>(h) / geomean;
  }
  if (acc.size() != heights_by_dataset.front().size())
    throw std::invalid_argument("balance_score methods differ across datasets");
  for (auto& [method, sum] : acc)
    sum /= static_cast<double>(heights_by_dataset.size());
  return acc;
}

struct MonotonicCosts {
  std::vector<double> values;  // subtree cost sums, one per merge
  bool negative_cost_warning = false;
};

// Replaces each merge cost by the sum of costs over its merge subtree, which
// is non-decreasing toward the root whenever all costs are non-negative.
inline MonotonicCosts monotonicize(const Dendrogram& dg) {
  MonotonicCosts out;
  out.values.resize(dg.merges.size(), 0.0);
  for (std::size_t i = 0; i < dg.merges.size(); ++i) {
    const MergeRecord& m = dg.merges[i];
    if (m.cost < 0.0) out.negative_cost_warning = true;
    double v = m.cost;
    if (!dg.is_leaf(m.left)) v += out.values[m.left - dg.n];
    if (!dg.is_leaf(m.right)) v += out.values[m.right - dg.n];
    out.values[i] = v;
  }
  return out;
}

// Exposure orders over internal nodes. Both yield each of the n-1 internal
// node ids exactly once; an internal node is only yielded after both its
// children (leaves count as exposed from the start).

class MergeOrderTraversal {
 public:
  explicit MergeOrderTraversal(const Dendrogram& dg) : dg_(&dg) {}

  bool has_next() const { return next_ < dg_->merges.size(); }
  std::uint32_t next() { return dg_->n + next_++; }

 private:
  const Dendrogram* dg_;
  std::size_t next_ = 0;
};

// Greedy smallest-cost-first exposure; ties broken toward the merge created
// earlier (lower id).
class LeastAvailableTraversal {
 public:
  LeastAvailableTraversal(const Dendrogram& dg, std::span<const double> costs)
      : dg_(&dg), costs_(costs.begin(), costs.end()) {
    if (costs.size() != dg.merges.size())
      throw std::invalid_argument("cost count must equal merge count");
    parent_.assign(dg.num_nodes(), kNoParent);
    waiting_.assign(dg.merges.size(), 0);
    for (std::size_t i = 0; i < dg.merges.size(); ++i) {
      const MergeRecord& m = dg.merges[i];
      parent_[m.left] = static_cast<std::uint32_t>(i);
      parent_[m.right] = static_cast<std::uint32_t>(i);
      if (!dg.is_leaf(m.left)) ++waiting_[i];
      if (!dg.is_leaf(m.right)) ++waiting_[i];
      if (waiting_[i] == 0) push(i);
    }
  }

  bool has_next() const { return !heap_.empty(); }

  std::uint32_t next() {
    const std::size_t i = heap_.top().second;
    heap_.pop();
    const std::uint32_t exposed = dg_->n + static_cast<std::uint32_t>(i);
    const std::uint32_t p = parent_[exposed];
    if (p != kNoParent && --waiting_[p] == 0) push(p);
    return exposed;
  }

 private:
  static constexpr std::uint32_t kNoParent = 0xffffffffu;

  void push(std::size_t i) { heap_.emplace(costs_[i], i); }

  using Item = std::pair<double, std::size_t>;  // (cost, merge index)
  const Dendrogram* dg_;
  std::vector<double> costs_;
  std::vector<std::uint32_t> parent_;
  std::vector<std::uint32_t> waiting_;
  std::priority_queue<Item, std::vector<Item>, std::greater<Item>> heap_;
};

// Lazy sequence of flat clusterings, one per exposed merge. Each step returns
// a label view where labels[p] is the id of the exposed subtree containing p;
// only O(n) state is kept.
template <class Traversal>
class CutSequence {
 public:
  CutSequence(const Dendrogram& dg, Traversal traversal)
      : dg_(&dg), traversal_(std::move(traversal)), labels_(dg.n) {
    members_.resize(dg.num_nodes());
    for (std::uint32_t p = 0; p < dg.n; ++p) {
      labels_[p] = p;
      members_[p] = {p};
    }
  }

  bool has_next() const { return traversal_.has_next(); }

  // Exposes one merge and returns the current labels.
  std::span<const std::uint32_t> next() {
    const std::uint32_t u = traversal_.next();
    const MergeRecord& m = dg_->merges[u - dg_->n];
    std::uint32_t big = m.left, small = m.right;
    if (members_[big].size() < members_[small].size()) std::swap(big, small);
    auto& into = members_[big];
    auto& from = members_[small];
    into.insert(into.end(), from.begin(), from.end());
    from.clear();
    from.shrink_to_fit();
    members_[u] = std::move(into);
    for (std::uint32_t p : members_[u]) labels_[p] = u;
    return labels_;
  }

 private:
  const Dendrogram* dg_;
  Traversal traversal_;
  std::vector<std::uint32_t> labels_;
  std::vector<std::vector<std::uint32_t>> members_;
};

inline CutSequence<MergeOrderTraversal> merge_order_cuts(const Dendrogram& dg) {
  return {dg, MergeOrderTraversal(dg)};
}

inline CutSequence<LeastAvailableTraversal> least_available_cuts(
    const Dendrogram& dg, std::span<const double> costs) {
  return {dg, LeastAvailableTraversal(dg, costs)};
}

}  // namespace hac
