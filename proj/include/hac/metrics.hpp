#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "hac/dendrogram.hpp"

namespace hac {

enum class Metric { Ari, Nmi, Ami, Fmi };

inline const char* metric_label(Metric m) {
  switch (m) {
    case Metric::Ari: return "ari";
    case Metric::Nmi: return "nmi";
    case Metric::Ami: return "ami";
    case Metric::Fmi: return "fmi";
  }
  return "?";
}

inline std::optional<Metric> parse_metric(const std::string& s) {
  if (s == "ari") return Metric::Ari;
  if (s == "nmi") return Metric::Nmi;
  if (s == "ami") return Metric::Ami;
  if (s == "fmi") return Metric::Fmi;
  return std::nullopt;
}

namespace metrics_detail {

inline double plogp(double x) { return x > 0.0 ? x * std::log(x) : 0.0; }
inline double pairs2(double x) { return x * (x - 1.0) / 2.0; }

// Sufficient statistics of a contingency table between a clustering (rows)
// and ground-truth classes (columns). Pair counts are integers held exactly
// in doubles; the entropy sums are the only inexact quantities.
struct TableStats {
  double n = 0;        // points
  double s_ij = 0;     // sum of C(n_ij, 2) over cells
  double s_a = 0;      // sum of C(a_i, 2) over clustering marginals
  double s_b = 0;      // sum of C(b_j, 2) over truth marginals
  double m_cells = 0;  // sum of n_ij ln n_ij
  double a_rows = 0;   // sum of a_i ln a_i
  double b_cols = 0;   // sum of b_j ln b_j
};

inline bool partitions_equal(const TableStats& t) {
  return t.s_ij == t.s_a && t.s_ij == t.s_b;
}

inline double ari_from(const TableStats& t) {
  const double pairs = pairs2(t.n);
  // 2*(P*Index - Sa*Sb) / (P*(Sa+Sb) - 2*Sa*Sb): exact for integral stats.
  const double num = 2.0 * (pairs * t.s_ij - t.s_a * t.s_b);
  const double den = pairs * (t.s_a + t.s_b) - 2.0 * t.s_a * t.s_b;
  if (den == 0.0) return partitions_equal(t) ? 1.0 : 0.0;
  return num / den;
}

inline double entropy_clustering(const TableStats& t) {
  return std::log(t.n) - t.a_rows / t.n;
}
inline double entropy_truth(const TableStats& t) {
  return std::log(t.n) - t.b_cols / t.n;
}
inline double mutual_information(const TableStats& t) {
  return std::log(t.n) + t.m_cells / t.n - t.a_rows / t.n - t.b_cols / t.n;
}

// Arithmetic-mean normalization; two single-cluster partitions score 1.
// Equal partitions score exactly 1 (detected from the integer pair counts,
// which sidesteps entropy rounding).
inline double nmi_from(const TableStats& t) {
  if (partitions_equal(t)) return 1.0;
  const double hu = entropy_clustering(t);
  const double hv = entropy_truth(t);
  if (hu + hv <= 0.0) return 1.0;
  const double v = mutual_information(t) / (0.5 * (hu + hv));
  return std::clamp(v, 0.0, 1.0);
}

inline double fmi_from(const TableStats& t) {
  if (t.s_a == 0.0 || t.s_b == 0.0) return 0.0;
  return t.s_ij / std::sqrt(t.s_a * t.s_b);
}

// Expected mutual information under the permutation model. `row_size` and
// `col_size` are the marginals; lg_fact[k] = ln(k!).
inline double expected_mutual_information(const TableStats& t,
                                          std::span<const double> row_size,
                                          std::span<const double> col_size,
                                          std::span<const double> lg_fact) {
  const double n = t.n;
  double emi = 0.0;
  for (double a_i : row_size) {
    for (double b_j : col_size) {
      const double lo = std::max(1.0, a_i + b_j - n);
      const double hi = std::min(a_i, b_j);
      for (double nij = lo; nij <= hi; ++nij) {
        const double log_term = std::log((n * nij) / (a_i * b_j));
        const double log_prob =
            lg_fact[static_cast<std::size_t>(a_i)] +
            lg_fact[static_cast<std::size_t>(b_j)] +
            lg_fact[static_cast<std::size_t>(n - a_i)] +
            lg_fact[static_cast<std::size_t>(n - b_j)] -
            lg_fact[static_cast<std::size_t>(n)] -
            lg_fact[static_cast<std::size_t>(nij)] -
            lg_fact[static_cast<std::size_t>(a_i - nij)] -
            lg_fact[static_cast<std::size_t>(b_j - nij)] -
            lg_fact[static_cast<std::size_t>(n - a_i - b_j + nij)];
        emi += (nij / n) * log_term * std::exp(log_prob);
      }
    }
  }
  return emi;
}

inline double ami_from(const TableStats& t, std::span<const double> row_size,
                       std::span<const double> col_size,
                       std::span<const double> lg_fact) {
  if (partitions_equal(t)) return 1.0;
  const double hu = entropy_clustering(t);
  const double hv = entropy_truth(t);
  const double mi = mutual_information(t);
  const double emi =
      expected_mutual_information(t, row_size, col_size, lg_fact);
  const double den = 0.5 * (hu + hv) - emi;
  if (den == 0.0) return 0.0;
  return std::min(1.0, (mi - emi) / den);
}

inline std::vector<double> log_factorials(std::size_t n) {
  std::vector<double> lg(n + 1, 0.0);
  for (std::size_t k = 2; k <= n; ++k)
    lg[k] = lg[k - 1] + std::log(static_cast<double>(k));
  return lg;
}

inline std::vector<std::uint32_t> densify(std::span<const std::uint64_t> raw) {
  std::vector<std::uint32_t> out(raw.size());
  std::unordered_map<std::uint64_t, std::uint32_t> seen;
  for (std::size_t i = 0; i < raw.size(); ++i) {
    auto [it, inserted] =
        seen.try_emplace(raw[i], static_cast<std::uint32_t>(seen.size()));
    out[i] = it->second;
  }
  return out;
}

}  // namespace metrics_detail

// Incremental contingency table between an evolving clustering and fixed
// ground-truth labels. Starts from all singletons; each merge updates the
// sufficient statistics in time proportional to the two rows' class lists.
class ContingencyState {
 public:
  explicit ContingencyState(std::span<const std::uint64_t> truth) {
    const std::size_t n = truth.size();
    if (n < 2)
      throw std::invalid_argument("metrics require at least two points");
    classes_ = metrics_detail::densify(truth);
    std::uint32_t k = 0;
    for (std::uint32_t c : classes_) k = std::max(k, c + 1);
    col_size_.assign(k, 0.0);
    for (std::uint32_t c : classes_) col_size_[c] += 1.0;
    stats_.n = static_cast<double>(n);
    for (double b : col_size_) {
      stats_.s_b += metrics_detail::pairs2(b);
      stats_.b_cols += metrics_detail::plogp(b);
    }
    rows_.reserve(2 * n);
    for (std::uint32_t p = 0; p < n; ++p)
      rows_.emplace(p, Row{1.0, {{classes_[p], 1.0}}});
    cluster_count_ = n;
  }

  // Merges the rows keyed `u` and `v` into a row keyed `w`.
  void merge_rows(std::uint32_t u, std::uint32_t v, std::uint32_t w) {
    auto iu = rows_.find(u);
    auto iv = rows_.find(v);
    if (iu == rows_.end() || iv == rows_.end())
      throw std::invalid_argument("contingency row not present");
    Row ru = std::move(iu->second);
    Row rv = std::move(iv->second);
    rows_.erase(u);
    rows_.erase(v);

    using metrics_detail::plogp;
    stats_.s_a += ru.size * rv.size;
    stats_.a_rows += plogp(ru.size + rv.size) - plogp(ru.size) - plogp(rv.size);

    Row merged;
    merged.size = ru.size + rv.size;
    merged.cells.reserve(ru.cells.size() + rv.cells.size());
    std::size_t i = 0, j = 0;
    while (i < ru.cells.size() || j < rv.cells.size()) {
      if (j == rv.cells.size() ||
          (i < ru.cells.size() && ru.cells[i].first < rv.cells[j].first)) {
        merged.cells.push_back(ru.cells[i++]);
      } else if (i == ru.cells.size() ||
                 rv.cells[j].first < ru.cells[i].first) {
        merged.cells.push_back(rv.cells[j++]);
      } else {
        const double x = ru.cells[i].second;
        const double y = rv.cells[j].second;
        stats_.s_ij += x * y;
        stats_.m_cells += plogp(x + y) - plogp(x) - plogp(y);
        merged.cells.emplace_back(ru.cells[i].first, x + y);
        ++i;
        ++j;
      }
    }
    rows_.emplace(w, std::move(merged));
    --cluster_count_;
  }

  std::size_t cluster_count() const { return cluster_count_; }
  const metrics_detail::TableStats& stats() const { return stats_; }

  double ari() const { return metrics_detail::ari_from(stats_); }
  double nmi() const { return metrics_detail::nmi_from(stats_); }
  double fmi() const { return metrics_detail::fmi_from(stats_); }

  double ami() const {
    if (lg_fact_.empty())
      lg_fact_ = metrics_detail::log_factorials(
          static_cast<std::size_t>(stats_.n));
    std::vector<double> row_size;
    row_size.reserve(rows_.size());
    for (const auto& [key, row] : rows_) row_size.push_back(row.size);
    return metrics_detail::ami_from(stats_, row_size, col_size_, lg_fact_);
  }

 private:
  struct Row {
    double size = 0.0;
    std::vector<std::pair<std::uint32_t, double>> cells;  // sorted by class
  };

  std::vector<std::uint32_t> classes_;
  std::vector<double> col_size_;
  std::unordered_map<std::uint32_t, Row> rows_;
  metrics_detail::TableStats stats_;
  std::size_t cluster_count_ = 0;
  mutable std::vector<double> lg_fact_;
};

namespace metrics_detail {

inline ContingencyState flat_state(std::span<const std::uint64_t> clustering,
                                   std::span<const std::uint64_t> truth) {
  if (clustering.size() != truth.size())
    throw std::invalid_argument("label vectors differ in length");
  ContingencyState st(truth);
  const auto keys = densify(clustering);
  std::uint32_t k = 0;
  for (std::uint32_t c : keys) k = std::max(k, c + 1);
  // Fold each cluster's points together; roots get fresh ids past n.
  const std::uint32_t n = static_cast<std::uint32_t>(truth.size());
  std::vector<std::uint32_t> root(k, 0xffffffffu);
  std::uint32_t next = n;
  for (std::uint32_t p = 0; p < n; ++p) {
    if (root[keys[p]] == 0xffffffffu) {
      root[keys[p]] = p;
    } else {
      st.merge_rows(root[keys[p]], p, next);
      root[keys[p]] = next;
      ++next;
    }
  }
  return st;
}

}  // namespace metrics_detail

// Flat-clustering scores against ground truth.
inline double ari(std::span<const std::uint64_t> clustering,
                  std::span<const std::uint64_t> truth) {
  return metrics_detail::flat_state(clustering, truth).ari();
}
inline double nmi(std::span<const std::uint64_t> clustering,
                  std::span<const std::uint64_t> truth) {
  return metrics_detail::flat_state(clustering, truth).nmi();
}
inline double ami(std::span<const std::uint64_t> clustering,
                  std::span<const std::uint64_t> truth) {
  return metrics_detail::flat_state(clustering, truth).ami();
}
inline double fmi(std::span<const std::uint64_t> clustering,
                  std::span<const std::uint64_t> truth) {
  return metrics_detail::flat_state(clustering, truth).fmi();
}

// Best score per metric over the evaluation protocol's three exposure
// orders, with the achieving order and the cluster count at the optimum.
struct MetricBest {
  double best = -2.0;
  int order = -1;
  std::size_t clusters = 0;
};

struct EvalReport {
  std::map<Metric, MetricBest> results;
};

inline const char* order_label(int order) {
  switch (order) {
    case 0: return "merge-order";
    case 1: return "least-cost";
    case 2: return "monotone-least-cost";
  }
  return "?";
}

struct EvaluateOptions {
  double ami_schedule_ratio = 1.05;
  // Evaluate AMI at every cut when the dendrogram has at most this many
  // distinct merge costs.
  std::size_t ami_exact_cut_limit = 256;
};

// ARI/NMI/FMI take the exact maximum over every cut of all three orders,
// updated incrementally. AMI is evaluated on a geometric schedule of cost
// thresholds (all cuts when few distinct costs exist).
inline EvalReport evaluate_dendrogram(const Dendrogram& dg,
                                      std::span<const std::uint64_t> truth,
                                      const std::vector<Metric>& metrics,
                                      const EvaluateOptions& opts = {}) {
  if (truth.size() != dg.n)
    throw std::invalid_argument("length mismatch");
  validate(dg);
  EvalReport report;
  for (Metric m : metrics) report.results.emplace(m, MetricBest{});
  if (dg.merges.empty()) return report;

  std::vector<double> raw(dg.merges.size());
  for (std::size_t i = 0; i < raw.size(); ++i) raw[i] = dg.merges[i].cost;
  const MonotonicCosts mono = monotonicize(dg);

  bool ami_all_cuts = false;
  if (std::count(metrics.begin(), metrics.end(), Metric::Ami) > 0) {
    std::vector<double> sorted = raw;
    std::sort(sorted.begin(), sorted.end());
    const std::size_t distinct =
        std::unique(sorted.begin(), sorted.end()) - sorted.begin();
    ami_all_cuts = distinct <= opts.ami_exact_cut_limit;
  }

  auto want = [&](Metric m) {
    return report.results.find(m) != report.results.end();
  };
  auto note = [&](Metric m, double value, int order, std::size_t clusters) {
    MetricBest& b = report.results.at(m);
    if (value > b.best) b = {value, order, clusters};
  };

  auto run_order = [&](auto traversal, int order,
                       const std::vector<double>& step_costs) {
    ContingencyState st(truth);
    double shift = 0.0;
    {
      const double lo =
          *std::min_element(step_costs.begin(), step_costs.end());
      if (lo <= 0.0) shift = 1.0 - lo;
    }
    double theta = *std::min_element(step_costs.begin(), step_costs.end()) +
                   shift;
    const std::size_t steps = dg.merges.size();
    for (std::size_t s = 0; s < steps; ++s) {
      const std::uint32_t u = traversal.next();
      const MergeRecord& m = dg.merges[u - dg.n];
      st.merge_rows(m.left, m.right, u);
      const std::size_t clusters = dg.n - (s + 1);
      if (want(Metric::Ari)) note(Metric::Ari, st.ari(), order, clusters);
      if (want(Metric::Nmi)) note(Metric::Nmi, st.nmi(), order, clusters);
      if (want(Metric::Fmi)) note(Metric::Fmi, st.fmi(), order, clusters);
      if (want(Metric::Ami)) {
        const double cost = step_costs[u - dg.n] + shift;
        const bool last = s + 1 == steps;
        bool due = ami_all_cuts || last;
        if (!due && cost >= theta) due = true;
        if (due) {
          note(Metric::Ami, st.ami(), order, clusters);
          while (theta <= cost) theta *= opts.ami_schedule_ratio;
        }
      }
    }
  };

  run_order(MergeOrderTraversal(dg), 0, raw);
  run_order(LeastAvailableTraversal(dg, raw), 1, raw);
  run_order(LeastAvailableTraversal(dg, mono.values), 2, mono.values);
  return report;
}

}  // namespace hac
