#pragma once

#include <algorithm>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "hac/dataset.hpp"
#include "hac/dendrogram.hpp"
#include "hac/linkage.hpp"

namespace hac {

inline constexpr std::size_t kOracleDefaultCap = 512;

namespace oracle_detail {

// Ground-truth HAC state: member lists per slot, everything recomputed from
// scratch each round. Shares no update code with the fast backends.
struct Clusters {
  std::vector<std::vector<std::uint32_t>> members;
  std::vector<std::uint32_t> ids;
  std::vector<bool> alive;
};

inline double pair_entry(const std::vector<double>& pd, std::size_t n,
                         std::uint32_t p, std::uint32_t q) {
  return pd[static_cast<std::size_t>(p) * n + q];
}

inline double chamfer_from_matrix(const std::vector<std::uint32_t>& a,
                                  const std::vector<std::uint32_t>& b,
                                  const std::vector<double>& pd,
                                  std::size_t n) {
  double acc = 0.0;
  for (std::uint32_t p : a) {
    double best = pair_entry(pd, n, p, b.front());
    for (std::size_t i = 1; i < b.size(); ++i)
      best = std::min(best, pair_entry(pd, n, p, b[i]));
    acc += best;
  }
  return acc;
}

inline double chamfer_ordered(const Clusters& cl, std::uint32_t u,
                              std::uint32_t v, ChamferVariant variant,
                              const std::vector<double>& pd, std::size_t n) {
  const auto& a = cl.members[u];
  const auto& b = cl.members[v];
  switch (variant) {
    case ChamferVariant::Plain:
      return chamfer_from_matrix(a, b, pd, n);
    case ChamferVariant::Normalized:
      return chamfer_from_matrix(a, b, pd, n) / static_cast<double>(a.size());
    case ChamferVariant::Symmetric:
      return chamfer_from_matrix(a, b, pd, n) +
             chamfer_from_matrix(b, a, pd, n);
    case ChamferVariant::SymmetricNormalized:
      return chamfer_from_matrix(a, b, pd, n) / static_cast<double>(a.size()) +
             chamfer_from_matrix(b, a, pd, n) / static_cast<double>(b.size());
  }
  throw std::logic_error("unknown chamfer variant");
}

inline double classical_pairwise(const Clusters& cl, std::uint32_t u,
                                 std::uint32_t v, ClassicalKind kind,
                                 const std::vector<double>& pd,
                                 std::size_t n) {
  const auto& a = cl.members[u];
  const auto& b = cl.members[v];
  bool first = true;
  double best = 0.0;
  double sum = 0.0;
  for (std::uint32_t p : a) {
    for (std::uint32_t q : b) {
      const double val = pair_entry(pd, n, p, q);
      sum += val;
      if (first) {
        best = val;
        first = false;
      } else if (kind == ClassicalKind::Single) {
        best = std::min(best, val);
      } else {
        best = std::max(best, val);
      }
    }
  }
  if (kind == ClassicalKind::Average)
    return sum / static_cast<double>(a.size() * b.size());
  return best;
}

}  // namespace oracle_detail

// Naive reference HAC: every round evaluates the linkage from scratch for
// all active pairs, applies the engine's tie rules (per-cluster NN prefers
// the smaller value then the larger id; the global pick prefers the smaller
// value then the smaller source id), merges into the smaller slot, and
// repeats. Intended as ground truth for equivalence testing, not for speed.
inline Dendrogram oracle_hac(const Dataset& ds, const Linkage& linkage,
                             BaseMetric m,
                             std::size_t cap = kOracleDefaultCap) {
  validate(ds);
  if (ds.n > cap) throw std::invalid_argument("oracle cap exceeded");
  const std::size_t n = ds.n;

  std::vector<double> pd(n * n, 0.0);
  for (std::size_t p = 0; p < n; ++p)
    for (std::size_t q = 0; q < n; ++q)
      if (q != p) pd[p * n + q] = point_distance(ds, p, q, m);

  oracle_detail::Clusters cl;
  cl.members.resize(n);
  cl.ids.resize(n);
  cl.alive.assign(n, true);
  for (std::uint32_t i = 0; i < n; ++i) {
    cl.members[i] = {i};
    cl.ids[i] = i;
  }

  const bool centroid_based =
      std::holds_alternative<ClassicalKind>(linkage) &&
      (std::get<ClassicalKind>(linkage) == ClassicalKind::Centroid ||
       std::get<ClassicalKind>(linkage) == ClassicalKind::Ward);
  // Freshly recomputed once per round (not incrementally maintained).
  std::vector<std::vector<double>> centroids(centroid_based ? n : 0);

  auto value_of = [&](std::uint32_t u, std::uint32_t v) {
    if (const auto* variant = std::get_if<ChamferVariant>(&linkage))
      return oracle_detail::chamfer_ordered(cl, u, v, *variant, pd, n);
    const ClassicalKind kind = std::get<ClassicalKind>(linkage);
    switch (kind) {
      case ClassicalKind::Single:
      case ClassicalKind::Complete:
      case ClassicalKind::Average:
        return oracle_detail::classical_pairwise(cl, u, v, kind, pd, n);
      case ClassicalKind::Centroid:
      case ClassicalKind::Ward: {
        double sq = 0.0;
        for (std::size_t j = 0; j < ds.d; ++j) {
          const double diff = centroids[u][j] - centroids[v][j];
          sq += diff * diff;
        }
        if (kind == ClassicalKind::Ward) {
          const double na = static_cast<double>(cl.members[u].size());
          const double nb = static_cast<double>(cl.members[v].size());
          sq *= 2.0 * na * nb / (na + nb);
        }
        return m == BaseMetric::Euclidean ? std::sqrt(sq) : sq;
      }
    }
    throw std::logic_error("unknown classical kind");
  };

  Dendrogram out;
  out.n = static_cast<std::uint32_t>(n);
  std::uint32_t next_id = static_cast<std::uint32_t>(n);
  std::size_t active = n;

  std::vector<std::uint64_t> sizes(n, 1);
  while (active > 1) {
    if (centroid_based)
      for (std::uint32_t u = 0; u < n; ++u)
        if (cl.alive[u]) centroids[u] = detail::centroid_of(cl.members[u], ds);

    bool have_best = false;
    double best_value = 0.0;
    std::uint32_t best_u = 0, best_v = 0;
    for (std::uint32_t u = 0; u < n; ++u) {
      if (!cl.alive[u]) continue;
      // Fresh nearest neighbor of u under the NN tie rule.
      bool have_nn = false;
      double nn_value = 0.0;
      std::uint32_t nn_slot = 0;
      std::uint32_t nn_id = 0;
      for (std::uint32_t v = 0; v < n; ++v) {
        if (v == u || !cl.alive[v]) continue;
        const double val = value_of(u, v);
        if (!have_nn || val < nn_value ||
            (val == nn_value && cl.ids[v] > nn_id)) {
          have_nn = true;
          nn_value = val;
          nn_slot = v;
          nn_id = cl.ids[v];
        }
      }
      if (!have_nn) continue;
      if (!have_best || nn_value < best_value ||
          (nn_value == best_value && cl.ids[u] < cl.ids[best_u])) {
        have_best = true;
        best_value = nn_value;
        best_u = u;
        best_v = nn_slot;
      }
    }

    const std::uint32_t keep = std::min(best_u, best_v);
    const std::uint32_t dead = std::max(best_u, best_v);
    out.merges.push_back({cl.ids[keep], cl.ids[dead], best_value,
                          static_cast<std::uint32_t>(sizes[keep] + sizes[dead])});
    std::vector<std::uint32_t> merged;
    merged.reserve(cl.members[keep].size() + cl.members[dead].size());
    std::merge(cl.members[keep].begin(), cl.members[keep].end(),
               cl.members[dead].begin(), cl.members[dead].end(),
               std::back_inserter(merged));
    cl.members[keep] = std::move(merged);
    cl.members[dead].clear();
    sizes[keep] += sizes[dead];
    cl.alive[dead] = false;
    cl.ids[keep] = next_id++;
    --active;
  }
  return out;
}

}  // namespace hac
