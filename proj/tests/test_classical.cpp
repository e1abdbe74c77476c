#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "hac/classical.hpp"
#include "hac/engine.hpp"
#include "test_util.hpp"

using namespace hac;

namespace {

// Independent Prim's MST over all pairwise Euclidean distances.
std::vector<double> mst_edge_weights(const Dataset& ds) {
  const std::size_t n = ds.n;
  std::vector<bool> in_tree(n, false);
  std::vector<double> best(n, std::numeric_limits<double>::infinity());
  std::vector<double> edges;
  in_tree[0] = true;
  for (std::size_t q = 1; q < n; ++q)
    best[q] = point_distance(ds, 0, q, BaseMetric::Euclidean);
  for (std::size_t step = 1; step < n; ++step) {
    std::size_t pick = 0;
    double pick_val = std::numeric_limits<double>::infinity();
    for (std::size_t q = 0; q < n; ++q)
      if (!in_tree[q] && best[q] < pick_val) {
        pick = q;
        pick_val = best[q];
      }
    edges.push_back(pick_val);
    in_tree[pick] = true;
    for (std::size_t q = 0; q < n; ++q)
      if (!in_tree[q])
        best[q] = std::min(best[q],
                           point_distance(ds, pick, q, BaseMetric::Euclidean));
  }
  return edges;
}

}  // namespace

TEST_CASE("classical_value on {0,1} vs {3}") {
  const Dataset ds = hac_test::dataset_1d({0.0, 1.0, 3.0});
  const std::vector<std::uint32_t> a{0, 1};
  const std::vector<std::uint32_t> b{2};
  const BaseMetric m = BaseMetric::Euclidean;
  CHECK(classical_value(a, b, ClassicalKind::Single, ds, m) == 2.0);
  CHECK(classical_value(a, b, ClassicalKind::Complete, ds, m) == 3.0);
  CHECK(classical_value(a, b, ClassicalKind::Average, ds, m) == 2.5);
  CHECK_THAT(classical_value(a, b, ClassicalKind::Centroid, ds, m),
             Catch::Matchers::WithinAbs(2.5, 1e-12));
  CHECK_THAT(classical_value(a, b, ClassicalKind::Ward, ds, m),
             Catch::Matchers::WithinAbs(std::sqrt(4.0 / 3.0) * 2.5, 1e-12));
  CHECK_THROWS_AS(classical_value({}, b, ClassicalKind::Single, ds, m),
                  std::invalid_argument);
}

TEST_CASE("lance-williams recurrence on {0,1,10}") {
  // d({0,1},{10}) from d(0,10)=10, d(1,10)=9, d(0,1)=1.
  CHECK(lance_williams_update(ClassicalKind::Single, 10, 9, 1, 1, 1, 1) == 9.0);
  CHECK(lance_williams_update(ClassicalKind::Complete, 10, 9, 1, 1, 1, 1) ==
        10.0);
  CHECK(lance_williams_update(ClassicalKind::Average, 10, 9, 1, 1, 1, 1) ==
        9.5);
}

TEST_CASE("backend merges match direct recomputation from point sets") {
  for (const ClassicalKind kind :
       {ClassicalKind::Single, ClassicalKind::Complete, ClassicalKind::Average,
        ClassicalKind::Centroid, ClassicalKind::Ward}) {
    for (std::uint64_t seed = 0; seed < 6; ++seed) {
      const Dataset ds = hac_test::random_dataset(seed * 3 + 17, 32, 2);
      ClassicalBackend backend(kind, BaseMetric::Euclidean);
      std::mt19937_64 rng(seed);
      EngineOptions opts;
      opts.check_nn = true;
      opts.observer = [&](const ClusterState& state, const MergeRecord&) {
        std::vector<std::uint32_t> active;
        for (std::uint32_t s = 0; s < state.point_count(); ++s)
          if (state.alive(s)) active.push_back(s);
        if (active.size() < 2) return;
        for (int trial = 0; trial < 3; ++trial) {
          const std::uint32_t a = active[rng() % active.size()];
          const std::uint32_t b = active[rng() % active.size()];
          if (a == b) continue;
          const double direct = classical_value(
              state.members(a), state.members(b), kind, ds,
              BaseMetric::Euclidean);
          const double stored = backend.linkage_value(state, a, b);
          CHECK(hac_test::rel_close(direct, stored, 1e-9));
        }
      };
      run_hac(ds, backend, opts);
    }
  }
}

TEST_CASE("recorded merge costs match direct definitions") {
  for (const ClassicalKind kind :
       {ClassicalKind::Single, ClassicalKind::Complete, ClassicalKind::Average,
        ClassicalKind::Centroid, ClassicalKind::Ward}) {
    const Dataset ds = hac_test::random_dataset(99, 24, 3);
    ClassicalBackend backend(kind, BaseMetric::Euclidean);
    // Reconstruct member lists per id from the merge sequence.
    const Dendrogram dg = run_hac(ds, backend);
    std::vector<std::vector<std::uint32_t>> members(2 * ds.n - 1);
    for (std::uint32_t p = 0; p < ds.n; ++p) members[p] = {p};
    for (std::size_t i = 0; i < dg.merges.size(); ++i) {
      const auto& m = dg.merges[i];
      const double direct = classical_value(members[m.left], members[m.right],
                                            kind, ds, BaseMetric::Euclidean);
      CHECK(hac_test::rel_close(m.cost, direct, 1e-9));
      auto& dst = members[dg.n + i];
      dst = members[m.left];
      dst.insert(dst.end(), members[m.right].begin(), members[m.right].end());
      std::sort(dst.begin(), dst.end());
    }
  }
}

TEST_CASE("reducible linkages satisfy reducibility at every merge") {
  for (const ClassicalKind kind :
       {ClassicalKind::Single, ClassicalKind::Complete, ClassicalKind::Average,
        ClassicalKind::Ward}) {
    const Dataset ds = hac_test::random_dataset(7, 28, 2);
    ClassicalBackend backend2(kind, BaseMetric::Euclidean);
    std::vector<std::vector<std::uint32_t>> members(2 * ds.n - 1);
    for (std::uint32_t p = 0; p < ds.n; ++p) members[p] = {p};
    std::uint32_t next = ds.n;
    EngineOptions opts;
    opts.observer = [&](const ClusterState& state, const MergeRecord& rec) {
      auto& dst = members[next];
      dst = members[rec.left];
      dst.insert(dst.end(), members[rec.right].begin(),
                 members[rec.right].end());
      std::sort(dst.begin(), dst.end());
      for (std::uint32_t s = 0; s < state.point_count(); ++s) {
        if (!state.alive(s)) continue;
        if (state.id_at(s) == next) continue;
        const double merged = classical_value(
            members[next], state.members(s), kind, ds, BaseMetric::Euclidean);
        const double to_a = classical_value(members[rec.left],
                                            state.members(s), kind, ds,
                                            BaseMetric::Euclidean);
        const double to_b = classical_value(members[rec.right],
                                            state.members(s), kind, ds,
                                            BaseMetric::Euclidean);
        CHECK(merged >= std::min(to_a, to_b) * (1.0 - 1e-12));
      }
      ++next;
    };
    run_hac(ds, backend2, opts);
  }
}

TEST_CASE("single linkage merge costs are the MST edge weights") {
  for (std::uint64_t seed = 0; seed < 6; ++seed) {
    const Dataset ds = hac_test::random_dataset(seed + 41, 40, 2);
    ClassicalBackend backend(ClassicalKind::Single, BaseMetric::Euclidean);
    const Dendrogram dg = run_hac(ds, backend);
    std::vector<double> costs;
    for (const auto& m : dg.merges) costs.push_back(m.cost);
    std::vector<double> mst = mst_edge_weights(ds);
    std::sort(costs.begin(), costs.end());
    std::sort(mst.begin(), mst.end());
    REQUIRE(costs.size() == mst.size());
    for (std::size_t i = 0; i < costs.size(); ++i)
      CHECK(costs[i] == mst[i]);
  }
}

TEST_CASE("squared euclidean reporting convention") {
  const Dataset ds = hac_test::dataset_1d({0.0, 1.0, 3.0});
  const std::vector<std::uint32_t> a{0, 1};
  const std::vector<std::uint32_t> b{2};
  // Squared metric: centroid and Ward's report the squared quantity.
  CHECK_THAT(classical_value(a, b, ClassicalKind::Centroid, ds,
                             BaseMetric::SquaredEuclidean),
             Catch::Matchers::WithinAbs(6.25, 1e-12));
  CHECK_THAT(classical_value(a, b, ClassicalKind::Ward, ds,
                             BaseMetric::SquaredEuclidean),
             Catch::Matchers::WithinAbs(4.0 / 3.0 * 6.25, 1e-12));
  CHECK(classical_value(a, b, ClassicalKind::Single, ds,
                        BaseMetric::SquaredEuclidean) == 4.0);
}
