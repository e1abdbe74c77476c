#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <vector>

#include "hac/chamfer.hpp"
#include "hac/classical.hpp"
#include "hac/engine.hpp"
#include "hac/metrics.hpp"
#include "test_util.hpp"

using namespace hac;

namespace {

using Labels = std::vector<std::uint64_t>;

// Independent oracle: O(n^2) pair counting, written directly from the
// definitions rather than from contingency sufficient statistics.
struct PairCounts {
  double tp = 0, fp = 0, fn = 0, tn = 0;
};

PairCounts count_pairs(const Labels& c, const Labels& t) {
  PairCounts pc;
  for (std::size_t i = 0; i < c.size(); ++i)
    for (std::size_t j = i + 1; j < c.size(); ++j) {
      const bool same_c = c[i] == c[j];
      const bool same_t = t[i] == t[j];
      if (same_c && same_t) pc.tp += 1;
      else if (same_c) pc.fp += 1;
      else if (same_t) pc.fn += 1;
      else pc.tn += 1;
    }
  return pc;
}

double oracle_ari(const Labels& c, const Labels& t) {
  const PairCounts p = count_pairs(c, t);
  const double den =
      (p.tp + p.fn) * (p.fn + p.tn) + (p.tp + p.fp) * (p.fp + p.tn);
  if (den == 0.0) return (p.fp == 0 && p.fn == 0) ? 1.0 : 0.0;
  return 2.0 * (p.tp * p.tn - p.fn * p.fp) / den;
}

double oracle_fmi(const Labels& c, const Labels& t) {
  const PairCounts p = count_pairs(c, t);
  if (p.tp + p.fp == 0.0 || p.tp + p.fn == 0.0) return 0.0;
  return p.tp / std::sqrt((p.tp + p.fp) * (p.tp + p.fn));
}

double oracle_nmi(const Labels& c, const Labels& t) {
  const double n = static_cast<double>(c.size());
  std::map<std::uint64_t, double> ca, cb;
  std::map<std::pair<std::uint64_t, std::uint64_t>, double> cell;
  for (std::size_t i = 0; i < c.size(); ++i) {
    ca[c[i]] += 1;
    cb[t[i]] += 1;
    cell[{c[i], t[i]}] += 1;
  }
  auto entropy = [&](const std::map<std::uint64_t, double>& m) {
    double h = 0;
    for (const auto& [k, v] : m) h -= (v / n) * std::log(v / n);
    return h;
  };
  const double hu = entropy(ca), hv = entropy(cb);
  if (hu + hv == 0.0) return 1.0;
  double mi = 0;
  for (const auto& [k, v] : cell)
    mi += (v / n) * std::log(n * v / (ca[k.first] * cb[k.second]));
  return std::clamp(mi / (0.5 * (hu + hv)), 0.0, 1.0);
}

double oracle_ami(const Labels& c, const Labels& t) {
  const double n = static_cast<double>(c.size());
  std::map<std::uint64_t, double> ca, cb;
  std::map<std::pair<std::uint64_t, std::uint64_t>, double> cell;
  for (std::size_t i = 0; i < c.size(); ++i) {
    ca[c[i]] += 1;
    cb[t[i]] += 1;
    cell[{c[i], t[i]}] += 1;
  }
  auto entropy = [&](const std::map<std::uint64_t, double>& m) {
    double h = 0;
    for (const auto& [k, v] : m) h -= (v / n) * std::log(v / n);
    return h;
  };
  const double hu = entropy(ca), hv = entropy(cb);
  double mi = 0;
  for (const auto& [k, v] : cell)
    mi += (v / n) * std::log(n * v / (ca[k.first] * cb[k.second]));
  auto lf = [](double x) { return std::lgamma(x + 1.0); };
  double emi = 0;
  for (const auto& [ka, a] : ca)
    for (const auto& [kb, b] : cb) {
      const double lo = std::max(1.0, a + b - n);
      const double hi = std::min(a, b);
      for (double nij = lo; nij <= hi; ++nij) {
        const double lp = lf(a) + lf(b) + lf(n - a) + lf(n - b) - lf(n) -
                          lf(nij) - lf(a - nij) - lf(b - nij) -
                          lf(n - a - b + nij);
        emi += (nij / n) * std::log(n * nij / (a * b)) * std::exp(lp);
      }
    }
  const double den = 0.5 * (hu + hv) - emi;
  if (den == 0.0) return (hu == 0 && hv == 0) ? 1.0 : 0.0;
  return (mi - emi) / den;
}

Labels to_labels(std::span<const std::uint32_t> v) {
  return Labels(v.begin(), v.end());
}

}  // namespace

TEST_CASE("ari examples") {
  CHECK(ari(Labels{0, 0, 1, 1}, Labels{0, 0, 1, 1}) == 1.0);
  CHECK(ari(Labels{0, 0, 1, 1}, Labels{1, 1, 0, 0}) == 1.0);
  CHECK(ari(Labels{0, 0, 1, 1}, Labels{0, 1, 0, 1}) == -0.5);
  CHECK_THROWS_AS(ari(Labels{0}, Labels{0}), std::invalid_argument);
  CHECK_THROWS_AS(ari(Labels{0, 1}, Labels{0}), std::invalid_argument);

  // Degenerate denominators.
  CHECK(ari(Labels{0, 1, 2}, Labels{5, 6, 7}) == 1.0);  // both all-singleton
  CHECK(ari(Labels{0, 0, 0}, Labels{1, 1, 1}) == 1.0);  // both one cluster
}

TEST_CASE("nmi, ami, fmi examples") {
  CHECK(nmi(Labels{0, 0, 1, 1}, Labels{2, 2, 3, 3}) == 1.0);
  CHECK(ami(Labels{0, 0, 1, 1}, Labels{2, 2, 3, 3}) == 1.0);
  CHECK(fmi(Labels{0, 0, 1, 1}, Labels{2, 2, 3, 3}) == 1.0);

  // All singletons vs one cluster: no predicted same-cluster pairs.
  CHECK(fmi(Labels{0, 1, 2, 3}, Labels{0, 0, 0, 0}) == 0.0);
  CHECK(fmi(Labels{0, 0, 1, 1}, Labels{0, 1, 0, 1}) == 0.0);

  // Two single-cluster partitions.
  CHECK(nmi(Labels{0, 0, 0}, Labels{1, 1, 1}) == 1.0);
}

TEST_CASE("metrics agree with independent pair/entropy oracles") {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t n = 2 + rng() % 40;
    Labels c(n), t(n);
    const std::uint64_t kc = 1 + rng() % 5, kt = 1 + rng() % 5;
    for (auto& v : c) v = rng() % kc;
    for (auto& v : t) v = rng() % kt;
    CHECK_THAT(ari(c, t), Catch::Matchers::WithinAbs(oracle_ari(c, t), 1e-12));
    CHECK_THAT(fmi(c, t), Catch::Matchers::WithinAbs(oracle_fmi(c, t), 1e-12));
    CHECK_THAT(nmi(c, t), Catch::Matchers::WithinAbs(oracle_nmi(c, t), 1e-11));
    CHECK_THAT(ami(c, t), Catch::Matchers::WithinAbs(oracle_ami(c, t), 1e-9));
  }
}

TEST_CASE("label permutation invariance") {
  std::mt19937_64 rng(55);
  for (int trial = 0; trial < 10; ++trial) {
    const std::size_t n = 6 + rng() % 30;
    Labels c(n), t(n);
    for (auto& v : c) v = rng() % 4;
    for (auto& v : t) v = rng() % 3;
    // Random relabeling of both sides.
    std::vector<std::uint64_t> perm_c{17, 3, 99, 41};
    std::vector<std::uint64_t> perm_t{7, 1, 1000};
    Labels c2(n), t2(n);
    for (std::size_t i = 0; i < n; ++i) {
      c2[i] = perm_c[c[i]];
      t2[i] = perm_t[t[i]];
    }
    CHECK(ari(c, t) == ari(c2, t2));
    CHECK(nmi(c, t) == nmi(c2, t2));
    CHECK(fmi(c, t) == fmi(c2, t2));
    CHECK_THAT(ami(c, t), Catch::Matchers::WithinAbs(ami(c2, t2), 1e-12));
  }
}

TEST_CASE("random labelings have near-zero mean ARI") {
  std::mt19937_64 rng(77);
  double sum = 0.0;
  const int trials = 100;
  for (int trial = 0; trial < trials; ++trial) {
    Labels c(1000), t(1000);
    for (auto& v : c) v = rng() % 4;
    for (auto& v : t) v = rng() % 4;
    sum += ari(c, t);
  }
  CHECK(std::abs(sum / trials) <= 0.02);
}

TEST_CASE("incremental scores equal from-scratch scores at every cut") {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 4; ++trial) {
    const std::size_t n = 50 + 50 * trial;  // up to 200
    const Dataset ds = hac_test::random_dataset(rng(), n, 2);
    Labels truth(n);
    for (auto& v : truth) v = rng() % 4;

    ChamferBackend backend(ChamferVariant::Plain, BaseMetric::Euclidean);
    const Dendrogram dg = run_hac(ds, backend);

    ContingencyState st(truth);
    auto cuts = merge_order_cuts(dg);
    for (std::size_t step = 0; step < dg.merges.size(); ++step) {
      const MergeRecord& m = dg.merges[step];
      st.merge_rows(m.left, m.right, dg.n + step);
      const Labels flat = to_labels(cuts.next());
      CHECK_THAT(st.ari(), Catch::Matchers::WithinAbs(ari(flat, truth), 1e-12));
      CHECK_THAT(st.nmi(), Catch::Matchers::WithinAbs(nmi(flat, truth), 1e-12));
      CHECK_THAT(st.fmi(), Catch::Matchers::WithinAbs(fmi(flat, truth), 1e-12));
    }
  }
}

TEST_CASE("evaluate_dendrogram finds a perfect cut") {
  const Dataset ds = hac_test::dataset_1d({0.0, 0.1, 10.0, 10.1});
  const Labels truth{0, 0, 1, 1};
  ChamferBackend backend(ChamferVariant::Plain, BaseMetric::Euclidean);
  const Dendrogram dg = run_hac(ds, backend);
  const EvalReport report = evaluate_dendrogram(
      dg, truth, {Metric::Ari, Metric::Nmi, Metric::Ami, Metric::Fmi});
  CHECK(report.results.at(Metric::Ari).best == 1.0);
  CHECK(report.results.at(Metric::Ari).clusters == 2);
  CHECK(report.results.at(Metric::Nmi).best == 1.0);
  CHECK(report.results.at(Metric::Ami).best == 1.0);
  CHECK(report.results.at(Metric::Fmi).best == 1.0);
}

TEST_CASE("monotone costs make merge order and least-cost order coincide") {
  const Dataset ds = hac_test::random_dataset(17, 40, 2);
  ClassicalBackend backend(ClassicalKind::Single, BaseMetric::Euclidean);
  const Dendrogram dg = run_hac(ds, backend);
  std::vector<double> costs;
  for (const auto& m : dg.merges) costs.push_back(m.cost);

  auto a = merge_order_cuts(dg);
  auto b = least_available_cuts(dg, costs);
  while (a.has_next()) {
    REQUIRE(b.has_next());
    const auto la = a.next();
    const auto lb = b.next();
    CHECK(std::equal(la.begin(), la.end(), lb.begin()));
  }
}

TEST_CASE("evaluate_dendrogram equals brute-force max over the three orders") {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 6; ++trial) {
    const std::size_t n = 20;
    const Dataset ds = hac_test::random_dataset(rng(), n, 2);
    Labels truth(n);
    for (auto& v : truth) v = rng() % 3;
    ChamferBackend backend(ChamferVariant::Plain, BaseMetric::Euclidean);
    const Dendrogram dg = run_hac(ds, backend);

    std::vector<double> raw;
    for (const auto& m : dg.merges) raw.push_back(m.cost);
    const auto mono = monotonicize(dg);

    double best_ari = -2.0, best_ami = -2.0;
    auto scan = [&](auto cuts) {
      while (cuts.has_next()) {
        const Labels flat = to_labels(cuts.next());
        best_ari = std::max(best_ari, ari(flat, truth));
        best_ami = std::max(best_ami, ami(flat, truth));
      }
    };
    scan(merge_order_cuts(dg));
    scan(least_available_cuts(dg, raw));
    scan(least_available_cuts(dg, mono.values));

    const EvalReport report =
        evaluate_dendrogram(dg, truth, {Metric::Ari, Metric::Ami});
    CHECK_THAT(report.results.at(Metric::Ari).best,
               Catch::Matchers::WithinAbs(best_ari, 1e-12));
    // n = 20 has few distinct costs, so the schedule guard evaluates AMI at
    // every cut and the maximum is exact.
    CHECK_THAT(report.results.at(Metric::Ami).best,
               Catch::Matchers::WithinAbs(best_ami, 1e-9));

    // With the exact-cut guard disabled, the geometric schedule still
    // brackets the exact maximum from below and lands close to it.
    EvaluateOptions sub;
    sub.ami_exact_cut_limit = 0;
    sub.ami_schedule_ratio = 1.01;
    const EvalReport scheduled =
        evaluate_dendrogram(dg, truth, {Metric::Ami}, sub);
    CHECK(scheduled.results.at(Metric::Ami).best <= best_ami + 1e-9);
    CHECK(scheduled.results.at(Metric::Ami).best >= best_ami - 0.01);
  }
}

TEST_CASE("evaluate_dendrogram validates inputs") {
  const Dataset ds = hac_test::dataset_1d({0.0, 1.0, 2.0});
  ChamferBackend backend(ChamferVariant::Plain, BaseMetric::Euclidean);
  const Dendrogram dg = run_hac(ds, backend);
  CHECK_THROWS_WITH(evaluate_dendrogram(dg, Labels{0, 1}, {Metric::Ari}),
                    "length mismatch");
}
