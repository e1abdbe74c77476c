#include <catch2/catch_amalgamated.hpp>

#include <map>
#include <random>

#include "hac/min_tracking_map.hpp"

using hac::MinTrackingMap;

TEST_CASE("min tracking map basics") {
  MinTrackingMap m;
  CHECK(m.empty());
  CHECK_THROWS_AS(m.min(), std::out_of_range);

  m.insert_or_assign(3, 5.0);
  m.insert_or_assign(7, 2.0);
  m.insert_or_assign(1, 9.0);
  CHECK(m.size() == 3);
  CHECK(m.min().id == 7);
  CHECK(m.min().value == 2.0);

  m.insert_or_assign(7, 12.0);  // reassign moves it off the minimum
  CHECK(m.min().id == 3);
  CHECK(m.at(7) == 12.0);

  CHECK(m.erase(3));
  CHECK_FALSE(m.erase(3));
  CHECK(m.min().id == 1);
  CHECK(m.contains(1));
  CHECK_FALSE(m.contains(3));
}

TEST_CASE("min ties prefer the larger id") {
  MinTrackingMap m;
  m.insert_or_assign(2, 1.5);
  m.insert_or_assign(9, 1.5);
  m.insert_or_assign(5, 1.5);
  CHECK(m.min().id == 9);
  m.erase(9);
  CHECK(m.min().id == 5);
}

TEST_CASE("min tracking map agrees with a naive scan") {
  std::mt19937_64 rng(42);
  MinTrackingMap m;
  std::map<std::uint32_t, double> naive;
  for (int step = 0; step < 5000; ++step) {
    const std::uint32_t id = rng() % 64;
    switch (rng() % 3) {
      case 0:
      case 1: {
        const double v = static_cast<double>(rng() % 16) / 4.0;
        m.insert_or_assign(id, v);
        naive[id] = v;
        break;
      }
      default:
        m.erase(id);
        naive.erase(id);
    }
    REQUIRE(m.size() == naive.size());
    if (naive.empty()) continue;
    double best = naive.begin()->second;
    std::uint32_t best_id = naive.begin()->first;
    for (const auto& [k, v] : naive)
      if (v < best || (v == best && k > best_id)) {
        best = v;
        best_id = k;
      }
    REQUIRE(m.min().id == best_id);
    REQUIRE(m.min().value == best);
  }
}
