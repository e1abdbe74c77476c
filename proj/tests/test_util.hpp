#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "hac/chamfer.hpp"
#include "hac/classical.hpp"
#include "hac/dataset.hpp"
#include "hac/dendrogram.hpp"
#include "hac/engine.hpp"
#include "hac/linkage.hpp"
#include "hac/tradeoff.hpp"

namespace hac_test {

inline hac::Dataset random_dataset(std::uint64_t seed, std::size_t n,
                                   std::size_t d, bool with_labels = false,
                                   std::uint64_t classes = 3) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> coord(0.0, 1.0);
  hac::Dataset ds;
  ds.n = n;
  ds.d = d;
  ds.points.resize(n * d);
  for (double& v : ds.points) v = coord(rng);
  if (with_labels) {
    std::vector<std::uint64_t> labels(n);
    for (auto& l : labels) l = rng() % classes;
    ds.labels = std::move(labels);
  }
  return ds;
}

inline hac::Dataset dataset_1d(std::initializer_list<double> coords) {
  hac::Dataset ds;
  ds.n = coords.size();
  ds.d = 1;
  ds.points.assign(coords.begin(), coords.end());
  return ds;
}

// Six points equally spaced on the unit circle, index k at angle 60k deg.
inline hac::Dataset hexagon_dataset() {
  const double h = std::sqrt(3.0) / 2.0;
  hac::Dataset ds;
  ds.n = 6;
  ds.d = 2;
  ds.points = {1.0, 0.0, 0.5, h, -0.5, h, -1.0, 0.0, -0.5, -h, 0.5, -h};
  return ds;
}

inline bool rel_close(double a, double b, double tol) {
  if (a == b) return true;
  const double scale = std::max(std::abs(a), std::abs(b));
  return std::abs(a - b) <= tol * scale;
}

inline bool merges_match(const hac::Dendrogram& x, const hac::Dendrogram& y,
                         double cost_tol) {
  if (x.n != y.n || x.merges.size() != y.merges.size()) return false;
  for (std::size_t i = 0; i < x.merges.size(); ++i) {
    const auto& a = x.merges[i];
    const auto& b = y.merges[i];
    if (a.left != b.left || a.right != b.right || a.size != b.size)
      return false;
    if (!rel_close(a.cost, b.cost, cost_tol)) return false;
  }
  return true;
}

inline hac::Dendrogram run_linkage(const hac::Dataset& ds,
                                   const hac::Linkage& linkage,
                                   hac::BaseMetric m,
                                   const hac::EngineOptions& opts = {}) {
  if (const auto* v = std::get_if<hac::ChamferVariant>(&linkage)) {
    if (hac::is_symmetric(*v)) {
      hac::SymmetricChamferBackend backend(*v, m);
      return hac::run_hac(ds, backend, opts);
    }
    hac::ChamferBackend backend(*v, m);
    return hac::run_hac(ds, backend, opts);
  }
  hac::ClassicalBackend backend(std::get<hac::ClassicalKind>(linkage), m);
  return hac::run_hac(ds, backend, opts);
}

}  // namespace hac_test
