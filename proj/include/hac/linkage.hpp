#pragma once

#include <optional>
#include <string>
#include <variant>

#include "hac/chamfer.hpp"
#include "hac/classical.hpp"

namespace hac {

// One of the nine supported linkages.
using Linkage = std::variant<ChamferVariant, ClassicalKind>;

inline std::string linkage_name(const Linkage& l) {
  if (const auto* v = std::get_if<ChamferVariant>(&l))
    return chamfer_variant_name(*v);
  return classical_kind_name(std::get<ClassicalKind>(l));
}

inline std::optional<Linkage> parse_linkage(const std::string& name) {
  if (name == "chamfer") return Linkage{ChamferVariant::Plain};
  if (name == "chamfer-n") return Linkage{ChamferVariant::Normalized};
  if (name == "chamfer-s") return Linkage{ChamferVariant::Symmetric};
  if (name == "chamfer-ns") return Linkage{ChamferVariant::SymmetricNormalized};
  if (name == "single") return Linkage{ClassicalKind::Single};
  if (name == "complete") return Linkage{ClassicalKind::Complete};
  if (name == "average") return Linkage{ClassicalKind::Average};
  if (name == "centroid") return Linkage{ClassicalKind::Centroid};
  if (name == "ward") return Linkage{ClassicalKind::Ward};
  return std::nullopt;
}

inline constexpr const char* kAllLinkageNames[] = {
    "chamfer", "chamfer-n", "chamfer-s", "chamfer-ns", "single",
    "complete", "average",   "centroid",  "ward"};

}  // namespace hac
