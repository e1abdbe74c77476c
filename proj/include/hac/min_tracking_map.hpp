#pragma once

#include <cstdint>
#include <set>
#include <stdexcept>
#include <unordered_map>
#include <utility>

namespace hac {

// Dictionary from cluster id to linkage value, augmented so the
// minimum-valued entry is available in O(1). Value ties resolve toward the
// larger id, matching the engine's nearest-neighbor tie rule where the
// latest-created cluster wins.
class MinTrackingMap {
 public:
  struct Entry {
    std::uint32_t id = 0;
    double value = 0.0;
  };

  void insert_or_assign(std::uint32_t id, double value) {
    auto [it, inserted] = values_.try_emplace(id, value);
    if (!inserted) {
      ordered_.erase({it->second, id});
      it->second = value;
    }
    ordered_.insert({value, id});
  }

  bool erase(std::uint32_t id) {
    auto it = values_.find(id);
    if (it == values_.end()) return false;
    ordered_.erase({it->second, id});
    values_.erase(it);
    return true;
  }

  bool contains(std::uint32_t id) const { return values_.count(id) != 0; }

  double at(std::uint32_t id) const {
    auto it = values_.find(id);
    if (it == values_.end())
      throw std::out_of_range("MinTrackingMap: id not present");
    return it->second;
  }

  Entry min() const {
    if (ordered_.empty())
      throw std::out_of_range("MinTrackingMap: empty");
    const auto& [value, id] = *ordered_.begin();
    return {id, value};
  }

  std::size_t size() const { return values_.size(); }
  bool empty() const { return values_.empty(); }

  void clear() {
    values_.clear();
    ordered_.clear();
  }

 private:
  struct Cmp {
    bool operator()(const std::pair<double, std::uint32_t>& a,
                    const std::pair<double, std::uint32_t>& b) const {
      if (a.first != b.first) return a.first < b.first;
      return a.second > b.second;
    }
  };

  std::unordered_map<std::uint32_t, double> values_;
  std::set<std::pair<double, std::uint32_t>, Cmp> ordered_;
};

}  // namespace hac
