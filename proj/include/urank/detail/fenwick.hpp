#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace urank::detail {

// Counts over ranks 0..size-1 with O(log n) point update and prefix query.
class Fenwick {
 public:
  explicit Fenwick(std::size_t size) : tree_(size + 1, 0) {}

  void add(std::size_t rank, std::int64_t delta) {
    for (std::size_t i = rank + 1; i < tree_.size(); i += i & (~i + 1)) tree_[i] += delta;
  }

  // Sum over ranks [0, rank).
  std::int64_t prefix(std::size_t rank) const {
    std::int64_t s = 0;
    for (std::size_t i = rank; i > 0; i -= i & (~i + 1)) s += tree_[i];
    return s;
  }

 private:
  std::vector<std::int64_t> tree_;
};

}  // namespace urank::detail
