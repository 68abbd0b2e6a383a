#pragma once

// Reference edit distance by plain recursion over (i, j) suffixes with a
// memo table. Deliberately structured unlike the library's rolling-row DP.

#include <algorithm>
#include <cstddef>
#include <string>
#include <vector>

namespace oracle {

inline std::size_t edit_distance(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  const std::size_t n = a.size(), m = b.size();
  std::vector<std::vector<long>> memo(n + 1, std::vector<long>(m + 1, -1));
  auto go = [&](auto&& self, std::size_t i, std::size_t j) -> std::size_t {
    if (i == n) return m - j;
    if (j == m) return n - i;
    auto& slot = memo[i][j];
    if (slot >= 0) return static_cast<std::size_t>(slot);
    std::size_t best = std::min(self(self, i + 1, j), self(self, i, j + 1)) + 1;
    best = std::min(best, self(self, i + 1, j + 1) + (a[i] == b[j] ? 0 : 1));
    slot = static_cast<long>(best);
    return best;
  };
  return go(go, 0, 0);
}

}  // namespace oracle
