#pragma once

#include <optional>
#include <vector>

namespace crwrap {

// Greedy leftmost embedding. For the subword relation the greedy strategy is
// complete: if any strictly monotone embedding exists, matching each letter of
// u at the earliest possible position in v also succeeds.
template <class T>
std::optional<std::vector<std::size_t>> subword_embedding(const std::vector<T>& u,
                                                          const std::vector<T>& v) {
  std::vector<std::size_t> map;
  map.reserve(u.size());
  std::size_t j = 0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    while (j < v.size() && !(v[j] == u[i])) ++j;
    if (j == v.size()) return std::nullopt;
    map.push_back(j);
    ++j;
  }
  return map;
}

template <class T>
bool is_subword(const std::vector<T>& u, const std::vector<T>& v) {
  return subword_embedding(u, v).has_value();
}

}  // namespace crwrap
