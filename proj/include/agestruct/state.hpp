#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace agestruct {

/// Moment state G = (P, P_0, ..., P_n) at one instant.
struct StateVector {
  double total = 0.0;
  std::vector<double> moments;

  std::size_t size() const { return moments.size() + 1; }
  std::size_t order() const { return moments.size() - 1; }

  /// Flat (P, P_0, ..., P_n).
  std::vector<double> flatten() const {
    std::vector<double> g;
    g.reserve(size());
    g.push_back(total);
    g.insert(g.end(), moments.begin(), moments.end());
    return g;
  }

  static StateVector from_flat(std::span<const double> g) {
    return StateVector{g[0], std::vector<double>(g.begin() + 1, g.end())};
  }

  StateVector scaled(double factor) const {
    StateVector s{total * factor, moments};
    for (auto& m : s.moments) m *= factor;
    return s;
  }
};

}  // namespace agestruct
