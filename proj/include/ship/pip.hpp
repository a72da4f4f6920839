#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "ship/error.hpp"

namespace ship {

// Perpendicular distance from (t, y[t]) to the chord through (a, y[a]) and
// (b, y[b]), with time measured in index units.
inline double reconstruction_distance(std::span<const double> series, std::size_t a, std::size_t b,
                                      std::size_t t) {
  const double dx = static_cast<double>(b) - static_cast<double>(a);
  const double dy = series[b] - series[a];
  const double px = static_cast<double>(t) - static_cast<double>(a);
  const double py = series[t] - series[a];
  return std::abs(dx * py - dy * px) / std::hypot(dx, dy);
}

struct PipState {
  std::vector<std::size_t> pips;  // sorted, contains both endpoints
  std::size_t added = 0;          // index inserted at this step
  std::size_t position = 0;       // where it landed in pips
};

// Runs the k-2 PIP insertions on the sequence and returns the state after
// each one. Maximization ties go to the smallest index.
inline std::vector<PipState> extract_pips_incremental(std::span<const double> series, std::size_t k) {
  const std::size_t n = series.size();
  if (k < 3) throw UsageError("extract_pips: k must be >= 3, got " + std::to_string(k));
  if (n < k)
    throw DataError("extract_pips: series of length " + std::to_string(n) + " is shorter than k = " +
                    std::to_string(k));

  // dist[t] caches the distance of t to its current bracketing chord; only the
  // two segments around a new PIP change after an insertion.
  std::vector<double> dist(n, -1.0);
  auto refresh = [&](std::size_t a, std::size_t b) {
    for (std::size_t t = a + 1; t < b; ++t) dist[t] = reconstruction_distance(series, a, b, t);
  };

  std::vector<std::size_t> pips{0, n - 1};
  refresh(0, n - 1);

  std::vector<PipState> states;
  states.reserve(k - 2);
  for (std::size_t step = 0; step + 2 < k; ++step) {
    std::size_t best_t = n;
    double best_d = -1.0;
    for (std::size_t t = 1; t + 1 < n; ++t) {
      if (dist[t] > best_d) {
        best_d = dist[t];
        best_t = t;
      }
    }
    const auto it = std::lower_bound(pips.begin(), pips.end(), best_t);
    const auto pos = static_cast<std::size_t>(it - pips.begin());
    pips.insert(it, best_t);
    dist[best_t] = -1.0;
    refresh(pips[pos - 1], best_t);
    refresh(best_t, pips[pos + 1]);
    states.push_back({pips, best_t, pos});
  }
  return states;
}

}  // namespace ship
