#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "ship/core.hpp"
#include "ship/error.hpp"

namespace ship {

inline constexpr double kCidEpsilon = 1e-8;

struct DistanceOptions {
  // z-normalize windows and queries before comparing. Off by default.
  bool z_normalize = false;
};

struct MatchResult {
  double psd = 0.0;
  std::size_t offset = 0;
  std::vector<double> window;
};

// Root of the summed squared first differences.
inline double complexity_estimate(std::span<const double> q) {
  double sum = 0.0;
  for (std::size_t i = 1; i < q.size(); ++i) {
    const double d = q[i] - q[i - 1];
    sum += d * d;
  }
  return std::sqrt(sum);
}

// Complexity correction factor max(CE)/min(CE), with both terms floored at
// kCidEpsilon: two flat series compare at factor 1, one flat one not at 1/eps.
inline double complexity_factor(double ce_a, double ce_b) {
  const double hi = std::max({ce_a, ce_b, kCidEpsilon});
  const double lo = std::max(std::min(ce_a, ce_b), kCidEpsilon);
  return hi / lo;
}

inline double euclidean(std::span<const double> a, std::span<const double> b) {
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    sum += d * d;
  }
  return std::sqrt(sum);
}

// Complexity-invariant distance.
inline double cid(std::span<const double> q, std::span<const double> s) {
  if (q.size() != s.size())
    throw Error("cid: length mismatch (" + std::to_string(q.size()) + " vs " +
                std::to_string(s.size()) + ")");
  return euclidean(q, s) * complexity_factor(complexity_estimate(q), complexity_estimate(s));
}

inline std::vector<double> z_normalized(std::span<const double> q) {
  std::vector<double> out(q.begin(), q.end());
  if (q.empty()) return out;
  double mean = 0.0;
  for (double v : q) mean += v;
  mean /= static_cast<double>(q.size());
  double var = 0.0;
  for (double v : q) var += (v - mean) * (v - mean);
  const double sd = std::sqrt(var / static_cast<double>(q.size()));
  for (double& v : out) v = sd > kCidEpsilon ? (v - mean) / sd : 0.0;
  return out;
}

// Minimum CID between s and every same-length window of the unpadded
// sequence; ties keep the earliest window. The scan takes window complexity
// from prefix sums and early-abandons windows whose partial squared distance
// already exceeds the best. The reported psd is recomputed with cid() on the
// winning window.
inline MatchResult psd(std::span<const double> series, std::span<const double> s,
                       const DistanceOptions& opts = {}) {
  const std::size_t n = series.size();
  const std::size_t l = s.size();
  if (l == 0) throw Error("psd: empty query");
  if (l > n)
    throw DataError("psd: shapelet of length " + std::to_string(l) +
                    " does not fit in a series of length " + std::to_string(n));

  std::vector<double> query(s.begin(), s.end());
  if (opts.z_normalize) query = z_normalized(s);
  const double ce_s = complexity_estimate(query);

  // prefix[i]: squared first differences summed over [0, i].
  // level[i]: values summed over [0, i).
  std::vector<double> prefix, level;
  double query_sum = 0.0;
  if (!opts.z_normalize) {
    prefix.assign(n, 0.0);
    level.assign(n + 1, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      if (i > 0) {
        const double d = series[i] - series[i - 1];
        prefix[i] = prefix[i - 1] + d * d;
      }
      level[i + 1] = level[i] + series[i];
    }
    for (double v : query) query_sum += v;
  }
  const double inv_l = 1.0 / static_cast<double>(l);

  std::vector<double> buffer;
  double best = std::numeric_limits<double>::infinity();
  std::size_t best_j = 0;
  for (std::size_t j = 0; j + l <= n; ++j) {
    std::span<const double> window = series.subspan(j, l);
    double ce_w = 0.0;
    if (opts.z_normalize) {
      buffer = z_normalized(window);
      window = buffer;
      ce_w = complexity_estimate(window);
    } else {
      ce_w = std::sqrt(std::max(0.0, prefix[j + l - 1] - prefix[j]));
    }
    const double cf = complexity_factor(ce_w, ce_s);
    // Slack keeps rounding in the bound from abandoning a true winner.
    const double bound = best / cf;
    const double bound_sq = bound * bound * (1.0 + 1e-9);
    // ED^2 >= (sum(w) - sum(q))^2 / l (Cauchy-Schwarz).
    if (!opts.z_normalize) {
      const double gap = level[j + l] - level[j] - query_sum;
      if (gap * gap * inv_l > bound_sq * (1.0 + 1e-9)) continue;
    }
    double sum = 0.0;
    bool abandoned = false;
    for (std::size_t i = 0; i < l; ++i) {
      const double d = window[i] - query[i];
      sum += d * d;
      if (sum > bound_sq) {
        abandoned = true;
        break;
      }
    }
    if (abandoned) continue;
    const double value = std::sqrt(sum) * cf;
    if (value < best) {
      best = value;
      best_j = j;
    }
  }

  MatchResult out;
  out.offset = best_j;
  out.window.assign(series.begin() + static_cast<std::ptrdiff_t>(best_j),
                    series.begin() + static_cast<std::ptrdiff_t>(best_j + l));
  out.psd = opts.z_normalize ? cid(z_normalized(out.window), query) : cid(out.window, query);
  return out;
}

// PSD of one channel of an instance, restricted to its unpadded prefix.
inline MatchResult psd(const LabeledSeries& x, std::size_t channel, std::span<const double> s,
                       const DistanceOptions& opts = {}) {
  if (channel >= x.channels())
    throw DataError("psd: channel " + std::to_string(channel) + " out of range for instance '" +
                    x.id() + "'");
  return psd(x.active(channel), s, opts);
}

}  // namespace ship
