#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "ship/core.hpp"
#include "ship/distance.hpp"
#include "ship/error.hpp"
#include "ship/parallel.hpp"

namespace ship {

// Z_sha: PSD to every pool shapelet in pool order. A shapelet that cannot fit
// in the instance takes its recorded max_psd.
inline std::vector<double> shapelet_transform(const LabeledSeries& x, const ShapeletPool& pool,
                                              const DistanceOptions& opts = {}) {
  std::vector<double> z(pool.size());
  for (std::size_t j = 0; j < pool.size(); ++j) {
    const Shapelet& s = pool.shapelets[j];
    z[j] = s.size() > x.original_length() ? s.max_psd : psd(x, s.channel, s.values, opts).psd;
  }
  return z;
}

// Signed smooth logarithm, odd and defined on the whole line.
inline double signed_log(double d) { return std::copysign(std::log1p(std::abs(d)), d); }

// Log-signature terms of one unpadded channel, orders 1..depth.
// Order 1 sums phi over consecutive increments. Order n >= 2 sums
// phi(x[b] - x[a]) over all increasing index tuples whose last two entries
// are (a, b); a pair (a, b) closes C(a, n - 2) such tuples.
inline std::vector<double> logsig_channel(std::span<const double> x, std::size_t depth) {
  if (depth < 1) throw UsageError("logsig: depth must be >= 1");
  std::vector<double> out(depth, 0.0);
  const std::size_t n = x.size();
  for (std::size_t t = 1; t < n; ++t) out[0] += signed_log(x[t] - x[t - 1]);
  if (depth < 2) return out;

  // pair_sum[a] = sum over b > a of phi(x[b] - x[a]).
  std::vector<double> pair_sum(n, 0.0);
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = a + 1; b < n; ++b) pair_sum[a] += signed_log(x[b] - x[a]);

  for (std::size_t order = 2; order <= depth; ++order) {
    const std::size_t r = order - 2;
    double total = 0.0;
    double binom = 1.0;  // C(a, r), advanced incrementally in a
    for (std::size_t a = r; a < n; ++a) {
      if (a > r) binom = binom * static_cast<double>(a) / static_cast<double>(a - r);
      total += binom * pair_sum[a];
    }
    out[order - 1] = total;
  }
  return out;
}

// Z_sta, channel-major, length V * depth.
inline std::vector<double> logsig_transform(const LabeledSeries& x, std::size_t depth) {
  std::vector<double> out;
  out.reserve(x.channels() * depth);
  for (std::size_t v = 0; v < x.channels(); ++v) {
    const auto terms = logsig_channel(x.active(v), depth);
    out.insert(out.end(), terms.begin(), terms.end());
  }
  return out;
}

struct FeatureOptions {
  bool use_shapelets = true;
  std::size_t logsig_depth = 2;
  DistanceOptions distance;
};

// Z = concat(Z_sha, Z_sta); Z_sha is empty when shapelet features are off.
inline std::vector<double> feature_vector(const LabeledSeries& x, const ShapeletPool& pool,
                                          const FeatureOptions& opts) {
  std::vector<double> z;
  if (opts.use_shapelets) z = shapelet_transform(x, pool, opts.distance);
  const auto sta = logsig_transform(x, opts.logsig_depth);
  z.insert(z.end(), sta.begin(), sta.end());
  return z;
}

struct FeatureSet {
  std::vector<std::string> ids;
  std::vector<ClassLabel> labels;
  std::vector<std::vector<double>> rows;

  std::size_t size() const { return rows.size(); }
  std::size_t dim() const { return rows.empty() ? 0 : rows.front().size(); }

  friend bool operator==(const FeatureSet&, const FeatureSet&) = default;
};

inline FeatureSet transform_dataset(const Dataset& data, const ShapeletPool& pool,
                                    const FeatureOptions& opts, std::size_t threads = 1) {
  FeatureSet out;
  out.rows.resize(data.size());
  parallel_for(data.size(), threads,
               [&](std::size_t i) { out.rows[i] = feature_vector(data[i], pool, opts); });
  for (const auto& x : data) {
    out.ids.push_back(x.id());
    out.labels.push_back(x.label());
  }
  return out;
}

inline constexpr double kScalerEpsilon = 1e-8;

struct FeatureScaler {
  std::vector<double> mean;
  std::vector<double> stddev;

  std::vector<double> apply(std::span<const double> z) const {
    if (z.size() != mean.size())
      throw DataError("scaler: feature dimension " + std::to_string(z.size()) + ", expected " +
                      std::to_string(mean.size()));
    std::vector<double> out(z.size());
    for (std::size_t j = 0; j < z.size(); ++j) out[j] = (z[j] - mean[j]) / stddev[j];
    return out;
  }

  friend bool operator==(const FeatureScaler&, const FeatureScaler&) = default;
};

// Per-coordinate z-score from training rows; population std floored at eps.
inline FeatureScaler fit_scaler(const std::vector<std::vector<double>>& rows) {
  if (rows.size() < 2) throw DataError("fit_scaler: need at least two training vectors");
  const std::size_t d = rows.front().size();
  FeatureScaler s{std::vector<double>(d, 0.0), std::vector<double>(d, 0.0)};
  for (const auto& r : rows) {
    if (r.size() != d) throw DataError("fit_scaler: ragged feature rows");
    for (std::size_t j = 0; j < d; ++j) s.mean[j] += r[j];
  }
  const auto n = static_cast<double>(rows.size());
  for (double& m : s.mean) m /= n;
  for (const auto& r : rows)
    for (std::size_t j = 0; j < d; ++j) s.stddev[j] += (r[j] - s.mean[j]) * (r[j] - s.mean[j]);
  for (double& v : s.stddev) v = std::max(std::sqrt(v / n), kScalerEpsilon);
  return s;
}

}  // namespace ship
