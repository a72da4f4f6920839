#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "ship/core.hpp"
#include "ship/distance.hpp"
#include "ship/error.hpp"
#include "ship/parallel.hpp"
#include "ship/rng.hpp"

namespace ship {

struct NoiseSpec {
  double mu = 0.0;
  // Multiplies the per-channel standard deviation of the source's unpadded region.
  double sigma_scale = 0.1;
};

// V x T noise mask, row-major like LabeledSeries values.
struct Mask {
  std::size_t channels = 0;
  std::size_t length = 0;
  std::vector<double> values;

  double at(std::size_t v, std::size_t t) const { return values[v * length + t]; }
};

// Mask is 1 off the best-match span, PSD(B, s) on it, and 0 on the padded tail.
inline std::pair<Mask, MatchResult> build_mask(const LabeledSeries& x, const Shapelet& s,
                                               bool clamp = false, const DistanceOptions& opts = {}) {
  if (s.size() > x.original_length())
    throw DataError("build_mask: shapelet longer than instance '" + x.id() + "'");
  MatchResult match = psd(x, s.channel, s.values, opts);
  const double on_span = clamp ? std::min(match.psd, 1.0) : match.psd;

  Mask m{x.channels(), x.length(), std::vector<double>(x.channels() * x.length(), 0.0)};
  for (std::size_t v = 0; v < x.channels(); ++v)
    for (std::size_t t = 0; t < x.original_length(); ++t) m.values[v * x.length() + t] = 1.0;
  for (std::size_t t = match.offset; t < match.offset + s.size(); ++t)
    m.values[s.channel * x.length() + t] = on_span;
  return {std::move(m), std::move(match)};
}

inline double channel_stddev(std::span<const double> row) {
  if (row.empty()) return 0.0;
  double mean = 0.0;
  for (double v : row) mean += v;
  mean /= static_cast<double>(row.size());
  double var = 0.0;
  for (double v : row) var += (v - mean) * (v - mean);
  return std::sqrt(var / static_cast<double>(row.size()));
}

// x + E (.) M with E ~ N(mu, sigma_v^2) per channel and one same-class
// shapelet drawn uniformly from those that fit.
inline LabeledSeries augment_instance(const LabeledSeries& x, const ShapeletPool& pool,
                                      const NoiseSpec& spec, SeededRng& rng, std::string new_id,
                                      bool clamp = false, const DistanceOptions& opts = {}) {
  if (spec.sigma_scale < 0.0) throw UsageError("augment: sigma_scale must be >= 0");
  const auto same_class = pool.indices_of(x.label());
  if (same_class.empty())
    throw DataError("augment: pool has no shapelet of class " + x.label().name());
  std::vector<std::size_t> eligible;
  for (std::size_t i : same_class)
    if (pool.shapelets[i].size() <= x.original_length()) eligible.push_back(i);

  Mask mask;
  if (eligible.empty()) {
    // Every same-class shapelet is longer than this instance: no span to
    // protect, so the noise covers the whole unpadded region.
    warn("augment: no class " + x.label().name() + " shapelet fits instance '" + x.id() +
         "'; using an all-ones mask");
    mask = {x.channels(), x.length(), std::vector<double>(x.channels() * x.length(), 0.0)};
    for (std::size_t v = 0; v < x.channels(); ++v)
      for (std::size_t t = 0; t < x.original_length(); ++t) mask.values[v * x.length() + t] = 1.0;
  } else {
    const Shapelet& s = pool.shapelets[eligible[uniform_index(rng, eligible.size())]];
    mask = build_mask(x, s, clamp, opts).first;
  }

  std::vector<double> values = x.values();
  for (std::size_t v = 0; v < x.channels(); ++v) {
    const double sigma = spec.sigma_scale * channel_stddev(x.active(v));
    for (std::size_t t = 0; t < x.original_length(); ++t) {
      const double noise = spec.mu + sigma * standard_normal(rng);
      values[v * x.length() + t] += noise * mask.at(v, t);
    }
  }
  return x.with_values(std::move(values)).with_id(std::move(new_id));
}

inline std::string augmented_id(const std::string& source_id, std::size_t replica) {
  return source_id + "#aug" + std::to_string(replica);
}

inline constexpr std::uint64_t kAugmentStream = 0xA06;

// Appends r_sa augmented copies of every instance outside the most frequent
// class (ties resolved to the first label in sort order). Originals keep their
// order; copies follow grouped by source.
inline Dataset balance_dataset(const Dataset& data, const ShapeletPool& pool, const Config& config) {
  if (config.r_sa == 0 || data.empty()) return data;
  const auto counts = data.class_counts();
  ClassLabel majority = counts.begin()->first;
  std::size_t best = 0;
  for (const auto& [label, n] : counts)
    if (n > best) {
      best = n;
      majority = label;
    }

  std::vector<std::size_t> sources;
  for (std::size_t i = 0; i < data.size(); ++i)
    if (!(data[i].label() == majority)) sources.push_back(i);

  const NoiseSpec spec{config.noise_mu, config.noise_sigma_scale};
  const DistanceOptions opts{config.z_normalize};
  const SeededRng base(config.seed, kAugmentStream);
  std::vector<LabeledSeries> extra(sources.size() * config.r_sa);
  parallel_for(extra.size(), config.threads, [&](std::size_t slot) {
    const std::size_t src = sources[slot / config.r_sa];
    const std::size_t replica = slot % config.r_sa;
    SeededRng rng = derive_stream(base, src, replica);
    extra[slot] = augment_instance(data[src], pool, spec, rng, augmented_id(data[src].id(), replica),
                                   config.clamp_mask, opts);
  });

  Dataset out = data;
  for (auto& x : extra) out.push_back(std::move(x));
  return out;
}

}  // namespace ship
