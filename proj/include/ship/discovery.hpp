#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <map>
#include <set>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "ship/core.hpp"
#include "ship/distance.hpp"
#include "ship/error.hpp"
#include "ship/parallel.hpp"
#include "ship/pip.hpp"
#include "ship/rng.hpp"

namespace ship {

struct Candidate {
  std::vector<double> values;
  std::size_t channel = 0;
  std::string source_id;
  std::size_t start = 0;
  std::size_t end = 0;
  ClassLabel label;

  friend bool operator==(const Candidate&, const Candidate&) = default;
};

inline constexpr std::size_t kMinCandidateLength = 3;

// Candidates from three consecutive PIPs around every insertion, per channel.
// Instances shorter than k yield nothing (with a warning).
inline std::vector<Candidate> generate_candidates(const LabeledSeries& x, std::size_t k) {
  if (k < 3) throw UsageError("generate_candidates: k must be >= 3");
  std::vector<Candidate> out;
  if (x.original_length() < k) {
    warn("instance '" + x.id() + "' (length " + std::to_string(x.original_length()) +
         ") is shorter than k = " + std::to_string(k) + "; skipped for discovery");
    return out;
  }
  std::set<std::tuple<std::size_t, std::size_t, std::size_t>> seen;
  for (std::size_t v = 0; v < x.channels(); ++v) {
    const auto row = x.active(v);
    for (const auto& state : extract_pips_incremental(row, k)) {
      const auto& p = state.pips;
      const std::size_t idx = state.position;
      for (std::size_t z = 0; z <= 2; ++z) {
        if (idx < z || idx + 2 - z > p.size() - 1) continue;
        const std::size_t s = p[idx - z];
        const std::size_t e = p[idx + 2 - z];
        if (e - s + 1 < kMinCandidateLength) continue;
        if (!seen.emplace(v, s, e).second) continue;
        Candidate c;
        c.values.assign(row.begin() + static_cast<std::ptrdiff_t>(s),
                        row.begin() + static_cast<std::ptrdiff_t>(e + 1));
        c.channel = v;
        c.source_id = x.id();
        c.start = s;
        c.end = e;
        c.label = x.label();
        out.push_back(std::move(c));
      }
    }
  }
  return out;
}

struct SplitScore {
  double gain = 0.0;       // bits
  double threshold = 0.0;  // instances with distance < threshold go left

  friend bool operator==(const SplitScore&, const SplitScore&) = default;
};

inline double binary_entropy(std::size_t pos, std::size_t total) {
  if (total == 0 || pos == 0 || pos == total) return 0.0;
  const double p = static_cast<double>(pos) / static_cast<double>(total);
  const double q = 1.0 - p;
  return -(p * std::log2(p) + q * std::log2(q));
}

// One-vs-rest information gain of the best threshold split. Thresholds sit at
// midpoints between consecutive distinct distances; gain ties keep the
// smallest threshold.
inline SplitScore information_gain(std::vector<std::pair<double, bool>> distances) {
  if (distances.empty()) throw Error("information_gain: no distances");
  std::sort(distances.begin(), distances.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  const std::size_t n = distances.size();
  std::size_t total_pos = 0;
  for (const auto& d : distances) total_pos += d.second ? 1 : 0;

  SplitScore best{0.0, distances.front().first};
  const double parent = binary_entropy(total_pos, n);
  if (parent == 0.0) return best;

  bool found = false;
  std::size_t left_pos = 0;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    left_pos += distances[i].second ? 1 : 0;
    if (distances[i].first == distances[i + 1].first) continue;
    const std::size_t left = i + 1;
    const std::size_t right = n - left;
    const double children =
        (static_cast<double>(left) * binary_entropy(left_pos, left) +
         static_cast<double>(right) * binary_entropy(total_pos - left_pos, right)) /
        static_cast<double>(n);
    const double gain = parent - children;
    if (!found || gain > best.gain) {
      best = {gain, 0.5 * (distances[i].first + distances[i + 1].first)};
      found = true;
    }
  }
  best.gain = std::max(0.0, best.gain);
  return best;
}

// Strict weak order used for selection: higher gain first, then shorter,
// earlier, and lexicographically smaller source.
inline bool shapelet_precedes(const Shapelet& a, const Shapelet& b) {
  if (a.info_gain != b.info_gain) return a.info_gain > b.info_gain;
  if (a.size() != b.size()) return a.size() < b.size();
  if (a.start != b.start) return a.start < b.start;
  if (a.source_id != b.source_id) return a.source_id < b.source_id;
  if (a.channel != b.channel) return a.channel < b.channel;
  return a.end < b.end;
}

// PSD of the candidate to every instance on its channel, then the best split.
// Instances the candidate cannot fit in score the largest finite PSD.
inline Shapelet score_candidate(const Candidate& c, const Dataset& data,
                                const DistanceOptions& opts = {}) {
  std::vector<std::pair<double, bool>> distances;
  distances.reserve(data.size());
  std::vector<std::size_t> unfit;
  double max_psd = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto& x = data[i];
    const bool target = x.label() == c.label;
    if (c.values.size() > x.original_length()) {
      unfit.push_back(i);
      distances.emplace_back(0.0, target);
      continue;
    }
    const double d = psd(x, c.channel, c.values, opts).psd;
    max_psd = std::max(max_psd, d);
    distances.emplace_back(d, target);
  }
  for (std::size_t i : unfit) distances[i].first = max_psd;

  const SplitScore score = information_gain(std::move(distances));
  Shapelet s;
  s.values = c.values;
  s.channel = c.channel;
  s.source_id = c.source_id;
  s.start = c.start;
  s.end = c.end;
  s.label = c.label;
  s.info_gain = score.gain;
  s.split_threshold = score.threshold;
  s.max_psd = max_psd;
  return s;
}

inline constexpr std::uint64_t kDiscoveryStream = 0xD15C;

// Instances that seed candidates: all of them, or a seeded sample of
// `per_class` per class kept in dataset order.
inline std::vector<std::size_t> candidate_sources(const Dataset& data, std::size_t per_class,
                                                  std::uint64_t seed) {
  std::vector<std::size_t> out;
  if (per_class == 0) {
    for (std::size_t i = 0; i < data.size(); ++i) out.push_back(i);
    return out;
  }
  const SeededRng base(seed, kDiscoveryStream);
  const auto labels = data.labels();
  for (std::size_t c = 0; c < labels.size(); ++c) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < data.size(); ++i)
      if (data[i].label() == labels[c]) idx.push_back(i);
    if (idx.size() > per_class) {
      SeededRng rng = derive_stream(base, c);
      shuffle(idx.begin(), idx.end(), rng);
      idx.resize(per_class);
    }
    out.insert(out.end(), idx.begin(), idx.end());
  }
  std::sort(out.begin(), out.end());
  return out;
}

struct DiscoveryStats {
  std::size_t sources = 0;
  std::size_t candidates = 0;
};

// Offline shapelet discovery: PIP candidates from the source instances, each
// scored against every instance, top g/|Y| per class kept.
inline ShapeletPool discover(const Dataset& data, const Config& config,
                             DiscoveryStats* stats = nullptr) {
  const auto labels = data.labels();
  if (labels.size() < 2) throw DataError("discover: need at least two classes");
  if (config.k < 3) throw UsageError("discover: k must be >= 3");

  const auto sources = candidate_sources(data, config.sources_per_class, config.seed);
  std::vector<std::vector<Candidate>> per_source(sources.size());
  parallel_for(sources.size(), config.threads,
               [&](std::size_t i) { per_source[i] = generate_candidates(data[sources[i]], config.k); });
  std::vector<Candidate> candidates;
  for (auto& group : per_source)
    for (auto& c : group) candidates.push_back(std::move(c));

  const DistanceOptions opts{config.z_normalize};
  std::vector<Shapelet> scored(candidates.size());
  parallel_for(candidates.size(), config.threads,
               [&](std::size_t i) { scored[i] = score_candidate(candidates[i], data, opts); });

  if (stats) *stats = {sources.size(), candidates.size()};

  ShapeletPool pool;
  pool.per_class_quota = per_class_quota(config.g, labels.size());
  for (const auto& label : labels) {
    std::vector<Shapelet> mine;
    for (const auto& s : scored)
      if (s.label == label) mine.push_back(s);
    std::sort(mine.begin(), mine.end(), shapelet_precedes);
    if (mine.size() < pool.per_class_quota)
      warn("class " + label.name() + " has only " + std::to_string(mine.size()) +
           " candidates for a quota of " + std::to_string(pool.per_class_quota));
    mine.resize(std::min(mine.size(), pool.per_class_quota));
    for (auto& s : mine) pool.shapelets.push_back(std::move(s));
  }
  return pool;
}

}  // namespace ship
