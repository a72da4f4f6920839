#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "ship/core.hpp"
#include "ship/error.hpp"
#include "ship/rng.hpp"

namespace ship {

// Uniformly sampled multichannel recording.
struct RawRecording {
  std::vector<std::string> names;
  std::vector<std::vector<double>> channels;

  std::size_t samples() const { return channels.empty() ? 0 : channels.front().size(); }

  const std::vector<double>* find(const std::string& name) const {
    for (std::size_t i = 0; i < names.size(); ++i)
      if (names[i] == name) return &channels[i];
    return nullptr;
  }
};

inline RawRecording read_recording_csv(std::istream& in, const std::string& where = "<csv>") {
  RawRecording rec;
  std::string line;
  if (!std::getline(in, line)) throw DataError(where + ": empty file");
  {
    std::stringstream header(line);
    std::string name;
    while (std::getline(header, name, ',')) {
      while (!name.empty() && (name.back() == '\r' || name.back() == ' ')) name.pop_back();
      while (!name.empty() && name.front() == ' ') name.erase(name.begin());
      rec.names.push_back(name);
    }
  }
  rec.channels.resize(rec.names.size());
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty() || line == "\r") continue;
    std::stringstream ss(line);
    std::string cell;
    std::size_t col = 0;
    while (std::getline(ss, cell, ',')) {
      if (col >= rec.names.size())
        throw DataError(where + ":" + std::to_string(row) + ": too many columns");
      try {
        std::size_t used = 0;
        rec.channels[col].push_back(std::stod(cell, &used));
      } catch (const std::exception&) {
        throw DataError(where + ":" + std::to_string(row) + ": bad number '" + cell + "'");
      }
      ++col;
    }
    if (col != rec.names.size())
      throw DataError(where + ":" + std::to_string(row) + ": expected " +
                      std::to_string(rec.names.size()) + " columns");
  }
  return rec;
}

inline RawRecording read_recording_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  return read_recording_csv(in, path);
}

struct SegmentConfig {
  std::size_t length = 150;          // T
  std::size_t median_window = 301;   // rolling-median baseline, centered
  double h_on = 2.0;                 // onset: rise above baseline + h_on
  double h_off = 1.0;                // re-arm: fall below baseline + h_off
  std::string trigger = "Pmask";
  std::vector<std::string> channels = {"Pmask", "Flow", "Thor", "Abdo"};
  std::string label = "NP";          // placeholder label for unlabeled segments
};

inline std::vector<double> rolling_median(const std::vector<double>& x, std::size_t window) {
  const std::size_t n = x.size();
  const std::size_t half = window / 2;
  std::vector<double> out(n);
  std::vector<double> buf;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t lo = i >= half ? i - half : 0;
    const std::size_t hi = std::min(n, i + half + 1);
    buf.assign(x.begin() + static_cast<std::ptrdiff_t>(lo), x.begin() + static_cast<std::ptrdiff_t>(hi));
    const auto mid = buf.begin() + static_cast<std::ptrdiff_t>(buf.size() / 2);
    std::nth_element(buf.begin(), mid, buf.end());
    out[i] = *mid;
  }
  return out;
}

// Sample indices where the trigger channel rises through baseline + h_on,
// with hysteresis release at baseline + h_off.
inline std::vector<std::size_t> detect_onsets(const std::vector<double>& trigger, const SegmentConfig& cfg) {
  if (cfg.h_off >= cfg.h_on) throw UsageError("segment: h_off must be below h_on");
  const auto baseline = rolling_median(trigger, std::max<std::size_t>(cfg.median_window, 1));
  std::vector<std::size_t> onsets;
  bool armed = true;
  for (std::size_t i = 0; i < trigger.size(); ++i) {
    const double level = trigger[i] - baseline[i];
    if (armed && level > cfg.h_on) {
      onsets.push_back(i);
      armed = false;
    } else if (!armed && level < cfg.h_off) {
      armed = true;
    }
  }
  return onsets;
}

// One instance per inter-onset interval, truncated or zero-padded to T.
inline std::vector<LabeledSeries> segment(const RawRecording& rec, const SegmentConfig& cfg,
                                          const std::string& id_prefix = "seg") {
  const auto* trigger = rec.find(cfg.trigger);
  if (!trigger) throw DataError("segment: trigger channel '" + cfg.trigger + "' missing");
  std::vector<const std::vector<double>*> rows;
  for (const auto& name : cfg.channels) {
    const auto* ch = rec.find(name);
    if (!ch) throw DataError("segment: channel '" + name + "' missing");
    rows.push_back(ch);
  }
  const auto onsets = detect_onsets(*trigger, cfg);
  std::vector<LabeledSeries> out;
  if (onsets.size() < 2) {
    warn("segment: no complete breath found in recording");
    return out;
  }
  for (std::size_t i = 0; i + 1 < onsets.size(); ++i) {
    const std::size_t begin = onsets[i];
    const std::size_t len = std::min(onsets[i + 1] - begin, cfg.length);
    if (len < 3) continue;
    std::vector<std::vector<double>> slice;
    for (const auto* ch : rows)
      slice.emplace_back(ch->begin() + static_cast<std::ptrdiff_t>(begin),
                         ch->begin() + static_cast<std::ptrdiff_t>(begin + len));
    out.push_back(make_series(id_prefix + std::to_string(i), ClassLabel(cfg.label), slice, cfg.length,
                              cfg.channels));
  }
  return out;
}

inline constexpr std::uint64_t kSplitStream = 0x5B1;

// Stratified random split; both sides receive every class.
inline std::pair<Dataset, Dataset> split(const Dataset& data, double train_fraction, const SeededRng& rng) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0))
    throw UsageError("split: fraction must be in (0, 1)");
  const auto labels = data.labels();
  std::vector<char> to_train(data.size(), 0);
  for (std::size_t c = 0; c < labels.size(); ++c) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < data.size(); ++i)
      if (data[i].label() == labels[c]) idx.push_back(i);
    if (idx.size() < 2)
      throw DataError("split: class " + labels[c].name() + " has fewer than 2 instances");
    SeededRng local = derive_stream(rng, kSplitStream, c);
    shuffle(idx.begin(), idx.end(), local);
    auto n_train = static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(idx.size())));
    n_train = std::clamp<std::size_t>(n_train, 1, idx.size() - 1);
    for (std::size_t i = 0; i < n_train; ++i) to_train[idx[i]] = 1;
  }
  Dataset train_set, val_set;
  for (std::size_t i = 0; i < data.size(); ++i) (to_train[i] ? train_set : val_set).push_back(data[i]);
  return {std::move(train_set), std::move(val_set)};
}

// Fold index per instance for stratified K-fold. folds == size gives
// leave-one-out; otherwise every class must reach every fold.
inline std::vector<std::size_t> stratified_folds(const Dataset& data, std::size_t folds, const SeededRng& rng) {
  if (folds < 2) throw UsageError("folds must be >= 2");
  if (folds > data.size()) throw UsageError("more folds than instances");
  std::vector<std::size_t> fold(data.size(), 0);
  if (folds == data.size()) {
    for (std::size_t i = 0; i < data.size(); ++i) fold[i] = i;
    return fold;
  }
  const auto labels = data.labels();
  std::size_t cursor = 0;
  for (std::size_t c = 0; c < labels.size(); ++c) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < data.size(); ++i)
      if (data[i].label() == labels[c]) idx.push_back(i);
    if (idx.size() < folds)
      throw DataError("stratification: class " + labels[c].name() + " has " + std::to_string(idx.size()) +
                      " instances for " + std::to_string(folds) + " folds");
    SeededRng local = derive_stream(rng, c);
    shuffle(idx.begin(), idx.end(), local);
    // Continue the round-robin across classes so fold sizes stay balanced.
    for (std::size_t i : idx) fold[i] = cursor++ % folds;
  }
  return fold;
}

inline Dataset subset_channels(const Dataset& data, const std::vector<std::size_t>& indices) {
  if (indices.empty()) throw UsageError("subset_channels: no channels selected");
  const std::size_t v_in = data.channels();
  for (std::size_t i : indices)
    if (i >= v_in)
      throw UsageError("subset_channels: channel " + std::to_string(i) + " out of range (V = " +
                       std::to_string(v_in) + ")");
  Dataset out;
  for (const auto& x : data) {
    std::vector<double> values;
    values.reserve(indices.size() * x.length());
    std::vector<std::string> names;
    for (std::size_t i : indices) {
      const auto row = x.channel(i);
      values.insert(values.end(), row.begin(), row.end());
      names.push_back(x.channel_names()[i]);
    }
    out.push_back(LabeledSeries(x.id(), x.label(), indices.size(), x.length(), std::move(values),
                                x.original_length(), std::move(names)));
  }
  return out;
}

}  // namespace ship
