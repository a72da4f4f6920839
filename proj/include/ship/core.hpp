#pragma once

#include <algorithm>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ship/error.hpp"

namespace ship {

// Class label. Any finite label set works; the four ventilator classes sort
// first in their conventional order (NP, AC, DT, IE), others by name.
class ClassLabel {
 public:
  ClassLabel() = default;
  explicit ClassLabel(std::string name) : name_(std::move(name)) {
    if (name_.empty()) throw DataError("empty class label");
  }

  const std::string& name() const { return name_; }

  int rank() const {
    static const char* const kKnown[] = {"NP", "AC", "DT", "IE"};
    for (int i = 0; i < 4; ++i)
      if (name_ == kKnown[i]) return i;
    return 4;
  }

  friend bool operator==(const ClassLabel& a, const ClassLabel& b) { return a.name_ == b.name_; }
  friend std::strong_ordering operator<=>(const ClassLabel& a, const ClassLabel& b) {
    if (auto c = a.rank() <=> b.rank(); c != 0) return c;
    return a.name_.compare(b.name_) <=> 0;
  }

 private:
  std::string name_;
};

// One multivariate instance: V channels by T points, zero beyond original_length.
class LabeledSeries {
 public:
  LabeledSeries() = default;

  LabeledSeries(std::string id, ClassLabel label, std::size_t channels, std::size_t length,
                std::vector<double> values, std::size_t original_length,
                std::vector<std::string> channel_names)
      : id_(std::move(id)),
        label_(std::move(label)),
        channels_(channels),
        length_(length),
        original_length_(original_length),
        values_(std::move(values)),
        channel_names_(std::move(channel_names)) {
    validate();
  }

  const std::string& id() const { return id_; }
  const ClassLabel& label() const { return label_; }
  std::size_t channels() const { return channels_; }
  std::size_t length() const { return length_; }
  std::size_t original_length() const { return original_length_; }
  const std::vector<std::string>& channel_names() const { return channel_names_; }
  const std::vector<double>& values() const { return values_; }

  double at(std::size_t v, std::size_t t) const { return values_[v * length_ + t]; }

  // Full padded row.
  std::span<const double> channel(std::size_t v) const {
    return {values_.data() + v * length_, length_};
  }
  // Unpadded prefix of a row; every computation works on this view.
  std::span<const double> active(std::size_t v) const {
    return {values_.data() + v * length_, original_length_};
  }

  LabeledSeries with_id(std::string id) const {
    LabeledSeries out = *this;
    out.id_ = std::move(id);
    return out;
  }
  LabeledSeries with_label(ClassLabel label) const {
    LabeledSeries out = *this;
    out.label_ = std::move(label);
    return out;
  }
  LabeledSeries with_values(std::vector<double> values) const {
    return LabeledSeries(id_, label_, channels_, length_, std::move(values), original_length_,
                         channel_names_);
  }

  friend bool operator==(const LabeledSeries&, const LabeledSeries&) = default;

 private:
  void validate() const {
    if (channels_ == 0) throw DataError("instance '" + id_ + "': no channels");
    if (values_.size() != channels_ * length_)
      throw DataError("instance '" + id_ + "': value matrix is not V x T");
    if (channel_names_.size() != channels_)
      throw DataError("instance '" + id_ + "': channel name count differs from V");
    if (original_length_ < 3)
      throw DataError("instance '" + id_ + "': original_length < 3");
    if (original_length_ > length_)
      throw DataError("instance '" + id_ + "': original_length exceeds T");
    for (std::size_t v = 0; v < channels_; ++v)
      for (std::size_t t = original_length_; t < length_; ++t)
        if (values_[v * length_ + t] != 0.0)
          throw DataError("instance '" + id_ + "': nonzero value in padded region");
  }

  std::string id_;
  ClassLabel label_;
  std::size_t channels_ = 0;
  std::size_t length_ = 0;
  std::size_t original_length_ = 0;
  std::vector<double> values_;
  std::vector<std::string> channel_names_;
};

// Builds a padded instance from unpadded channel rows of equal length.
inline LabeledSeries make_series(std::string id, ClassLabel label,
                                 const std::vector<std::vector<double>>& rows, std::size_t length,
                                 std::vector<std::string> channel_names = {}) {
  if (rows.empty()) throw DataError("instance '" + id + "': no channels");
  const std::size_t original = rows.front().size();
  for (const auto& r : rows)
    if (r.size() != original) throw DataError("instance '" + id + "': ragged channels");
  if (original > length) throw DataError("instance '" + id + "': longer than T");
  std::vector<double> values(rows.size() * length, 0.0);
  for (std::size_t v = 0; v < rows.size(); ++v)
    std::copy(rows[v].begin(), rows[v].end(), values.begin() + static_cast<std::ptrdiff_t>(v * length));
  if (channel_names.empty())
    for (std::size_t v = 0; v < rows.size(); ++v) channel_names.push_back("ch" + std::to_string(v));
  return LabeledSeries(std::move(id), std::move(label), rows.size(), length, std::move(values),
                       original, std::move(channel_names));
}

class Dataset {
 public:
  Dataset() = default;
  explicit Dataset(std::vector<LabeledSeries> instances) : instances_(std::move(instances)) {
    for (const auto& x : instances_) check_shape(x);
  }

  void push_back(LabeledSeries x) {
    check_shape(x);
    instances_.push_back(std::move(x));
  }

  const std::vector<LabeledSeries>& instances() const { return instances_; }
  std::size_t size() const { return instances_.size(); }
  bool empty() const { return instances_.empty(); }
  const LabeledSeries& operator[](std::size_t i) const { return instances_[i]; }
  auto begin() const { return instances_.begin(); }
  auto end() const { return instances_.end(); }

  std::size_t channels() const { return empty() ? 0 : instances_.front().channels(); }
  std::size_t length() const { return empty() ? 0 : instances_.front().length(); }
  const std::vector<std::string>& channel_names() const {
    static const std::vector<std::string> none;
    return empty() ? none : instances_.front().channel_names();
  }

  std::map<ClassLabel, std::size_t> class_counts() const {
    std::map<ClassLabel, std::size_t> counts;
    for (const auto& x : instances_) ++counts[x.label()];
    return counts;
  }

  // Sorted label set present in the data.
  std::vector<ClassLabel> labels() const {
    std::vector<ClassLabel> out;
    for (const auto& [label, n] : class_counts()) out.push_back(label);
    return out;
  }

  std::size_t min_original_length() const {
    std::size_t m = length();
    for (const auto& x : instances_) m = std::min(m, x.original_length());
    return m;
  }

  const LabeledSeries* find(const std::string& id) const {
    for (const auto& x : instances_)
      if (x.id() == id) return &x;
    return nullptr;
  }

  friend bool operator==(const Dataset&, const Dataset&) = default;

 private:
  void check_shape(const LabeledSeries& x) const {
    if (instances_.empty()) return;
    const auto& first = instances_.front();
    if (x.channels() != first.channels() || x.length() != first.length())
      throw DataError("instance '" + x.id() + "': shape differs from the rest of the dataset");
  }

  std::vector<LabeledSeries> instances_;
};

// A discovered subsequence. Spans are 0-based and inclusive.
struct Shapelet {
  std::vector<double> values;
  std::size_t channel = 0;
  std::string source_id;
  std::size_t start = 0;
  std::size_t end = 0;
  ClassLabel label;
  double info_gain = 0.0;
  double split_threshold = 0.0;
  // Largest finite PSD seen on the discovery set; stands in when the
  // shapelet cannot fit inside an instance.
  double max_psd = 0.0;

  std::size_t size() const { return values.size(); }

  friend bool operator==(const Shapelet&, const Shapelet&) = default;
};

struct ShapeletPool {
  std::vector<Shapelet> shapelets;
  std::size_t per_class_quota = 0;

  std::size_t size() const { return shapelets.size(); }

  std::vector<std::size_t> indices_of(const ClassLabel& label) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < shapelets.size(); ++i)
      if (shapelets[i].label == label) out.push_back(i);
    return out;
  }

  friend bool operator==(const ShapeletPool&, const ShapeletPool&) = default;
};

struct TrainConfig {
  double learning_rate = 1e-3;
  std::size_t batch_size = 256;
  std::size_t max_epochs = 100;
  std::size_t patience = 10;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_eps = 1e-8;
  std::size_t hidden1 = 512;
  std::size_t hidden2 = 256;

  friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

struct Config {
  std::size_t k = 10;
  std::size_t g = 40;
  std::size_t r_sa = 10;
  double noise_mu = 0.0;
  double noise_sigma_scale = 0.1;
  std::size_t logsig_depth = 2;
  std::optional<std::vector<std::size_t>> channel_subset;
  std::uint64_t seed = 0;
  bool clamp_mask = false;
  bool z_normalize = false;
  // Candidate source instances sampled per class for discovery; 0 = all.
  std::size_t sources_per_class = 10;
  bool rediscover_after_augment = false;
  bool use_augmentation = true;
  bool use_shapelet_features = true;
  TrainConfig train;
  // Execution only; never affects results.
  std::size_t threads = 1;

  friend bool operator==(const Config&, const Config&) = default;
};

// Quota per class: g / |Y|, rounded down.
inline std::size_t per_class_quota(std::size_t g, std::size_t num_classes) {
  if (num_classes == 0) return 0;
  return g / num_classes;
}

}  // namespace ship
