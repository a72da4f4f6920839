#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "json.hpp"

#include "ship/core.hpp"
#include "ship/distance.hpp"
#include "ship/features.hpp"
#include "ship/model.hpp"

namespace ship {

struct ShapeletEvidence {
  std::size_t shapelet = 0;  // index into the pool
  ClassLabel label;
  std::size_t channel = 0;
  std::size_t offset = 0;
  double psd = 0.0;
  std::vector<double> values;
  std::vector<double> window;
};

struct InstanceExplanation {
  std::string id;
  ClassLabel truth;
  ClassLabel predicted;
  std::vector<double> probabilities;
  std::vector<ShapeletEvidence> evidence;
};

struct ExplainReport {
  std::vector<ClassLabel> labels;
  std::vector<InstanceExplanation> instances;
};

// Prediction plus the best match of every shapelet of the predicted class
// (or of every class). Shapelets that cannot fit the instance are left out.
inline InstanceExplanation explain_instance(const ModelCheckpoint& ckpt, const ShapeletPool& pool,
                                            const LabeledSeries& x, bool all_classes = false) {
  InstanceExplanation out;
  out.id = x.id();
  out.truth = x.label();
  const auto z = feature_vector(x, pool, ckpt.features);
  out.probabilities = predict_proba(ckpt, {z}).front();
  std::size_t best = 0;
  for (std::size_t i = 1; i < out.probabilities.size(); ++i)
    if (out.probabilities[i] > out.probabilities[best]) best = i;
  out.predicted = ckpt.labels[best];

  for (std::size_t j = 0; j < pool.size(); ++j) {
    const Shapelet& s = pool.shapelets[j];
    if (!all_classes && !(s.label == out.predicted)) continue;
    if (s.size() > x.original_length()) continue;
    auto m = psd(x, s.channel, s.values, ckpt.features.distance);
    out.evidence.push_back({j, s.label, s.channel, m.offset, m.psd, s.values, std::move(m.window)});
  }
  return out;
}

inline ExplainReport explain(const ModelCheckpoint& ckpt, const ShapeletPool& pool,
                             const std::vector<const LabeledSeries*>& instances, bool all_classes = false) {
  ExplainReport r;
  r.labels = ckpt.labels;
  for (const auto* x : instances) r.instances.push_back(explain_instance(ckpt, pool, *x, all_classes));
  return r;
}

inline nlohmann::json to_json(const ExplainReport& r) {
  nlohmann::json instances = nlohmann::json::array();
  for (const auto& e : r.instances) {
    nlohmann::json evidence = nlohmann::json::array();
    for (const auto& s : e.evidence)
      evidence.push_back({{"shapelet", s.shapelet},
                          {"label", s.label.name()},
                          {"channel", s.channel},
                          {"offset", s.offset},
                          {"psd", s.psd},
                          {"shapelet_values", s.values},
                          {"window_values", s.window}});
    nlohmann::json probs = nlohmann::json::object();
    for (std::size_t i = 0; i < r.labels.size(); ++i) probs[r.labels[i].name()] = e.probabilities[i];
    instances.push_back({{"id", e.id},
                         {"label", e.truth.name()},
                         {"predicted", e.predicted.name()},
                         {"probabilities", probs},
                         {"shapelets", evidence}});
  }
  return {{"instances", instances}};
}

// One plot-ready document per explained instance: the raw channels on a
// shared time axis and each shapelet overlaid at its best offset.
inline nlohmann::json plot_data(const ExplainReport& r, const Dataset& data) {
  nlohmann::json docs = nlohmann::json::array();
  for (const auto& e : r.instances) {
    const LabeledSeries* x = data.find(e.id);
    if (!x) throw DataError("plot data: instance '" + e.id + "' not in dataset");
    std::vector<std::size_t> time(x->original_length());
    for (std::size_t t = 0; t < time.size(); ++t) time[t] = t;
    nlohmann::json channels = nlohmann::json::object();
    for (std::size_t v = 0; v < x->channels(); ++v) {
      const auto row = x->active(v);
      channels[x->channel_names()[v]] = std::vector<double>(row.begin(), row.end());
    }
    nlohmann::json overlays = nlohmann::json::array();
    for (const auto& s : e.evidence) {
      std::vector<std::size_t> idx(s.values.size());
      for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = s.offset + i;
      overlays.push_back({{"shapelet", s.shapelet},
                          {"label", s.label.name()},
                          {"channel", x->channel_names()[s.channel]},
                          {"start", s.offset},
                          {"time", idx},
                          {"values", s.values},
                          {"psd", s.psd}});
    }
    docs.push_back({{"id", e.id},
                    {"label", e.truth.name()},
                    {"predicted", e.predicted.name()},
                    {"time", time},
                    {"channels", channels},
                    {"overlays", overlays}});
  }
  return docs;
}

}  // namespace ship
