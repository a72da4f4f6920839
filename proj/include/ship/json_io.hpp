#pragma once

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "ship/core.hpp"
#include "ship/error.hpp"
#include "ship/features.hpp"
#include "ship/model.hpp"

namespace ship {

using json = nlohmann::json;

// ---- files ----

inline std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Writes through a temporary in the same directory, then renames.
inline void write_text_atomic(const std::string& path, const std::string& text) {
  const std::filesystem::path target(path);
  if (target.has_parent_path()) std::filesystem::create_directories(target.parent_path());
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + tmp);
    out << text;
    if (!out) throw Error("write failed: " + tmp);
  }
  std::filesystem::rename(tmp, target);
}

inline json read_json_file(const std::string& path) {
  try {
    return json::parse(read_text(path));
  } catch (const json::exception& e) {
    throw DataError(path + ": " + e.what());
  }
}

inline void write_json_file(const std::string& path, const json& j) { write_text_atomic(path, j.dump(1) + "\n"); }

// ---- config ----

inline json to_json(const TrainConfig& c) {
  return {{"learning_rate", c.learning_rate}, {"batch_size", c.batch_size}, {"max_epochs", c.max_epochs},
          {"patience", c.patience},           {"beta1", c.beta1},           {"beta2", c.beta2},
          {"adam_eps", c.adam_eps},           {"hidden1", c.hidden1},       {"hidden2", c.hidden2}};
}

template <typename T>
void read_opt(const json& j, const char* key, T& into) {
  if (!j.contains(key) || j.at(key).is_null()) return;
  try {
    into = j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw UsageError(std::string("config key '") + key + "': " + e.what());
  }
}

inline TrainConfig train_config_from_json(const json& j, TrainConfig c = {}) {
  read_opt(j, "learning_rate", c.learning_rate);
  read_opt(j, "batch_size", c.batch_size);
  read_opt(j, "max_epochs", c.max_epochs);
  read_opt(j, "patience", c.patience);
  read_opt(j, "beta1", c.beta1);
  read_opt(j, "beta2", c.beta2);
  read_opt(j, "adam_eps", c.adam_eps);
  read_opt(j, "hidden1", c.hidden1);
  read_opt(j, "hidden2", c.hidden2);
  return c;
}

// Threads are excluded: they never change results.
inline json to_json(const Config& c) {
  json j = {{"k", c.k},
            {"g", c.g},
            {"r_sa", c.r_sa},
            {"noise_mu", c.noise_mu},
            {"sigma_scale", c.noise_sigma_scale},
            {"logsig_depth", c.logsig_depth},
            {"channels", nullptr},
            {"seed", c.seed},
            {"clamp_mask", c.clamp_mask},
            {"z_normalize", c.z_normalize},
            {"sources_per_class", c.sources_per_class},
            {"rediscover_after_augment", c.rediscover_after_augment},
            {"use_augmentation", c.use_augmentation},
            {"use_shapelet_features", c.use_shapelet_features},
            {"train", to_json(c.train)}};
  if (c.channel_subset) j["channels"] = *c.channel_subset;
  return j;
}

inline Config config_from_json(const json& j, Config c = {}) {
  if (!j.is_object()) throw UsageError("config must be a JSON object");
  read_opt(j, "k", c.k);
  read_opt(j, "g", c.g);
  read_opt(j, "r_sa", c.r_sa);
  read_opt(j, "noise_mu", c.noise_mu);
  read_opt(j, "sigma_scale", c.noise_sigma_scale);
  read_opt(j, "logsig_depth", c.logsig_depth);
  if (j.contains("channels") && !j.at("channels").is_null())
    c.channel_subset = j.at("channels").get<std::vector<std::size_t>>();
  read_opt(j, "seed", c.seed);
  read_opt(j, "clamp_mask", c.clamp_mask);
  read_opt(j, "z_normalize", c.z_normalize);
  read_opt(j, "sources_per_class", c.sources_per_class);
  read_opt(j, "rediscover_after_augment", c.rediscover_after_augment);
  read_opt(j, "use_augmentation", c.use_augmentation);
  read_opt(j, "use_shapelet_features", c.use_shapelet_features);
  read_opt(j, "threads", c.threads);
  if (j.contains("train")) c.train = train_config_from_json(j.at("train"), c.train);
  return c;
}

// FNV-1a over the canonical config dump, hex.
inline std::string config_hash(const Config& c) {
  const std::string text = to_json(c).dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

// ---- dataset (NDJSON) ----

inline json to_json(const LabeledSeries& x) {
  json values = json::array();
  for (std::size_t v = 0; v < x.channels(); ++v) {
    const auto row = x.channel(v);
    values.push_back(std::vector<double>(row.begin(), row.end()));
  }
  return {{"id", x.id()},
          {"label", x.label().name()},
          {"original_length", x.original_length()},
          {"channels", x.channel_names()},
          {"values", std::move(values)}};
}

inline LabeledSeries series_from_json(const json& j) {
  try {
    const auto rows = j.at("values").get<std::vector<std::vector<double>>>();
    if (rows.empty()) throw DataError("instance has no channels");
    const std::size_t length = rows.front().size();
    std::vector<double> values;
    values.reserve(rows.size() * length);
    for (const auto& r : rows) {
      if (r.size() != length) throw DataError("instance '" + j.value("id", "?") + "': ragged channels");
      values.insert(values.end(), r.begin(), r.end());
    }
    return LabeledSeries(j.at("id").get<std::string>(), ClassLabel(j.at("label").get<std::string>()),
                         rows.size(), length, std::move(values), j.at("original_length").get<std::size_t>(),
                         j.at("channels").get<std::vector<std::string>>());
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed instance: ") + e.what());
  }
}

inline std::string to_ndjson(const Dataset& data) {
  std::string out;
  for (const auto& x : data) {
    out += to_json(x).dump();
    out += '\n';
  }
  return out;
}

inline Dataset dataset_from_ndjson(std::istream& in, const std::string& where = "<ndjson>") {
  Dataset data;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.empty() || line == "\r") continue;
    try {
      data.push_back(series_from_json(json::parse(line)));
    } catch (const json::exception& e) {
      throw DataError(where + ":" + std::to_string(n) + ": " + e.what());
    } catch (const DataError& e) {
      throw DataError(where + ":" + std::to_string(n) + ": " + e.what());
    }
  }
  return data;
}

inline Dataset read_dataset(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  return dataset_from_ndjson(in, path);
}

inline void write_dataset(const std::string& path, const Dataset& data) { write_text_atomic(path, to_ndjson(data)); }

// ---- shapelet pool ----

inline json to_json(const Shapelet& s) {
  return {{"values", s.values},        {"channel", s.channel},
          {"source_id", s.source_id},  {"start", s.start},
          {"end", s.end},              {"label", s.label.name()},
          {"info_gain", s.info_gain},  {"split_threshold", s.split_threshold},
          {"max_psd", s.max_psd}};
}

inline Shapelet shapelet_from_json(const json& j) {
  Shapelet s;
  s.values = j.at("values").get<std::vector<double>>();
  s.channel = j.at("channel").get<std::size_t>();
  s.source_id = j.at("source_id").get<std::string>();
  s.start = j.at("start").get<std::size_t>();
  s.end = j.at("end").get<std::size_t>();
  s.label = ClassLabel(j.at("label").get<std::string>());
  s.info_gain = j.at("info_gain").get<double>();
  s.split_threshold = j.at("split_threshold").get<double>();
  s.max_psd = j.value("max_psd", 0.0);
  if (s.end < s.start || s.end - s.start + 1 != s.values.size())
    throw DataError("shapelet span does not match its length");
  return s;
}

inline json pool_to_json(const ShapeletPool& pool, const Config& config) {
  json shapelets = json::array();
  for (const auto& s : pool.shapelets) shapelets.push_back(to_json(s));
  return {{"config", to_json(config)}, {"per_class_quota", pool.per_class_quota}, {"shapelets", shapelets}};
}

struct PoolFile {
  ShapeletPool pool;
  Config config;
};

inline PoolFile pool_from_json(const json& j) {
  try {
    PoolFile f;
    if (j.contains("config")) f.config = config_from_json(j.at("config"));
    for (const auto& s : j.at("shapelets")) f.pool.shapelets.push_back(shapelet_from_json(s));
    f.pool.per_class_quota = j.value("per_class_quota", std::size_t{0});
    return f;
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed pool: ") + e.what());
  }
}

// ---- features (NDJSON) ----

inline std::string features_to_ndjson(const FeatureSet& f) {
  std::string out;
  for (std::size_t i = 0; i < f.size(); ++i) {
    out += json{{"id", f.ids[i]}, {"label", f.labels[i].name()}, {"z", f.rows[i]}}.dump();
    out += '\n';
  }
  return out;
}

inline FeatureSet features_from_ndjson(std::istream& in, const std::string& where = "<features>") {
  FeatureSet f;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.empty() || line == "\r") continue;
    try {
      const auto j = json::parse(line);
      f.ids.push_back(j.at("id").get<std::string>());
      f.labels.emplace_back(j.at("label").get<std::string>());
      f.rows.push_back(j.at("z").get<std::vector<double>>());
      if (f.rows.back().size() != f.rows.front().size())
        throw DataError("feature dimension differs from first row");
    } catch (const json::exception& e) {
      throw DataError(where + ":" + std::to_string(n) + ": " + e.what());
    } catch (const DataError& e) {
      throw DataError(where + ":" + std::to_string(n) + ": " + e.what());
    }
  }
  return f;
}

inline FeatureSet read_features(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  return features_from_ndjson(in, path);
}

// ---- checkpoint ----

template <typename M>
json matrix_to_json(const M& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    std::vector<double> r(static_cast<std::size_t>(m.cols()));
    for (Eigen::Index j = 0; j < m.cols(); ++j) r[static_cast<std::size_t>(j)] = m(i, j);
    rows.push_back(std::move(r));
  }
  return rows;
}

inline HeadParams<double>::Mat matrix_from_json(const json& j) {
  const auto rows = j.get<std::vector<std::vector<double>>>();
  const auto r = static_cast<Eigen::Index>(rows.size());
  const auto c = static_cast<Eigen::Index>(rows.empty() ? 0 : rows.front().size());
  HeadParams<double>::Mat m(r, c);
  for (Eigen::Index i = 0; i < r; ++i) {
    if (static_cast<Eigen::Index>(rows[static_cast<std::size_t>(i)].size()) != c)
      throw DataError("ragged weight matrix");
    for (Eigen::Index k = 0; k < c; ++k) m(i, k) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)];
  }
  return m;
}

inline json vector_to_json(const HeadParams<double>::Vec& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

inline HeadParams<double>::Vec vector_from_json(const json& j) {
  const auto v = j.get<std::vector<double>>();
  HeadParams<double>::Vec out(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) out(static_cast<Eigen::Index>(i)) = v[i];
  return out;
}

inline json to_json(const ModelCheckpoint& c) {
  json labels = json::array();
  for (const auto& l : c.labels) labels.push_back(l.name());
  json history = json::array();
  for (const auto& h : c.history)
    history.push_back({{"epoch", h.epoch}, {"train_loss", h.train_loss}, {"val_macro_f1", h.val_macro_f1}});
  return {{"labels", labels},
          {"config_hash", c.config_hash},
          {"pool_path", c.pool_path},
          {"features",
           {{"use_shapelets", c.features.use_shapelets},
            {"logsig_depth", c.features.logsig_depth},
            {"z_normalize", c.features.distance.z_normalize}}},
          {"scaler", {{"mean", c.scaler.mean}, {"std", c.scaler.stddev}}},
          {"weights",
           {{"w1", matrix_to_json(c.params.w1)},
            {"b1", vector_to_json(c.params.b1)},
            {"w2", matrix_to_json(c.params.w2)},
            {"b2", vector_to_json(c.params.b2)},
            {"w3", matrix_to_json(c.params.w3)},
            {"b3", vector_to_json(c.params.b3)}}},
          {"best_epoch", c.best_epoch},
          {"history", history}};
}

inline ModelCheckpoint checkpoint_from_json(const json& j) {
  try {
    ModelCheckpoint c;
    for (const auto& l : j.at("labels")) c.labels.emplace_back(l.get<std::string>());
    c.config_hash = j.value("config_hash", "");
    c.pool_path = j.value("pool_path", "");
    const auto& f = j.at("features");
    c.features.use_shapelets = f.at("use_shapelets").get<bool>();
    c.features.logsig_depth = f.at("logsig_depth").get<std::size_t>();
    c.features.distance.z_normalize = f.value("z_normalize", false);
    c.scaler.mean = j.at("scaler").at("mean").get<std::vector<double>>();
    c.scaler.stddev = j.at("scaler").at("std").get<std::vector<double>>();
    const auto& w = j.at("weights");
    c.params.w1 = matrix_from_json(w.at("w1"));
    c.params.b1 = vector_from_json(w.at("b1"));
    c.params.w2 = matrix_from_json(w.at("w2"));
    c.params.b2 = vector_from_json(w.at("b2"));
    c.params.w3 = matrix_from_json(w.at("w3"));
    c.params.b3 = vector_from_json(w.at("b3"));
    c.best_epoch = j.value("best_epoch", std::size_t{0});
    for (const auto& h : j.value("history", json::array()))
      c.history.push_back({h.at("epoch").get<std::size_t>(), h.at("train_loss").get<double>(),
                           h.at("val_macro_f1").get<double>()});
    if (c.params.w1.rows() != static_cast<Eigen::Index>(c.scaler.mean.size()) ||
        c.params.w3.cols() != static_cast<Eigen::Index>(c.labels.size()))
      throw DataError("checkpoint shapes are inconsistent");
    return c;
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed checkpoint: ") + e.what());
  }
}

// ---- metrics ----

inline json to_json(const EvalReport& r) {
  json per_class = json::object();
  json labels = json::array();
  for (std::size_t i = 0; i < r.labels.size(); ++i) {
    const auto& m = r.per_class[i];
    labels.push_back(r.labels[i].name());
    per_class[r.labels[i].name()] = {
        {"precision", m.precision}, {"recall", m.recall}, {"f1", m.f1}, {"support", m.support}};
  }
  return {{"labels", labels},       {"confusion", r.confusion}, {"per_class", per_class},
          {"precision", r.precision}, {"recall", r.recall},     {"f1", r.f1},
          {"macro_f1", r.macro_f1}, {"accuracy", r.accuracy},   {"total", r.total}};
}

}  // namespace ship
