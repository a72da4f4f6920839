#pragma once

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "ship/augment.hpp"
#include "ship/core.hpp"
#include "ship/discovery.hpp"
#include "ship/explain.hpp"
#include "ship/features.hpp"
#include "ship/json_io.hpp"
#include "ship/model.hpp"
#include "ship/pipeline.hpp"
#include "ship/synthetic.hpp"

namespace ship {

inline constexpr const char* kVersion = "1.0.0";
inline constexpr std::uint64_t kTrainStream = 0x7EA;
inline constexpr std::uint64_t kRunSplitStream = 0x511;

inline FeatureOptions feature_options(const Config& c) {
  return {c.use_shapelet_features, c.logsig_depth, DistanceOptions{c.z_normalize}};
}

inline const char* variant_name(const Config& c) {
  if (c.use_augmentation && c.use_shapelet_features) return "S+SA";
  if (c.use_shapelet_features) return "S";
  if (c.use_augmentation) return "SA";
  return "Baseline";
}

struct FittedModel {
  ShapeletPool pool;
  ModelCheckpoint checkpoint;
  std::size_t train_instances = 0;  // after augmentation
};

// Discover on the training split, augment minority classes, transform, train.
// With no validation split, early stopping watches the training split itself.
inline FittedModel fit_pipeline(const Dataset& train_set, const Dataset* val_set, const Config& cfg,
                                std::map<std::string, double>* timings = nullptr) {
  using clock = std::chrono::steady_clock;
  auto stamp = [&](const char* stage, clock::time_point since) {
    if (timings) (*timings)[stage] = std::chrono::duration<double>(clock::now() - since).count();
  };

  FittedModel fm;
  auto t0 = clock::now();
  fm.pool = discover(train_set, cfg);
  stamp("discover", t0);

  t0 = clock::now();
  Dataset augmented = cfg.use_augmentation ? balance_dataset(train_set, fm.pool, cfg) : train_set;
  stamp("augment", t0);
  if (cfg.use_augmentation && cfg.rediscover_after_augment) {
    t0 = clock::now();
    fm.pool = discover(augmented, cfg);
    stamp("rediscover", t0);
  }
  fm.train_instances = augmented.size();

  t0 = clock::now();
  const auto fopts = feature_options(cfg);
  const FeatureSet f_train = transform_dataset(augmented, fm.pool, fopts, cfg.threads);
  const FeatureSet f_val =
      val_set ? transform_dataset(*val_set, fm.pool, fopts, cfg.threads) : transform_dataset(train_set, fm.pool, fopts, cfg.threads);
  stamp("transform", t0);

  t0 = clock::now();
  fm.checkpoint = train(f_train, f_val, cfg.train, SeededRng(cfg.seed, kTrainStream));
  fm.checkpoint.features = fopts;
  fm.checkpoint.config_hash = config_hash(cfg);
  stamp("train", t0);
  return fm;
}

struct TuneResult {
  std::size_t best_k = 0;
  std::vector<std::pair<std::size_t, EvalReport>> per_k;
};

// Stratified K-fold over the k grid (folds == |data| is leave-one-out).
// Held-out predictions are pooled across folds; best k by macro-F1, ties to
// the smaller k.
inline TuneResult tune_k(const Dataset& data, const Config& config, std::size_t folds,
                         std::optional<std::vector<std::size_t>> grid = std::nullopt) {
  const auto ks = grid ? *grid : k_grid(data.length());
  if (ks.empty()) throw UsageError("tune_k: empty k grid");
  const auto fold_of = stratified_folds(data, folds, SeededRng(config.seed, kRunSplitStream));
  const auto labels = data.labels();

  TuneResult result;
  double best = -1.0;
  for (std::size_t k : ks) {
    Config cfg = config;
    cfg.k = k;
    std::vector<std::size_t> truth(data.size()), pred(data.size());
    for (std::size_t f = 0; f < folds; ++f) {
      Dataset train_part, held;
      std::vector<std::size_t> held_idx;
      for (std::size_t i = 0; i < data.size(); ++i) {
        if (fold_of[i] == f) {
          held.push_back(data[i]);
          held_idx.push_back(i);
        } else {
          train_part.push_back(data[i]);
        }
      }
      if (train_part.labels().size() != labels.size())
        throw DataError("tune_k: a class is missing from the training folds");
      const auto fm = fit_pipeline(train_part, nullptr, cfg);
      const auto fs = transform_dataset(held, fm.pool, fm.checkpoint.features, cfg.threads);
      const auto p = predict_indices(fm.checkpoint.params, to_matrix(fs.rows, fm.checkpoint.scaler));
      const auto t = label_indices(fs.labels, labels);
      for (std::size_t i = 0; i < held_idx.size(); ++i) {
        truth[held_idx[i]] = t[i];
        // Checkpoint labels are the full sorted set whenever training saw all classes.
        pred[held_idx[i]] = label_indices({fm.checkpoint.labels[p[i]]}, labels).front();
      }
    }
    auto report = metrics_report(labels, truth, pred);
    if (report.macro_f1 > best) {
      best = report.macro_f1;
      result.best_k = k;
    }
    result.per_k.emplace_back(k, std::move(report));
  }
  return result;
}

struct RunOptions {
  Config config;
  SynthConfig synth;
  std::optional<std::string> data_path;  // NDJSON input instead of synthetic data
  std::string out_dir;                   // empty: no artifacts written
  bool keep_intermediate = false;        // also dump augmented data and features
  std::size_t explain_per_class = 1;     // test instances explained per class
};

struct RunResult {
  Dataset data;
  Dataset train_set, val_set, test_set;
  FittedModel model;
  EvalReport test_report;
  EvalReport val_report;
  std::map<std::string, double> timings;
  ExplainReport explanation;
};

inline nlohmann::json metrics_json(const RunResult& r, const Config& cfg) {
  nlohmann::json counts = nlohmann::json::object();
  for (const auto& [label, n] : r.data.class_counts()) counts[label.name()] = n;
  return {{"variant", variant_name(cfg)},
          {"seed", cfg.seed},
          {"class_counts", counts},
          {"train_instances", r.train_set.size()},
          {"augmented_train_instances", r.model.train_instances},
          {"val_instances", r.val_set.size()},
          {"test_instances", r.test_set.size()},
          {"pool_size", r.model.pool.size()},
          {"best_epoch", r.model.checkpoint.best_epoch},
          {"validation", to_json(r.val_report)},
          {"test", to_json(r.test_report)}};
}

// synth (or load) -> subset channels -> split 80/20 -> carve validation from
// the training part -> discover -> augment -> transform -> train -> evaluate.
inline RunResult run_all(const RunOptions& opts) {
  using clock = std::chrono::steady_clock;
  const Config& cfg = opts.config;
  RunResult r;

  auto t0 = clock::now();
  if (opts.data_path) {
    r.data = read_dataset(*opts.data_path);
  } else {
    SynthConfig sc = opts.synth;
    r.data = generate_synthetic(sc);
  }
  if (cfg.channel_subset) r.data = subset_channels(r.data, *cfg.channel_subset);
  r.timings["load"] = std::chrono::duration<double>(clock::now() - t0).count();

  const SeededRng split_rng(cfg.seed, kRunSplitStream);
  Dataset train_full;
  std::tie(train_full, r.test_set) = split(r.data, 0.8, derive_stream(split_rng, 0));
  std::tie(r.train_set, r.val_set) = split(train_full, 0.875, derive_stream(split_rng, 1));

  r.model = fit_pipeline(r.train_set, &r.val_set, cfg, &r.timings);

  t0 = clock::now();
  const auto fopts = r.model.checkpoint.features;
  const auto f_val = transform_dataset(r.val_set, r.model.pool, fopts, cfg.threads);
  const auto f_test = transform_dataset(r.test_set, r.model.pool, fopts, cfg.threads);
  r.val_report = evaluate(r.model.checkpoint, f_val);
  r.test_report = evaluate(r.model.checkpoint, f_test);
  r.timings["evaluate"] = std::chrono::duration<double>(clock::now() - t0).count();

  std::vector<const LabeledSeries*> to_explain;
  for (const auto& label : r.test_set.labels()) {
    std::size_t taken = 0;
    for (const auto& x : r.test_set)
      if (x.label() == label && taken < opts.explain_per_class) {
        to_explain.push_back(&x);
        ++taken;
      }
  }
  r.explanation = explain(r.model.checkpoint, r.model.pool, to_explain, true);

  if (opts.out_dir.empty()) return r;

  namespace fs = std::filesystem;
  const fs::path out(opts.out_dir);
  fs::create_directories(out);
  auto path = [&](const char* name) { return (out / name).string(); };

  r.model.checkpoint.pool_path = "pool.json";
  write_dataset(path("data.ndjson"), r.data);
  write_json_file(path("pool.json"), pool_to_json(r.model.pool, cfg));
  write_json_file(path("checkpoint.json"), to_json(r.model.checkpoint));
  write_json_file(path("metrics.json"), metrics_json(r, cfg));
  write_json_file(path("explain.json"), to_json(r.explanation));
  write_json_file(path("plot.json"), plot_data(r.explanation, r.data));
  if (opts.keep_intermediate) {
    write_dataset(path("train.ndjson"), r.train_set);
    write_dataset(path("val.ndjson"), r.val_set);
    write_dataset(path("test.ndjson"), r.test_set);
    write_dataset(path("augmented.ndjson"),
                  cfg.use_augmentation ? balance_dataset(r.train_set, r.model.pool, cfg) : r.train_set);
    write_text_atomic(path("features_test.ndjson"), features_to_ndjson(f_test));
  }

  nlohmann::json stages = nlohmann::json::object();
  for (const auto& [k, v] : r.timings) stages[k] = v;
  nlohmann::json manifest = {{"version", kVersion},
                             {"command", "run-all"},
                             {"seed", cfg.seed},
                             {"threads", cfg.threads},
                             {"config", to_json(cfg)},
                             {"config_hash", config_hash(cfg)},
                             {"synthetic",
                              opts.data_path ? nlohmann::json(nullptr)
                                             : nlohmann::json{{"n_instances", opts.synth.n_instances},
                                                              {"length", opts.synth.length},
                                                              {"noise", opts.synth.noise},
                                                              {"seed", opts.synth.seed}}},
                             {"inputs", opts.data_path ? nlohmann::json(*opts.data_path) : nlohmann::json(nullptr)},
                             {"outputs",
                              {"data.ndjson", "pool.json", "checkpoint.json", "metrics.json", "explain.json",
                               "plot.json"}},
                             {"timings_seconds", stages}};
  write_json_file(path("manifest.json"), manifest);
  return r;
}

}  // namespace ship
