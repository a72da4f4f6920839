// Command-line front end: synth, segment, discover, augment, transform, train,
// evaluate, tune-k, explain, run-all.
//
// Exit codes: 0 success, 1 usage error, 2 data/validation error,
// 3 training divergence.

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "ship/ship.hpp"

namespace {

using ship::json;

struct SharedFlags {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> k, g, rsa, logsig_depth, threads, sources;
  std::optional<double> sigma_scale;
  std::vector<std::size_t> channels;
  bool no_augment = false;
  bool no_shapelet_features = false;
  bool clamp_mask = false;
  bool z_normalize = false;
  std::optional<std::size_t> max_epochs;
};

void add_shared(CLI::App* cmd, SharedFlags& f) {
  cmd->add_option("--config", f.config_path, "JSON config file; flags override it")->check(CLI::ExistingFile);
  cmd->add_option("--seed", f.seed, "Random seed");
  cmd->add_option("--k", f.k, "Number of perceptually important points")->check(CLI::Range(3, 100000));
  cmd->add_option("--g", f.g, "Shapelet pool size");
  cmd->add_option("--rsa", f.rsa, "Augmented copies per minority instance");
  cmd->add_option("--sigma-scale", f.sigma_scale, "Noise sigma relative to channel std");
  cmd->add_option("--logsig-depth", f.logsig_depth, "Log-signature depth")->check(CLI::Range(1, 16));
  cmd->add_option("--channels", f.channels, "Channel subset, e.g. 0,1")->delimiter(',');
  cmd->add_option("--threads", f.threads, "Worker threads (never changes results)");
  cmd->add_option("--sources-per-class", f.sources, "Candidate source instances per class (0 = all)");
  cmd->add_option("--max-epochs", f.max_epochs, "Training epoch cap");
  cmd->add_flag("--no-augment", f.no_augment, "Skip shapelet-based augmentation");
  cmd->add_flag("--no-shapelet-features", f.no_shapelet_features, "Drop shapelet-distance features");
  cmd->add_flag("--clamp-mask", f.clamp_mask, "Cap the on-span noise factor at 1");
  cmd->add_flag("--z-normalize", f.z_normalize, "z-normalize windows before comparing");
}

ship::Config resolve_config(const SharedFlags& f, const json* base = nullptr) {
  ship::Config c;
  if (base) c = ship::config_from_json(*base, c);
  if (!f.config_path.empty()) c = ship::config_from_json(ship::read_json_file(f.config_path), c);
  if (f.seed) c.seed = *f.seed;
  if (f.k) c.k = *f.k;
  if (f.g) c.g = *f.g;
  if (f.rsa) c.r_sa = *f.rsa;
  if (f.sigma_scale) c.noise_sigma_scale = *f.sigma_scale;
  if (f.logsig_depth) c.logsig_depth = *f.logsig_depth;
  if (f.threads) c.threads = *f.threads;
  if (f.sources) c.sources_per_class = *f.sources;
  if (f.max_epochs) c.train.max_epochs = *f.max_epochs;
  if (!f.channels.empty()) c.channel_subset = f.channels;
  if (f.no_augment) c.use_augmentation = false;
  if (f.no_shapelet_features) c.use_shapelet_features = false;
  if (f.clamp_mask) c.clamp_mask = true;
  if (f.z_normalize) c.z_normalize = true;
  if (c.k < 3) throw ship::UsageError("k must be >= 3");
  if (c.noise_sigma_scale < 0.0) throw ship::UsageError("sigma-scale must be >= 0");
  return c;
}

ship::Dataset load_data(const std::string& path, const ship::Config& c) {
  auto data = ship::read_dataset(path);
  if (c.channel_subset) data = ship::subset_channels(data, *c.channel_subset);
  return data;
}

ship::PoolFile load_pool(const std::string& path) { return ship::pool_from_json(ship::read_json_file(path)); }

std::vector<std::pair<std::string, double>> parse_proportions(const std::string& text) {
  std::vector<std::pair<std::string, double>> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw ship::UsageError("proportion '" + item + "' is not LABEL=weight");
    try {
      out.emplace_back(item.substr(0, eq), std::stod(item.substr(eq + 1)));
    } catch (const std::exception&) {
      throw ship::UsageError("bad proportion weight in '" + item + "'");
    }
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Shapelet-based interpretable ventilator asynchrony detection"};
  app.require_subcommand(1);
  bool quiet = false;
  app.add_flag("-q,--quiet", quiet, "Suppress warnings");

  SharedFlags flags;

  // synth
  auto* synth = app.add_subcommand("synth", "Generate a labeled synthetic breath dataset");
  std::string synth_out, proportions;
  ship::SynthConfig sc;
  std::optional<std::uint64_t> synth_seed;
  synth->add_option("--out", synth_out, "Output NDJSON")->required();
  synth->add_option("--n", sc.n_instances, "Number of instances");
  synth->add_option("--length", sc.length, "Padded length T");
  synth->add_option("--min-length", sc.min_length, "Shortest unpadded breath");
  synth->add_option("--noise", sc.noise, "Additive noise level");
  synth->add_option("--proportions", proportions, "Class weights, e.g. NP=0.9,AC=0.1");
  synth->add_option("--seed", synth_seed, "Random seed");

  // segment
  auto* seg = app.add_subcommand("segment", "Cut a raw CSV recording into padded breath instances");
  std::string seg_csv, seg_out, seg_prefix = "seg";
  ship::SegmentConfig segc;
  std::vector<std::string> seg_channels;
  seg->add_option("--csv", seg_csv, "Recording CSV with a header row")->required()->check(CLI::ExistingFile);
  seg->add_option("--out", seg_out, "Output NDJSON")->required();
  seg->add_option("--length", segc.length, "Padded length T");
  seg->add_option("--median-window", segc.median_window, "Rolling-median baseline window");
  seg->add_option("--h-on", segc.h_on, "Onset threshold above baseline");
  seg->add_option("--h-off", segc.h_off, "Release threshold above baseline");
  seg->add_option("--trigger", segc.trigger, "Channel used for onset detection");
  seg->add_option("--channel-names", seg_channels, "Channels to keep")->delimiter(',');
  seg->add_option("--label", segc.label, "Label assigned to every segment");
  seg->add_option("--id-prefix", seg_prefix, "Instance id prefix");

  // discover
  auto* disc = app.add_subcommand("discover", "Discover a shapelet pool");
  std::string disc_data, disc_out;
  disc->add_option("--data", disc_data, "Training NDJSON")->required()->check(CLI::ExistingFile);
  disc->add_option("--out", disc_out, "Pool JSON")->required();
  add_shared(disc, flags);

  // augment
  auto* aug = app.add_subcommand("augment", "Shapelet-guided augmentation of minority classes");
  std::string aug_data, aug_pool, aug_out;
  aug->add_option("--data", aug_data, "Training NDJSON")->required()->check(CLI::ExistingFile);
  aug->add_option("--pool", aug_pool, "Pool JSON")->required()->check(CLI::ExistingFile);
  aug->add_option("--out", aug_out, "Augmented NDJSON")->required();
  add_shared(aug, flags);

  // transform
  auto* tr = app.add_subcommand("transform", "Shapelet + log-signature features");
  std::string tr_data, tr_pool, tr_out;
  tr->add_option("--data", tr_data, "Input NDJSON")->required()->check(CLI::ExistingFile);
  tr->add_option("--pool", tr_pool, "Pool JSON")->required()->check(CLI::ExistingFile);
  tr->add_option("--out", tr_out, "Feature NDJSON")->required();
  add_shared(tr, flags);

  // train
  auto* trn = app.add_subcommand("train", "Train the classification head");
  std::string trn_train, trn_val, trn_out, trn_pool;
  trn->add_option("--train", trn_train, "Training feature NDJSON")->required()->check(CLI::ExistingFile);
  trn->add_option("--val", trn_val, "Validation feature NDJSON")->required()->check(CLI::ExistingFile);
  trn->add_option("--pool", trn_pool, "Pool JSON the features came from")->check(CLI::ExistingFile);
  trn->add_option("--out", trn_out, "Checkpoint JSON")->required();
  add_shared(trn, flags);

  // evaluate
  auto* ev = app.add_subcommand("evaluate", "Metrics of a checkpoint on a feature file");
  std::string ev_ckpt, ev_feat, ev_out;
  ev->add_option("--checkpoint", ev_ckpt, "Checkpoint JSON")->required()->check(CLI::ExistingFile);
  ev->add_option("--features", ev_feat, "Feature NDJSON")->required()->check(CLI::ExistingFile);
  ev->add_option("--out", ev_out, "Metrics JSON (stdout if omitted)");

  // tune-k
  auto* tk = app.add_subcommand("tune-k", "Cross-validated search over the k grid");
  std::string tk_data, tk_out;
  std::size_t folds = 5;
  std::vector<std::size_t> tk_grid;
  tk->add_option("--data", tk_data, "Dataset NDJSON")->required()->check(CLI::ExistingFile);
  tk->add_option("--out", tk_out, "Result JSON (stdout if omitted)");
  tk->add_option("--folds", folds, "Folds (= dataset size for leave-one-out)");
  tk->add_option("--grid", tk_grid, "Explicit k values instead of the default grid")->delimiter(',');
  add_shared(tk, flags);

  // explain
  auto* ex = app.add_subcommand("explain", "Shapelet evidence behind predictions");
  std::string ex_ckpt, ex_pool, ex_data, ex_out, ex_plot;
  std::vector<std::string> ex_ids;
  bool all_classes = false;
  ex->add_option("--checkpoint", ex_ckpt, "Checkpoint JSON")->required()->check(CLI::ExistingFile);
  ex->add_option("--pool", ex_pool, "Pool JSON (default: the checkpoint's pool_path)");
  ex->add_option("--data", ex_data, "Dataset NDJSON")->required()->check(CLI::ExistingFile);
  ex->add_option("--instance", ex_ids, "Instance id(s); all instances if omitted");
  ex->add_flag("--all-classes", all_classes, "Report every class's shapelets");
  ex->add_option("--out", ex_out, "Report JSON (stdout if omitted)");
  ex->add_option("--plot-out", ex_plot, "Plot-ready JSON");
  ex->add_option("--channels", flags.channels, "Channel subset used at training time")->delimiter(',');

  // run-all
  auto* ra = app.add_subcommand("run-all", "synth -> discover -> augment -> transform -> train -> evaluate");
  ship::RunOptions ro;
  std::string ra_data;
  std::optional<std::size_t> ra_n;
  std::optional<double> ra_noise;
  ra->add_option("--out", ro.out_dir, "Output directory")->required();
  ra->add_option("--data", ra_data, "Use this NDJSON dataset instead of synthetic data")->check(CLI::ExistingFile);
  ra->add_option("--n", ra_n, "Synthetic instance count");
  ra->add_option("--noise", ra_noise, "Synthetic noise level");
  ra->add_flag("--keep-intermediate", ro.keep_intermediate, "Also write splits, augmented data, features");
  add_shared(ra, flags);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }
  ship::quiet_warnings() = quiet;

  try {
    if (*synth) {
      if (!proportions.empty()) sc.class_proportions = parse_proportions(proportions);
      if (synth_seed) sc.seed = *synth_seed;
      ship::write_dataset(synth_out, ship::generate_synthetic(sc));
    } else if (*seg) {
      if (!seg_channels.empty()) segc.channels = seg_channels;
      const auto rec = ship::read_recording_csv_file(seg_csv);
      ship::Dataset out;
      for (auto& x : ship::segment(rec, segc, seg_prefix)) out.push_back(std::move(x));
      ship::write_dataset(seg_out, out);
      std::cerr << out.size() << " segments\n";
    } else if (*disc) {
      const auto cfg = resolve_config(flags);
      const auto data = load_data(disc_data, cfg);
      ship::DiscoveryStats stats;
      const auto pool = ship::discover(data, cfg, &stats);
      ship::write_json_file(disc_out, ship::pool_to_json(pool, cfg));
      std::cerr << stats.candidates << " candidates from " << stats.sources << " instances, " << pool.size()
                << " shapelets kept\n";
    } else if (*aug) {
      const auto pf = load_pool(aug_pool);
      const json base = ship::to_json(pf.config);
      const auto cfg = resolve_config(flags, &base);
      const auto data = load_data(aug_data, cfg);
      ship::write_dataset(aug_out, ship::balance_dataset(data, pf.pool, cfg));
    } else if (*tr) {
      const auto pf = load_pool(tr_pool);
      const json base = ship::to_json(pf.config);
      const auto cfg = resolve_config(flags, &base);
      const auto data = load_data(tr_data, cfg);
      const auto fs = ship::transform_dataset(data, pf.pool, ship::feature_options(cfg), cfg.threads);
      ship::write_text_atomic(tr_out, ship::features_to_ndjson(fs));
    } else if (*trn) {
      json base = json::object();
      ship::Config pool_cfg;
      if (!trn_pool.empty()) {
        pool_cfg = load_pool(trn_pool).config;
        base = ship::to_json(pool_cfg);
      }
      const auto cfg = resolve_config(flags, &base);
      auto ckpt = ship::train(ship::read_features(trn_train), ship::read_features(trn_val), cfg.train,
                              ship::SeededRng(cfg.seed, ship::kTrainStream));
      ckpt.features = ship::feature_options(cfg);
      ckpt.config_hash = ship::config_hash(cfg);
      if (!trn_pool.empty())
        ckpt.pool_path = std::filesystem::relative(std::filesystem::absolute(trn_pool),
                                                   std::filesystem::absolute(trn_out).parent_path())
                             .string();
      ship::write_json_file(trn_out, ship::to_json(ckpt));
    } else if (*ev) {
      const auto ckpt = ship::checkpoint_from_json(ship::read_json_file(ev_ckpt));
      const auto report = ship::evaluate(ckpt, ship::read_features(ev_feat));
      if (ev_out.empty())
        std::cout << ship::to_json(report).dump(1) << '\n';
      else
        ship::write_json_file(ev_out, ship::to_json(report));
    } else if (*tk) {
      const auto cfg = resolve_config(flags);
      const auto data = load_data(tk_data, cfg);
      std::optional<std::vector<std::size_t>> grid;
      if (!tk_grid.empty()) grid = tk_grid;
      const auto result = ship::tune_k(data, cfg, folds, grid);
      json per_k = json::array();
      for (const auto& [k, report] : result.per_k) per_k.push_back({{"k", k}, {"report", ship::to_json(report)}});
      const json out = {{"best_k", result.best_k}, {"folds", folds}, {"per_k", per_k}};
      if (tk_out.empty())
        std::cout << out.dump(1) << '\n';
      else
        ship::write_json_file(tk_out, out);
    } else if (*ex) {
      const auto ckpt = ship::checkpoint_from_json(ship::read_json_file(ex_ckpt));
      std::string pool_path = ex_pool;
      if (pool_path.empty()) {
        if (ckpt.pool_path.empty()) throw ship::UsageError("explain: --pool required (checkpoint has no pool_path)");
        pool_path = (std::filesystem::path(ex_ckpt).parent_path() / ckpt.pool_path).string();
      }
      const auto pf = load_pool(pool_path);
      auto data = ship::read_dataset(ex_data);
      const auto& subset = !flags.channels.empty() ? std::optional(flags.channels) : pf.config.channel_subset;
      if (subset && data.channels() != subset->size()) data = ship::subset_channels(data, *subset);
      std::vector<const ship::LabeledSeries*> chosen;
      if (ex_ids.empty()) {
        for (const auto& x : data) chosen.push_back(&x);
      } else {
        for (const auto& id : ex_ids) {
          const auto* x = data.find(id);
          if (!x) throw ship::DataError("explain: no instance '" + id + "'");
          chosen.push_back(x);
        }
      }
      const auto report = ship::explain(ckpt, pf.pool, chosen, all_classes);
      if (ex_out.empty())
        std::cout << ship::to_json(report).dump(1) << '\n';
      else
        ship::write_json_file(ex_out, ship::to_json(report));
      if (!ex_plot.empty()) ship::write_json_file(ex_plot, ship::plot_data(report, data));
    } else if (*ra) {
      ro.config = resolve_config(flags);
      ro.synth.seed = ro.config.seed;
      if (ra_n) ro.synth.n_instances = *ra_n;
      if (ra_noise) ro.synth.noise = *ra_noise;
      if (!ra_data.empty()) ro.data_path = ra_data;
      const auto r = ship::run_all(ro);
      std::cerr << ship::variant_name(ro.config) << ": accuracy " << r.test_report.accuracy << ", weighted F1 "
                << r.test_report.f1 << ", macro F1 " << r.test_report.macro_f1 << '\n';
    }
  } catch (const ship::UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const ship::DivergenceError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
