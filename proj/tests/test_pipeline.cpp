#include <gtest/gtest.h>

#include <sstream>

#include "ship/discovery.hpp"
#include "ship/pipeline.hpp"
#include "ship/synthetic.hpp"

using namespace ship;

namespace {

// Pmask pulse train: 4 cm baseline, 10 cm plateau for the first 30 samples of
// each period. Other channels carry a ramp so slices are traceable.
RawRecording pulse_train(std::size_t period, std::size_t periods) {
  RawRecording rec;
  rec.names = {"Pmask", "Flow", "Thor", "Abdo"};
  rec.channels.assign(4, {});
  for (std::size_t i = 0; i < period * periods; ++i) {
    const std::size_t phase = i % period;
    rec.channels[0].push_back(phase < 30 ? 10.0 : 4.0);
    rec.channels[1].push_back(static_cast<double>(i));
    rec.channels[2].push_back(1.0);
    rec.channels[3].push_back(-1.0);
  }
  return rec;
}

}  // namespace

TEST(Segment, PeriodShorterThanT) {
  const auto segs = segment(pulse_train(100, 8), SegmentConfig{});
  ASSERT_EQ(segs.size(), 7u);
  for (std::size_t i = 0; i < segs.size(); ++i) {
    EXPECT_EQ(segs[i].original_length(), 100u);
    EXPECT_EQ(segs[i].length(), 150u);
    EXPECT_EQ(segs[i].at(1, 0), static_cast<double>(100 * i));
    EXPECT_EQ(segs[i].at(1, 120), 0.0);
  }
}

TEST(Segment, PeriodLongerThanTIsTruncated) {
  const auto segs = segment(pulse_train(200, 5), SegmentConfig{});
  ASSERT_EQ(segs.size(), 4u);
  for (const auto& s : segs) EXPECT_EQ(s.original_length(), 150u);
}

TEST(Segment, FlatPressureGivesNothing) {
  quiet_warnings() = true;
  auto rec = pulse_train(100, 5);
  std::fill(rec.channels[0].begin(), rec.channels[0].end(), 4.0);
  EXPECT_TRUE(segment(rec, SegmentConfig{}).empty());
}

TEST(Segment, MissingChannelIsDataError) {
  auto rec = pulse_train(100, 3);
  rec.names[0] = "Paw";
  EXPECT_THROW(segment(rec, SegmentConfig{}), DataError);
}

TEST(Segment, NoiseDoesNotDoubleTrigger) {
  auto rec = pulse_train(100, 6);
  SeededRng rng(1);
  for (double& v : rec.channels[0]) v += 0.4 * standard_normal(rng);
  const auto onsets = detect_onsets(rec.channels[0], SegmentConfig{});
  ASSERT_EQ(onsets.size(), 6u);
  for (std::size_t i = 0; i < onsets.size(); ++i) EXPECT_EQ(onsets[i], 100 * i);
}

// Re-running detection on the concatenated segments finds the same onsets.
TEST(Segment, Idempotent) {
  const auto rec = pulse_train(100, 6);
  const SegmentConfig cfg;
  const auto segs = segment(rec, cfg);
  RawRecording again;
  again.names = rec.names;
  again.channels.assign(4, {});
  for (const auto& s : segs)
    for (std::size_t v = 0; v < 4; ++v) {
      const auto row = s.active(v);
      again.channels[v].insert(again.channels[v].end(), row.begin(), row.end());
    }
  const auto first = detect_onsets(rec.channels[0], cfg);
  const auto second = detect_onsets(again.channels[0], cfg);
  ASSERT_EQ(second.size(), segs.size());
  for (std::size_t i = 0; i < second.size(); ++i) EXPECT_EQ(second[i], first[i]);
}

TEST(RecordingCsv, ParsesAndRejects) {
  std::stringstream ok("Pmask,Flow\n4,0.5\n10,1\n");
  const auto rec = read_recording_csv(ok);
  EXPECT_EQ(rec.names, (std::vector<std::string>{"Pmask", "Flow"}));
  EXPECT_EQ(rec.channels[1], (std::vector<double>{0.5, 1.0}));
  std::stringstream bad("Pmask,Flow\n4\n");
  EXPECT_THROW(read_recording_csv(bad), DataError);
  std::stringstream nan("Pmask\nabc\n");
  EXPECT_THROW(read_recording_csv(nan), DataError);
}

namespace {

Dataset labeled(const std::map<std::string, std::size_t>& counts) {
  Dataset d;
  std::size_t id = 0;
  for (const auto& [label, n] : counts)
    for (std::size_t i = 0; i < n; ++i)
      d.push_back(make_series("x" + std::to_string(id++), ClassLabel(label),
                              {{1.0 * id, 2, 3}, {0, 1, 0}, {2, 2, 2}, {5, 4, 3}}, 5));
  return d;
}

}  // namespace

TEST(Split, EightyTwenty) {
  const auto d = labeled({{"NP", 50}, {"AC", 50}});
  const auto [tr, va] = split(d, 0.8, SeededRng(1));
  EXPECT_EQ(tr.size(), 80u);
  EXPECT_EQ(va.size(), 20u);
  EXPECT_EQ(tr.labels().size(), 2u);
  EXPECT_EQ(va.labels().size(), 2u);
  const auto [tr2, va2] = split(d, 0.8, SeededRng(1));
  EXPECT_EQ(tr, tr2);
  EXPECT_EQ(va, va2);
  EXPECT_NE(split(d, 0.8, SeededRng(2)).first, tr);
}

TEST(Split, HalfOfTwoPerClass) {
  const auto d = labeled({{"NP", 2}, {"AC", 2}, {"IE", 2}});
  const auto [tr, va] = split(d, 0.5, SeededRng(3));
  for (const auto& [label, n] : tr.class_counts()) EXPECT_EQ(n, 1u);
  for (const auto& [label, n] : va.class_counts()) EXPECT_EQ(n, 1u);
}

TEST(Split, Errors) {
  EXPECT_THROW(split(labeled({{"NP", 5}, {"AC", 1}}), 0.8, SeededRng(1)), DataError);
  EXPECT_THROW(split(labeled({{"NP", 5}, {"AC", 5}}), 1.0, SeededRng(1)), UsageError);
}

TEST(StratifiedFolds, EveryClassInEveryFold) {
  const auto d = labeled({{"NP", 23}, {"AC", 7}, {"DT", 5}});
  const auto fold = stratified_folds(d, 5, SeededRng(4));
  std::map<std::pair<std::string, std::size_t>, int> seen;
  for (std::size_t i = 0; i < d.size(); ++i) ++seen[{d[i].label().name(), fold[i]}];
  EXPECT_EQ(seen.size(), 15u);
  EXPECT_THROW(stratified_folds(labeled({{"NP", 9}, {"AC", 3}}), 5, SeededRng(4)), DataError);
}

TEST(SubsetChannels, Basics) {
  const auto d = labeled({{"NP", 3}, {"AC", 3}});
  const auto two = subset_channels(d, {0, 1});
  EXPECT_EQ(two.channels(), 2u);
  EXPECT_EQ(two[0].channel_names(), (std::vector<std::string>{"ch0", "ch1"}));
  EXPECT_EQ(subset_channels(d, {0, 1, 2, 3}), d);
  EXPECT_THROW(subset_channels(d, {4}), UsageError);
  EXPECT_THROW(subset_channels(d, {}), UsageError);
}

TEST(SubsetChannels, DiscoveryStaysOnSubset) {
  SynthConfig sc;
  sc.n_instances = 24;
  sc.class_proportions = {{"NP", 1}, {"AC", 1}, {"DT", 1}, {"IE", 1}};
  const auto d = subset_channels(generate_synthetic(sc), {0, 1});
  Config cfg;
  cfg.g = 8;
  cfg.sources_per_class = 2;
  for (const auto& s : discover(d, cfg).shapelets) EXPECT_LT(s.channel, 2u);
}

TEST(Synthetic, QuotasWithinOne) {
  SynthConfig sc;
  sc.n_instances = 1000;
  const auto d = generate_synthetic(sc);
  const double total = 280110.0 + 6385 + 10595 + 8040;
  const std::map<std::string, double> expect{
      {"NP", 1000 * 280110.0 / total}, {"AC", 1000 * 6385.0 / total}, {"DT", 1000 * 10595.0 / total},
      {"IE", 1000 * 8040.0 / total}};
  const auto counts = d.class_counts();
  std::size_t sum = 0;
  for (const auto& [name, e] : expect) {
    const double got = static_cast<double>(counts.at(ClassLabel(name)));
    EXPECT_LE(std::fabs(got - e), 1.0) << name;
    sum += counts.at(ClassLabel(name));
  }
  EXPECT_EQ(sum, 1000u);
}

TEST(Synthetic, SingleClassAndDeterminism) {
  SynthConfig sc;
  sc.n_instances = 30;
  sc.class_proportions = {{"NP", 1.0}};
  const auto d = generate_synthetic(sc);
  EXPECT_EQ(d.class_counts().at(ClassLabel("NP")), 30u);
  EXPECT_EQ(generate_synthetic(sc), d);
  sc.seed = 1;
  EXPECT_NE(generate_synthetic(sc), d);
}

TEST(Synthetic, InstancesAreValidAndVaried) {
  SynthConfig sc;
  sc.n_instances = 200;
  sc.class_proportions = {{"NP", 1}, {"AC", 1}, {"DT", 1}, {"IE", 1}};
  const auto d = generate_synthetic(sc);
  EXPECT_EQ(d.channels(), 4u);
  EXPECT_EQ(d.length(), 150u);
  EXPECT_EQ(d.channel_names(), (std::vector<std::string>{"Pmask", "Flow", "Thor", "Abdo"}));
  std::set<std::size_t> lengths;
  for (const auto& x : d) {
    EXPECT_GE(x.original_length(), sc.min_length);
    lengths.insert(x.original_length());
    for (std::size_t v = 0; v < 4; ++v)
      for (std::size_t t = x.original_length(); t < x.length(); ++t) ASSERT_EQ(x.at(v, t), 0.0);
  }
  EXPECT_GT(lengths.size(), 5u);
}

TEST(AllocateQuotas, LargestRemainder) {
  EXPECT_EQ(allocate_quotas(10, {1, 1, 1}), (std::vector<std::size_t>{4, 3, 3}));
  EXPECT_EQ(allocate_quotas(7, {0.5, 0.5}), (std::vector<std::size_t>{4, 3}));
  EXPECT_THROW(allocate_quotas(5, {0, 0}), UsageError);
}
