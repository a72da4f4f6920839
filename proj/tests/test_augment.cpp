#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"
#include "ship/augment.hpp"

using namespace ship;

using V = std::vector<double>;

namespace {

Shapelet shapelet_of(V values, const char* label, std::size_t channel = 0) {
  Shapelet s;
  s.values = std::move(values);
  s.label = ClassLabel(label);
  s.channel = channel;
  s.end = s.values.size() - 1;
  return s;
}

// counts per class, each instance 2 channels, original length 12..16 of T = 20.
Dataset imbalanced(const std::map<std::string, std::size_t>& counts, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::uniform_int_distribution<std::size_t> len(12, 16);
  Dataset d;
  std::size_t id = 0;
  for (const auto& [label, n] : counts)
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t l = len(gen);
      d.push_back(make_series("i" + std::to_string(id++), ClassLabel(label),
                              {oracle::random_series(gen, l), oracle::random_series(gen, l)}, 20));
    }
  return d;
}

ShapeletPool pool_for(const Dataset& d) {
  ShapeletPool pool;
  pool.per_class_quota = 2;
  for (const auto& label : d.labels()) {
    std::size_t taken = 0;
    for (const auto& x : d) {
      if (!(x.label() == label) || taken == 2) continue;
      const auto row = x.active(taken % 2);
      Shapelet s = shapelet_of(V(row.begin() + 2, row.begin() + 7), label.name().c_str(), taken % 2);
      s.source_id = x.id();
      s.start = 2;
      s.end = 6;
      pool.shapelets.push_back(s);
      ++taken;
    }
  }
  return pool;
}

}  // namespace

TEST(BuildMask, ExactMatchZeroesSpan) {
  const auto x = make_series("x", ClassLabel("AC"), {{0, 1, 3, 2, 5}, {1, 1, 1, 1, 1}}, 7);
  const auto [m, match] = build_mask(x, shapelet_of({1, 3, 2}, "AC"));
  EXPECT_EQ(match.offset, 1u);
  for (std::size_t t = 0; t < 7; ++t) {
    const double expect0 = t >= 5 ? 0.0 : (t >= 1 && t <= 3) ? 0.0 : 1.0;
    EXPECT_EQ(m.at(0, t), expect0) << t;
    EXPECT_EQ(m.at(1, t), t >= 5 ? 0.0 : 1.0) << t;
  }
}

TEST(BuildMask, SpanCarriesPsd) {
  const auto x = make_series("x", ClassLabel("AC"), {{0, 1, 3}}, 5);
  const auto [m, match] = build_mask(x, shapelet_of({0, 2}, "AC"));
  EXPECT_EQ(m.at(0, 0), 1.0);
  EXPECT_NEAR(m.at(0, 1), 1.4142136, 1e-7);
  EXPECT_NEAR(m.at(0, 2), 1.4142136, 1e-7);
  EXPECT_EQ(m.at(0, 3), 0.0);
  EXPECT_EQ(m.at(0, 4), 0.0);

  const auto [clamped, _] = build_mask(x, shapelet_of({0, 2}, "AC"), true);
  EXPECT_EQ(clamped.at(0, 1), 1.0);
}

TEST(BuildMask, TooLongShapeletIsAnError) {
  const auto x = make_series("x", ClassLabel("AC"), {{0, 1, 3}}, 5);
  EXPECT_THROW(build_mask(x, shapelet_of({0, 1, 2, 3}, "AC")), DataError);
}

TEST(AugmentInstance, ZeroSigmaIsIdentity) {
  std::mt19937_64 gen(1);
  const auto x = make_series("x", ClassLabel("DT"), {oracle::random_series(gen, 15)}, 20);
  ShapeletPool pool;
  pool.shapelets.push_back(shapelet_of({9, 9, 8}, "DT"));
  SeededRng rng(3);
  const auto y = augment_instance(x, pool, NoiseSpec{0.0, 0.0}, rng, "x#aug0");
  EXPECT_EQ(y.values(), x.values());
  EXPECT_EQ(y.id(), "x#aug0");
  EXPECT_EQ(y.label(), x.label());
}

TEST(AugmentInstance, ExactMatchSpanUnchangedElsewherePerturbed) {
  std::mt19937_64 gen(2);
  const auto row = oracle::random_series(gen, 15);
  const auto x = make_series("x", ClassLabel("DT"), {row, oracle::random_series(gen, 15)}, 20);
  ShapeletPool pool;
  pool.shapelets.push_back(shapelet_of(V(row.begin() + 4, row.begin() + 9), "DT"));
  SeededRng rng(4);
  const auto y = augment_instance(x, pool, NoiseSpec{0.0, 0.5}, rng, "x#aug0");
  for (std::size_t t = 0; t < 20; ++t) {
    if (t >= 4 && t < 9) EXPECT_EQ(y.at(0, t), x.at(0, t)) << t;
    else if (t < 15) EXPECT_NE(y.at(0, t), x.at(0, t)) << t;
    else EXPECT_EQ(y.at(0, t), 0.0);
    if (t < 15) EXPECT_NE(y.at(1, t), x.at(1, t));
    else EXPECT_EQ(y.at(1, t), 0.0);
  }
}

TEST(AugmentInstance, SameSeedSameOutput) {
  std::mt19937_64 gen(3);
  const auto x = make_series("x", ClassLabel("DT"), {oracle::random_series(gen, 15)}, 20);
  ShapeletPool pool;
  pool.shapelets.push_back(shapelet_of({0, 1, 0}, "DT"));
  pool.shapelets.push_back(shapelet_of({1, 0, 1, 0}, "DT"));
  SeededRng a(5), b(5);
  EXPECT_EQ(augment_instance(x, pool, {}, a, "y"), augment_instance(x, pool, {}, b, "y"));
}

TEST(AugmentInstance, NoSameClassShapeletIsAnError) {
  const auto x = make_series("x", ClassLabel("DT"), {{1, 2, 3, 4}}, 4);
  ShapeletPool pool;
  pool.shapelets.push_back(shapelet_of({0, 1, 0}, "AC"));
  SeededRng rng(1);
  EXPECT_THROW(augment_instance(x, pool, {}, rng, "y"), DataError);
}

TEST(AugmentInstance, NoFittingShapeletPerturbsEverything) {
  quiet_warnings() = true;
  const auto x = make_series("x", ClassLabel("DT"), {{1, 2, 3, 4}}, 6);
  ShapeletPool pool;
  pool.shapelets.push_back(shapelet_of({0, 1, 0, 1, 0}, "DT"));  // too long for x
  SeededRng rng(1);
  const auto y = augment_instance(x, pool, {}, rng, "y");
  for (std::size_t t = 0; t < 4; ++t) EXPECT_NE(y.at(0, t), x.at(0, t));
  EXPECT_EQ(y.at(0, 4), 0.0);
  EXPECT_EQ(y.at(0, 5), 0.0);
}

TEST(AugmentInstance, NoiseScalesWithChannelSpread) {
  // Channel 1 is 100x channel 0; so is its noise.
  std::mt19937_64 gen(4);
  auto row = oracle::random_series(gen, 400);
  V big(row);
  for (double& v : big) v *= 100;
  const auto x = make_series("x", ClassLabel("IE"), {row, big}, 400);
  ShapeletPool pool;
  pool.shapelets.push_back(shapelet_of(V(row.begin(), row.begin() + 3), "IE"));
  SeededRng rng(9);
  const auto y = augment_instance(x, pool, NoiseSpec{0.0, 0.1}, rng, "y");
  V n0, n1;
  for (std::size_t t = 3; t < 400; ++t) {
    n0.push_back(y.at(0, t) - x.at(0, t));
    n1.push_back(y.at(1, t) - x.at(1, t));
  }
  const double ratio = channel_stddev(n1) / channel_stddev(n0);
  EXPECT_GT(ratio, 70.0);
  EXPECT_LT(ratio, 140.0);
}

TEST(BalanceDataset, CountContract) {
  const auto d = imbalanced({{"NP", 100}, {"AC", 5}, {"DT", 5}, {"IE", 5}}, 1);
  const auto pool = pool_for(d);
  Config cfg;
  cfg.r_sa = 10;
  const auto out = balance_dataset(d, pool, cfg);
  const auto counts = out.class_counts();
  EXPECT_EQ(counts.at(ClassLabel("NP")), 100u);
  EXPECT_EQ(counts.at(ClassLabel("AC")), 55u);
  EXPECT_EQ(counts.at(ClassLabel("DT")), 55u);
  EXPECT_EQ(counts.at(ClassLabel("IE")), 55u);
  for (std::size_t i = 0; i < d.size(); ++i) EXPECT_EQ(out[i], d[i]);
  for (std::size_t i = d.size(); i < out.size(); ++i) {
    const auto& y = out[i];
    const auto hash = y.id().find("#aug");
    ASSERT_NE(hash, std::string::npos);
    const auto* src = d.find(y.id().substr(0, hash));
    ASSERT_NE(src, nullptr);
    EXPECT_EQ(y.label(), src->label());
    EXPECT_EQ(y.original_length(), src->original_length());
  }
}

TEST(BalanceDataset, ZeroRatioIsIdentity) {
  const auto d = imbalanced({{"NP", 10}, {"AC", 3}}, 2);
  Config cfg;
  cfg.r_sa = 0;
  EXPECT_EQ(balance_dataset(d, pool_for(d), cfg), d);
}

TEST(BalanceDataset, DeterministicAcrossThreads) {
  const auto d = imbalanced({{"NP", 20}, {"AC", 4}, {"DT", 3}}, 3);
  const auto pool = pool_for(d);
  Config cfg;
  cfg.seed = 17;
  const auto a = balance_dataset(d, pool, cfg);
  cfg.threads = 4;
  EXPECT_EQ(balance_dataset(d, pool, cfg), a);
  cfg.seed = 18;
  EXPECT_NE(balance_dataset(d, pool, cfg), a);
}

TEST(AugmentedId, Format) { EXPECT_EQ(augmented_id("syn00001", 3), "syn00001#aug3"); }
