#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <map>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "ship/core.hpp"
#include "ship/error.hpp"
#include "ship/rng.hpp"

namespace ship {

// Class counts of the clinical cohort the default proportions follow.
inline const std::vector<std::pair<std::string, double>>& cohort_class_counts() {
  static const std::vector<std::pair<std::string, double>> counts = {
      {"NP", 280110.0}, {"AC", 6385.0}, {"DT", 10595.0}, {"IE", 8040.0}};
  return counts;
}

struct SynthConfig {
  std::size_t n_instances = 2000;
  std::size_t length = 150;          // T
  std::size_t min_length = 110;      // shortest breath before padding
  std::vector<std::pair<std::string, double>> class_proportions = cohort_class_counts();
  double noise = 0.05;
  std::uint64_t seed = 0;
};

// Largest-remainder allocation; every count is within 1 of n * p.
inline std::vector<std::size_t> allocate_quotas(std::size_t n, const std::vector<double>& weights) {
  double total = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0)) throw UsageError("synthetic: class proportions must be non-negative");
    total += w;
  }
  if (!(total > 0.0)) throw UsageError("synthetic: class proportions sum to zero");
  std::vector<std::size_t> out(weights.size());
  std::vector<std::pair<double, std::size_t>> remainders;
  std::size_t assigned = 0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    const double exact = static_cast<double>(n) * weights[i] / total;
    out[i] = static_cast<std::size_t>(std::floor(exact));
    assigned += out[i];
    remainders.emplace_back(exact - std::floor(exact), i);
  }
  std::stable_sort(remainders.begin(), remainders.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  for (std::size_t i = 0; assigned < n; ++i, ++assigned) ++out[remainders[i % remainders.size()].second];
  return out;
}

namespace synth_detail {

constexpr double kPi = std::numbers::pi;

inline double jitter(SeededRng& rng, double lo, double hi) { return lo + (hi - lo) * rng.uniform(); }

// Half-sine bump of height `amp` over [start, start + width).
inline void add_bump(std::vector<double>& row, double start, double width, double amp) {
  for (std::size_t t = 0; t < row.size(); ++t) {
    const double u = (static_cast<double>(t) - start) / width;
    if (u >= 0.0 && u < 1.0) row[t] += amp * std::sin(kPi * u);
  }
}

// One ventilator breath: Pmask pulse, inspiratory then expiratory flow.
inline void add_breath(std::vector<double>& pmask, std::vector<double>& flow, double start, double ti,
                       double te, double pressure, double peak_flow) {
  add_bump(pmask, start, ti, pressure);
  add_bump(flow, start, ti, peak_flow);
  add_bump(flow, start + ti, te, -0.8 * peak_flow);
}

}  // namespace synth_detail

// Four-channel breath with the motif of its class:
//   NP  one pressure pulse, biphasic flow, in-phase Thor/Abdo effort
//   DT  two pulses separated by a short expiratory gap
//   AC  three or four short pulses in quick succession
//   IE  an NP breath plus a later Thor/Abdo effort no pulse answers; its only
//       trace in Flow is a faint deflection
inline LabeledSeries synthesize_breath(const std::string& id, const std::string& label,
                                       const SynthConfig& cfg, SeededRng& rng) {
  using namespace synth_detail;
  const auto len = static_cast<std::size_t>(
      std::llround(jitter(rng, static_cast<double>(cfg.min_length), static_cast<double>(cfg.length))));
  const double L = static_cast<double>(len);
  std::vector<double> pmask(len, 4.0), flow(len, 0.0), thor(len, 0.0), abdo(len, 0.0);

  const double pressure = jitter(rng, 7.0, 9.0);
  const double peak_flow = jitter(rng, 0.8, 1.2);
  const double effort = jitter(rng, 0.7, 1.0);
  const double scale = jitter(rng, 0.9, 1.1);
  const double lag = jitter(rng, 1.0, 3.0);

  auto patient_effort = [&](double start, double width, double amp) {
    add_bump(thor, start, width, amp);
    add_bump(abdo, start + lag, width, 0.8 * amp);
  };

  if (label == "DT") {
    const double ti = 0.2 * L * scale, gap = 0.06 * L;
    add_breath(pmask, flow, 0.0, ti, gap, pressure, peak_flow);
    add_breath(pmask, flow, ti + gap, ti, 0.35 * L, pressure, peak_flow);
    patient_effort(0.0, ti + 5.0, effort);
  } else if (label == "AC") {
    const std::size_t pulses = rng.uniform() < 0.5 ? 3 : 4;
    const double ti = 0.14 * L * scale, gap = 0.05 * L;
    for (std::size_t p = 0; p < pulses; ++p) {
      const double start = static_cast<double>(p) * (ti + gap);
      add_breath(pmask, flow, start, ti, gap, 0.85 * pressure, 0.9 * peak_flow);
    }
    patient_effort(0.0, ti + 5.0, 0.5 * effort);
  } else {
    const double ti = 0.35 * L * scale;
    add_breath(pmask, flow, 0.0, ti, 0.4 * L, pressure, peak_flow);
    patient_effort(0.0, ti + 5.0, effort);
    if (label == "IE") {
      const double start = jitter(rng, 0.55, 0.65) * L, width = 0.18 * L;
      patient_effort(start, width, 0.9 * effort);
      add_bump(flow, start, width, 0.08 * peak_flow);
    }
  }

  std::vector<std::vector<double>> rows{std::move(pmask), std::move(flow), std::move(thor), std::move(abdo)};
  const double gains[4] = {2.0, 1.0, 1.0, 1.0};
  for (std::size_t v = 0; v < rows.size(); ++v)
    for (double& x : rows[v]) x += gains[v] * cfg.noise * standard_normal(rng);
  return make_series(id, ClassLabel(label), rows, cfg.length, {"Pmask", "Flow", "Thor", "Abdo"});
}

inline constexpr std::uint64_t kSynthStream = 0x5F7;

// Labeled synthetic dataset; counts follow the proportions by quota and the
// class sequence is shuffled. Pure function of the config.
inline Dataset generate_synthetic(const SynthConfig& cfg) {
  if (cfg.min_length < 30 || cfg.min_length > cfg.length)
    throw UsageError("synthetic: need 30 <= min_length <= length");
  std::vector<double> weights;
  for (const auto& [name, w] : cfg.class_proportions) weights.push_back(w);
  const auto quotas = allocate_quotas(cfg.n_instances, weights);

  std::vector<std::string> labels;
  for (std::size_t c = 0; c < quotas.size(); ++c)
    labels.insert(labels.end(), quotas[c], cfg.class_proportions[c].first);
  const SeededRng base(cfg.seed, kSynthStream);
  SeededRng order_rng = derive_stream(base, 0);
  shuffle(labels.begin(), labels.end(), order_rng);

  Dataset out;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    char id[32];
    std::snprintf(id, sizeof id, "syn%05zu", i);
    SeededRng rng = derive_stream(base, 1, i);
    out.push_back(synthesize_breath(id, labels[i], cfg, rng));
  }
  return out;
}

}  // namespace ship
