#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <map>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "ship/core.hpp"
#include "ship/error.hpp"
#include "ship/features.hpp"
#include "ship/rng.hpp"

namespace ship {

inline constexpr double kProbabilityFloor = 1e-12;

// Three linear layers d -> h1 -> h2 -> |Y| with ReLU between them.
// Weights are stored input-major (w1 is d x h1) so a batch is Z * w1.
template <typename Scalar>
struct HeadParams {
  using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  Mat w1, w2, w3;
  Vec b1, b2, b3;

  std::size_t input_dim() const { return static_cast<std::size_t>(w1.rows()); }
  std::size_t num_classes() const { return static_cast<std::size_t>(w3.cols()); }

  static HeadParams zeros(std::size_t d, std::size_t h1, std::size_t h2, std::size_t classes) {
    HeadParams p;
    const auto D = static_cast<Eigen::Index>(d), H1 = static_cast<Eigen::Index>(h1),
               H2 = static_cast<Eigen::Index>(h2), C = static_cast<Eigen::Index>(classes);
    p.w1 = Mat::Zero(D, H1);
    p.b1 = Vec::Zero(H1);
    p.w2 = Mat::Zero(H1, H2);
    p.b2 = Vec::Zero(H2);
    p.w3 = Mat::Zero(H2, C);
    p.b3 = Vec::Zero(C);
    return p;
  }

  // Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) for weights and biases.
  static HeadParams init(std::size_t d, std::size_t h1, std::size_t h2, std::size_t classes,
                         SeededRng& rng) {
    HeadParams p = zeros(d, h1, h2, classes);
    auto fill = [&rng](auto& m, std::size_t fan_in) {
      const double bound = 1.0 / std::sqrt(static_cast<double>(std::max<std::size_t>(fan_in, 1)));
      for (Eigen::Index j = 0; j < m.cols(); ++j)
        for (Eigen::Index i = 0; i < m.rows(); ++i)
          m(i, j) = static_cast<Scalar>((2.0 * rng.uniform() - 1.0) * bound);
    };
    fill(p.w1, d);
    fill(p.b1, d);
    fill(p.w2, h1);
    fill(p.b2, h1);
    fill(p.w3, h2);
    fill(p.b3, h2);
    return p;
  }

  // Visits (param, other) pairs in a fixed order.
  template <typename Fn>
  void zip(HeadParams& other, Fn&& fn) {
    fn(w1, other.w1);
    fn(b1, other.b1);
    fn(w2, other.w2);
    fn(b2, other.b2);
    fn(w3, other.w3);
    fn(b3, other.b3);
  }

  template <typename Fn>
  void each(Fn&& fn) const {
    fn(w1);
    fn(b1);
    fn(w2);
    fn(b2);
    fn(w3);
    fn(b3);
  }

  bool operator==(const HeadParams& o) const {
    return w1 == o.w1 && b1 == o.b1 && w2 == o.w2 && b2 == o.b2 && w3 == o.w3 && b3 == o.b3;
  }
};

template <typename Scalar>
using BatchMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

template <typename Scalar>
struct ForwardCache {
  BatchMatrix<Scalar> a1, h1, a2, h2, probs;
};

template <typename Derived>
void softmax_rows(Eigen::MatrixBase<Derived>& m) {
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    const auto mx = m.row(r).maxCoeff();
    m.row(r) = (m.row(r).array() - mx).exp().matrix();
    m.row(r) /= m.row(r).sum();
  }
}

// Batch forward pass; rows of z are instances.
template <typename Scalar>
ForwardCache<Scalar> forward_batch(const HeadParams<Scalar>& p, const BatchMatrix<Scalar>& z) {
  ForwardCache<Scalar> c;
  c.a1 = (z * p.w1).rowwise() + p.b1.transpose();
  c.h1 = c.a1.cwiseMax(Scalar(0));
  c.a2 = (c.h1 * p.w2).rowwise() + p.b2.transpose();
  c.h2 = c.a2.cwiseMax(Scalar(0));
  c.probs = (c.h2 * p.w3).rowwise() + p.b3.transpose();
  softmax_rows(c.probs);
  return c;
}

// Class probabilities for one feature vector.
template <typename Scalar>
std::vector<Scalar> forward(const HeadParams<Scalar>& p, std::span<const Scalar> z) {
  if (z.size() != p.input_dim())
    throw DataError("forward: feature dimension " + std::to_string(z.size()) + ", expected " +
                    std::to_string(p.input_dim()));
  BatchMatrix<Scalar> row(1, static_cast<Eigen::Index>(z.size()));
  for (std::size_t j = 0; j < z.size(); ++j) {
    using std::isfinite;
    if (!isfinite(z[j])) throw DataError("forward: non-finite input");
    row(0, static_cast<Eigen::Index>(j)) = z[j];
  }
  const auto c = forward_batch(p, row);
  return std::vector<Scalar>(c.probs.data(), c.probs.data() + c.probs.size());
}

// Cross-entropy of one prediction.
template <typename Scalar>
Scalar cross_entropy(std::span<const Scalar> probs, std::size_t label) {
  using std::log;
  using std::max;
  return -log(max(probs[label], Scalar(kProbabilityFloor)));
}

// Mean cross-entropy over the batch and its gradient with respect to every
// parameter.
template <typename Scalar>
Scalar loss_and_gradient(const HeadParams<Scalar>& p, const BatchMatrix<Scalar>& z,
                         std::span<const std::size_t> labels, HeadParams<Scalar>* grad) {
  const auto c = forward_batch(p, z);
  const Eigen::Index n = z.rows();
  Scalar loss(0);
  for (Eigen::Index r = 0; r < n; ++r) {
    using std::log;
    using std::max;
    loss -= log(max(c.probs(r, static_cast<Eigen::Index>(labels[r])), Scalar(kProbabilityFloor)));
  }
  loss /= static_cast<Scalar>(n);
  if (!grad) return loss;

  BatchMatrix<Scalar> d3 = c.probs;
  for (Eigen::Index r = 0; r < n; ++r) d3(r, static_cast<Eigen::Index>(labels[r])) -= Scalar(1);
  d3 /= static_cast<Scalar>(n);
  grad->w3 = c.h2.transpose() * d3;
  grad->b3 = d3.colwise().sum().transpose();
  BatchMatrix<Scalar> d2 = (d3 * p.w3.transpose()).cwiseProduct(
      (c.a2.array() > Scalar(0)).template cast<Scalar>().matrix());
  grad->w2 = c.h1.transpose() * d2;
  grad->b2 = d2.colwise().sum().transpose();
  BatchMatrix<Scalar> d1 = (d2 * p.w2.transpose()).cwiseProduct(
      (c.a1.array() > Scalar(0)).template cast<Scalar>().matrix());
  grad->w1 = z.transpose() * d1;
  grad->b1 = d1.colwise().sum().transpose();
  return loss;
}

// Adaptive-moment optimizer with bias correction.
template <typename Scalar>
class Adam {
 public:
  Adam(const HeadParams<Scalar>& like, double lr, double beta1, double beta2, double eps)
      : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {
    m_ = like;
    v_ = like;
    auto zero = [](auto& a, auto& b) {
      a.setZero();
      b.setZero();
    };
    m_.zip(v_, zero);
  }

  void step(HeadParams<Scalar>& params, HeadParams<Scalar>& grad) {
    ++t_;
    const Scalar c1 = Scalar(1) - static_cast<Scalar>(std::pow(beta1_, static_cast<double>(t_)));
    const Scalar c2 = Scalar(1) - static_cast<Scalar>(std::pow(beta2_, static_cast<double>(t_)));
    const Scalar b1 = static_cast<Scalar>(beta1_), b2 = static_cast<Scalar>(beta2_);
    const Scalar lr = static_cast<Scalar>(lr_), eps = static_cast<Scalar>(eps_);
    update(params.w1, grad.w1, m_.w1, v_.w1, b1, b2, c1, c2, lr, eps);
    update(params.b1, grad.b1, m_.b1, v_.b1, b1, b2, c1, c2, lr, eps);
    update(params.w2, grad.w2, m_.w2, v_.w2, b1, b2, c1, c2, lr, eps);
    update(params.b2, grad.b2, m_.b2, v_.b2, b1, b2, c1, c2, lr, eps);
    update(params.w3, grad.w3, m_.w3, v_.w3, b1, b2, c1, c2, lr, eps);
    update(params.b3, grad.b3, m_.b3, v_.b3, b1, b2, c1, c2, lr, eps);
  }

 private:
  template <typename M>
  static void update(M& p, const M& g, M& m, M& v, Scalar b1, Scalar b2, Scalar c1, Scalar c2,
                     Scalar lr, Scalar eps) {
    m = b1 * m + (Scalar(1) - b1) * g;
    v = b2 * v + (Scalar(1) - b2) * g.cwiseProduct(g);
    p.array() -= lr * (m.array() / c1) / ((v.array() / c2).sqrt() + eps);
  }

  double lr_, beta1_, beta2_, eps_;
  std::size_t t_ = 0;
  HeadParams<Scalar> m_, v_;
};

// Index of each label in a sorted label list.
inline std::vector<std::size_t> label_indices(const std::vector<ClassLabel>& labels,
                                              const std::vector<ClassLabel>& known) {
  std::vector<std::size_t> out;
  out.reserve(labels.size());
  for (const auto& l : labels) {
    const auto it = std::find(known.begin(), known.end(), l);
    if (it == known.end()) throw DataError("unknown class label '" + l.name() + "'");
    out.push_back(static_cast<std::size_t>(it - known.begin()));
  }
  return out;
}

struct ClassMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t support = 0;
};

struct EvalReport {
  std::vector<ClassLabel> labels;
  std::vector<std::vector<std::size_t>> confusion;  // [truth][prediction]
  std::vector<ClassMetrics> per_class;
  double precision = 0.0;  // support-weighted
  double recall = 0.0;     // support-weighted
  double f1 = 0.0;         // support-weighted
  double macro_f1 = 0.0;
  double accuracy = 0.0;
  std::size_t total = 0;

  const ClassMetrics* find(const std::string& name) const {
    for (std::size_t i = 0; i < labels.size(); ++i)
      if (labels[i].name() == name) return &per_class[i];
    return nullptr;
  }
};

// Metrics from index-coded truth and predictions. Precision/recall/F1 are 0
// where undefined; macro-F1 averages the classes that occur in either list.
inline EvalReport metrics_report(const std::vector<ClassLabel>& labels,
                                 std::span<const std::size_t> truth,
                                 std::span<const std::size_t> pred) {
  if (truth.size() != pred.size()) throw Error("metrics: truth/prediction size mismatch");
  const std::size_t c = labels.size();
  EvalReport r;
  r.labels = labels;
  r.total = truth.size();
  r.confusion.assign(c, std::vector<std::size_t>(c, 0));
  for (std::size_t i = 0; i < truth.size(); ++i) ++r.confusion[truth[i]][pred[i]];

  std::size_t trace = 0;
  std::size_t present = 0;
  double macro = 0.0;
  r.per_class.resize(c);
  for (std::size_t k = 0; k < c; ++k) {
    const std::size_t tp = r.confusion[k][k];
    std::size_t support = 0, predicted = 0;
    for (std::size_t j = 0; j < c; ++j) {
      support += r.confusion[k][j];
      predicted += r.confusion[j][k];
    }
    auto& m = r.per_class[k];
    m.support = support;
    m.precision = predicted ? static_cast<double>(tp) / static_cast<double>(predicted) : 0.0;
    m.recall = support ? static_cast<double>(tp) / static_cast<double>(support) : 0.0;
    m.f1 = (support + predicted) ? 2.0 * static_cast<double>(tp) / static_cast<double>(support + predicted)
                                 : 0.0;
    trace += tp;
    if (support + predicted > 0) {
      macro += m.f1;
      ++present;
    }
  }
  if (r.total == 0) return r;
  const auto n = static_cast<double>(r.total);
  double wp = 0.0, wf = 0.0;
  for (std::size_t k = 0; k < c; ++k) {
    wp += static_cast<double>(r.per_class[k].support) * r.per_class[k].precision;
    wf += static_cast<double>(r.per_class[k].support) * r.per_class[k].f1;
  }
  r.precision = wp / n;
  // support_k * (tp_k / support_k) is tp_k, so the weighted recall is summed
  // from the integer counts directly.
  std::size_t weighted_recall_numerator = 0;
  for (std::size_t k = 0; k < c; ++k) weighted_recall_numerator += r.confusion[k][k];
  r.recall = static_cast<double>(weighted_recall_numerator) / n;
  r.f1 = wf / n;
  r.macro_f1 = present ? macro / static_cast<double>(present) : 0.0;
  r.accuracy = static_cast<double>(trace) / n;
  return r;
}

struct EpochRecord {
  std::size_t epoch = 0;
  double train_loss = 0.0;
  double val_macro_f1 = 0.0;
};

struct ModelCheckpoint {
  std::vector<ClassLabel> labels;
  FeatureScaler scaler;
  HeadParams<double> params;
  FeatureOptions features;
  std::vector<EpochRecord> history;
  std::size_t best_epoch = 0;
  std::string config_hash;
  std::string pool_path;
};

inline BatchMatrix<double> to_matrix(const std::vector<std::vector<double>>& rows,
                                     const FeatureScaler& scaler) {
  const auto n = static_cast<Eigen::Index>(rows.size());
  const auto d = static_cast<Eigen::Index>(scaler.mean.size());
  BatchMatrix<double> m(n, d);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& r = rows[static_cast<std::size_t>(i)];
    if (static_cast<Eigen::Index>(r.size()) != d)
      throw DataError("feature dimension " + std::to_string(r.size()) + ", expected " +
                      std::to_string(d));
    for (Eigen::Index j = 0; j < d; ++j) {
      const double v = (r[static_cast<std::size_t>(j)] - scaler.mean[static_cast<std::size_t>(j)]) /
                       scaler.stddev[static_cast<std::size_t>(j)];
      if (!std::isfinite(v)) throw DataError("non-finite feature value");
      m(i, j) = v;
    }
  }
  return m;
}

inline std::vector<std::size_t> predict_indices(const HeadParams<double>& p, const BatchMatrix<double>& z) {
  const auto c = forward_batch(p, z);
  std::vector<std::size_t> out(static_cast<std::size_t>(z.rows()));
  for (Eigen::Index r = 0; r < z.rows(); ++r) {
    Eigen::Index best = 0;
    c.probs.row(r).maxCoeff(&best);
    out[static_cast<std::size_t>(r)] = static_cast<std::size_t>(best);
  }
  return out;
}

inline std::vector<std::vector<double>> predict_proba(const ModelCheckpoint& ckpt,
                                                      const std::vector<std::vector<double>>& rows) {
  const auto c = forward_batch(ckpt.params, to_matrix(rows, ckpt.scaler));
  std::vector<std::vector<double>> out(rows.size());
  for (Eigen::Index r = 0; r < c.probs.rows(); ++r)
    for (Eigen::Index j = 0; j < c.probs.cols(); ++j) out[static_cast<std::size_t>(r)].push_back(c.probs(r, j));
  return out;
}

inline EvalReport evaluate(const ModelCheckpoint& ckpt, const FeatureSet& data) {
  const auto truth = label_indices(data.labels, ckpt.labels);
  const auto pred = predict_indices(ckpt.params, to_matrix(data.rows, ckpt.scaler));
  return metrics_report(ckpt.labels, truth, pred);
}

// Minibatch Adam on mean cross-entropy with early stopping on validation
// macro-F1. Returns the best-validation parameters.
inline ModelCheckpoint train(const FeatureSet& train_set, const FeatureSet& val_set,
                             const TrainConfig& cfg, const SeededRng& rng) {
  if (train_set.size() == 0 || val_set.size() == 0)
    throw DataError("train: empty training or validation split");
  if (cfg.batch_size == 0 || cfg.learning_rate <= 0.0)
    throw UsageError("train: batch_size and learning_rate must be positive");

  ModelCheckpoint ckpt;
  {
    std::vector<ClassLabel> labels = train_set.labels;
    for (const auto& l : val_set.labels) labels.push_back(l);
    std::sort(labels.begin(), labels.end());
    labels.erase(std::unique(labels.begin(), labels.end()), labels.end());
    ckpt.labels = std::move(labels);
  }
  if (ckpt.labels.size() < 2) throw DataError("train: need at least two classes");

  ckpt.scaler = fit_scaler(train_set.rows);
  const BatchMatrix<double> x_train = to_matrix(train_set.rows, ckpt.scaler);
  const BatchMatrix<double> x_val = to_matrix(val_set.rows, ckpt.scaler);
  const auto y_train = label_indices(train_set.labels, ckpt.labels);
  const auto y_val = label_indices(val_set.labels, ckpt.labels);

  SeededRng init_rng = derive_stream(rng, 0);
  auto params = HeadParams<double>::init(train_set.dim(), cfg.hidden1, cfg.hidden2,
                                         ckpt.labels.size(), init_rng);
  ckpt.params = params;
  Adam<double> opt(params, cfg.learning_rate, cfg.beta1, cfg.beta2, cfg.adam_eps);
  HeadParams<double> grad = params;

  double best_f1 = -1.0;
  std::size_t since_best = 0;
  std::vector<std::size_t> order(train_set.size());
  const auto n = static_cast<Eigen::Index>(train_set.size());
  const auto d = x_train.cols();
  for (std::size_t epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    SeededRng epoch_rng = derive_stream(rng, 1, epoch);
    shuffle(order.begin(), order.end(), epoch_rng);

    double loss_sum = 0.0;
    for (Eigen::Index start = 0; start < n; start += static_cast<Eigen::Index>(cfg.batch_size)) {
      const Eigen::Index len = std::min<Eigen::Index>(static_cast<Eigen::Index>(cfg.batch_size), n - start);
      BatchMatrix<double> xb(len, d);
      std::vector<std::size_t> yb(static_cast<std::size_t>(len));
      for (Eigen::Index i = 0; i < len; ++i) {
        const std::size_t src = order[static_cast<std::size_t>(start + i)];
        xb.row(i) = x_train.row(static_cast<Eigen::Index>(src));
        yb[static_cast<std::size_t>(i)] = y_train[src];
      }
      const double loss = loss_and_gradient(params, xb, yb, &grad);
      if (!std::isfinite(loss))
        throw DivergenceError("train: non-finite loss at epoch " + std::to_string(epoch));
      loss_sum += loss * static_cast<double>(len);
      opt.step(params, grad);
    }

    const auto pred = predict_indices(params, x_val);
    const double f1 = metrics_report(ckpt.labels, y_val, pred).macro_f1;
    ckpt.history.push_back({epoch, loss_sum / static_cast<double>(n), f1});
    if (f1 > best_f1) {
      best_f1 = f1;
      since_best = 0;
      ckpt.params = params;
      ckpt.best_epoch = epoch;
    } else if (++since_best >= cfg.patience) {
      break;
    }
  }
  return ckpt;
}

// Ten evenly spaced values from 3 to floor(0.1 T), rounded and deduplicated.
inline std::vector<std::size_t> k_grid(std::size_t length) {
  if (length < 30) throw UsageError("k_grid: series length must be >= 30");
  const double lo = 3.0;
  const double hi = std::floor(0.1 * static_cast<double>(length));
  std::vector<std::size_t> out;
  for (int i = 0; i < 10; ++i) {
    const double v = lo + (hi - lo) * static_cast<double>(i) / 9.0;
    const auto k = static_cast<std::size_t>(std::lround(v));
    if (std::find(out.begin(), out.end(), k) == out.end()) out.push_back(k);
  }
  return out;
}

}  // namespace ship
