#pragma once

// Minimal feedforward stack with manual reverse-mode gradients: dense layers
// with ELU / identity / sigmoid activations, Adam with bias correction, L2
// regularization applied as a loss-gradient term, early stopping, and
// plateau-triggered learning-rate decay.
//
// Binary heads are trained on logits with a fused sigmoid cross-entropy
// (numerically stable in both loss and gradient); predictions apply the
// sigmoid explicitly.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <vector>

#include "catea/core.hpp"
#include "catea/rng.hpp"

namespace catea::net {

struct ShapeMismatch : DataError {
  using DataError::DataError;
};
struct EmptyData : DataError {
  using DataError::DataError;
};

enum class Activation { Elu, Identity, Sigmoid };

struct LayerSpec {
  std::size_t in_dim = 1;
  std::size_t out_dim = 1;
  Activation activation = Activation::Identity;
};

// Dense row-major matrix; batches are (rows = samples, cols = features).
struct Matrix {
  std::size_t rows = 0, cols = 0;
  std::vector<double> a;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), a(r * c, 0.0) {}

  double& operator()(std::size_t i, std::size_t j) { return a[i * cols + j]; }
  double operator()(std::size_t i, std::size_t j) const { return a[i * cols + j]; }
  double* row(std::size_t i) { return a.data() + i * cols; }
  const double* row(std::size_t i) const { return a.data() + i * cols; }
  void zero() { std::fill(a.begin(), a.end(), 0.0); }
};

inline Matrix gather_rows(const Matrix& src, const std::vector<std::size_t>& idx) {
  Matrix out(idx.size(), src.cols);
  for (std::size_t k = 0; k < idx.size(); ++k)
    std::copy(src.row(idx[k]), src.row(idx[k]) + src.cols, out.row(k));
  return out;
}

inline void scatter_add_rows(Matrix& dst, const std::vector<std::size_t>& idx,
                             const Matrix& src) {
  for (std::size_t k = 0; k < idx.size(); ++k) {
    const double* s = src.row(k);
    double* d = dst.row(idx[k]);
    for (std::size_t j = 0; j < src.cols; ++j) d[j] += s[j];
  }
}

namespace detail {

inline double elu(double z) { return z >= 0.0 ? z : std::expm1(z); }
inline double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

inline void apply_activation(Activation act, Matrix& m) {
  switch (act) {
    case Activation::Identity:
      return;
    case Activation::Elu:
      for (double& v : m.a) v = elu(v);
      return;
    case Activation::Sigmoid:
      for (double& v : m.a) v = sigmoid(v);
      return;
  }
}

// Activation derivative recovered from the activation output itself:
// ELU' = 1 for y >= 0 and y + 1 below; sigmoid' = y (1 - y).
inline double activation_grad_from_output(Activation act, double y) {
  switch (act) {
    case Activation::Identity:
      return 1.0;
    case Activation::Elu:
      return y >= 0.0 ? 1.0 : y + 1.0;
    case Activation::Sigmoid:
      return y * (1.0 - y);
  }
  return 1.0;
}

}  // namespace detail

struct Layer {
  Matrix w;                // in_dim x out_dim
  std::vector<double> b;   // out_dim
  Activation act = Activation::Identity;
  Matrix gw;
  std::vector<double> gb;
};

// A chain of dense layers. Forward caches each layer's activation output so
// backward can run without recomputation; backward accumulates parameter
// gradients and returns the gradient with respect to the input batch.
class Mlp {
 public:
  Mlp() = default;

  static Mlp build(const std::vector<LayerSpec>& specs, SplitMix64& rng) {
    Mlp m;
    for (const LayerSpec& s : specs) {
      if (s.in_dim < 1 || s.out_dim < 1)
        throw ShapeMismatch("layer dimensions must be >= 1");
      if (!m.layers_.empty() && m.layers_.back().w.cols != s.in_dim)
        throw ShapeMismatch("layer input does not match previous layer output");
      Layer l;
      l.w = Matrix(s.in_dim, s.out_dim);
      l.b.assign(s.out_dim, 0.0);
      l.act = s.activation;
      const double bound = std::sqrt(6.0 / static_cast<double>(s.in_dim + s.out_dim));
      for (double& v : l.w.a) v = rng.next_uniform(-bound, bound);
      l.gw = Matrix(s.in_dim, s.out_dim);
      l.gb.assign(s.out_dim, 0.0);
      m.layers_.push_back(std::move(l));
    }
    if (m.layers_.empty()) throw ShapeMismatch("an MLP needs at least one layer");
    return m;
  }

  std::size_t in_dim() const { return layers_.front().w.rows; }
  std::size_t out_dim() const { return layers_.back().w.cols; }
  std::vector<Layer>& layers() { return layers_; }
  const std::vector<Layer>& layers() const { return layers_; }

  struct Cache {
    // acts[0] is the input batch, acts[k] the output of layer k-1.
    std::vector<Matrix> acts;
  };

  Matrix forward(const Matrix& x, Cache* cache = nullptr) const {
    if (x.cols != in_dim())
      throw ShapeMismatch("input has " + std::to_string(x.cols) + " features, expected " +
                          std::to_string(in_dim()));
    if (cache) {
      cache->acts.clear();
      cache->acts.reserve(layers_.size() + 1);
      cache->acts.push_back(x);
    }
    Matrix cur = x;
    for (const Layer& l : layers_) {
      Matrix next(cur.rows, l.w.cols);
      for (std::size_t i = 0; i < cur.rows; ++i) {
        double* out = next.row(i);
        std::copy(l.b.begin(), l.b.end(), out);
        const double* in = cur.row(i);
        for (std::size_t p = 0; p < l.w.rows; ++p) {
          const double v = in[p];
          const double* wrow = l.w.row(p);
          for (std::size_t j = 0; j < l.w.cols; ++j) out[j] += v * wrow[j];
        }
      }
      detail::apply_activation(l.act, next);
      cur = std::move(next);
      if (cache) cache->acts.push_back(cur);
    }
    return cur;
  }

  // dout is the loss gradient with respect to the forward output
  // (post-activation). Parameter gradients accumulate into gw/gb.
  Matrix backward(const Cache& cache, const Matrix& dout) {
    if (cache.acts.size() != layers_.size() + 1)
      throw ShapeMismatch("cache does not match this network");
    if (dout.rows != cache.acts.back().rows || dout.cols != out_dim())
      throw ShapeMismatch("output gradient shape mismatch");
    Matrix delta = dout;
    for (std::size_t li = layers_.size(); li-- > 0;) {
      Layer& l = layers_[li];
      const Matrix& out = cache.acts[li + 1];
      const Matrix& in = cache.acts[li];
      for (std::size_t i = 0; i < delta.rows; ++i) {
        double* drow = delta.row(i);
        const double* orow = out.row(i);
        for (std::size_t j = 0; j < delta.cols; ++j)
          drow[j] *= detail::activation_grad_from_output(l.act, orow[j]);
      }
      for (std::size_t i = 0; i < delta.rows; ++i) {
        const double* drow = delta.row(i);
        const double* irow = in.row(i);
        for (std::size_t j = 0; j < l.w.cols; ++j) l.gb[j] += drow[j];
        for (std::size_t p = 0; p < l.w.rows; ++p) {
          const double v = irow[p];
          double* grow = l.gw.row(p);
          for (std::size_t j = 0; j < l.w.cols; ++j) grow[j] += v * drow[j];
        }
      }
      if (li == 0) {
        Matrix dx(delta.rows, l.w.rows);
        for (std::size_t i = 0; i < delta.rows; ++i) {
          const double* drow = delta.row(i);
          double* xrow = dx.row(i);
          for (std::size_t p = 0; p < l.w.rows; ++p) {
            const double* wrow = l.w.row(p);
            double acc = 0.0;
            for (std::size_t j = 0; j < l.w.cols; ++j) acc += drow[j] * wrow[j];
            xrow[p] = acc;
          }
        }
        return dx;
      }
      Matrix dprev(delta.rows, l.w.rows);
      for (std::size_t i = 0; i < delta.rows; ++i) {
        const double* drow = delta.row(i);
        double* prow = dprev.row(i);
        for (std::size_t p = 0; p < l.w.rows; ++p) {
          const double* wrow = l.w.row(p);
          double acc = 0.0;
          for (std::size_t j = 0; j < l.w.cols; ++j) acc += drow[j] * wrow[j];
          prow[p] = acc;
        }
      }
      delta = std::move(dprev);
    }
    return {};
  }

  void zero_grads() {
    for (Layer& l : layers_) {
      l.gw.zero();
      std::fill(l.gb.begin(), l.gb.end(), 0.0);
    }
  }

  template <class Fn>
  void for_each_tensor(Fn&& fn) {
    for (Layer& l : layers_) {
      fn(l.w.a.data(), l.gw.a.data(), l.w.a.size(), true);
      fn(l.b.data(), l.gb.data(), l.b.size(), false);
    }
  }

 private:
  std::vector<Layer> layers_;
};

// --------------------------------------------------------------------------
// Losses
// --------------------------------------------------------------------------

enum class LossKind { SquaredError, SigmoidCrossEntropy };

constexpr double kProbClamp = 1e-6;

inline double clamp_probability(double p) {
  return std::min(1.0 - kProbClamp, std::max(kProbClamp, p));
}

// Per-sample loss value. For SigmoidCrossEntropy `z` is the logit; the
// probability is clamped to [1e-6, 1-1e-6] before the logs.
inline double loss_value(LossKind kind, double z, double y) {
  if (kind == LossKind::SquaredError) {
    const double d = z - y;
    return d * d;
  }
  const double p = clamp_probability(detail::sigmoid(z));
  return -(y * std::log(p) + (1.0 - y) * std::log(1.0 - p));
}

// Per-sample loss gradient with respect to z.
inline double loss_grad(LossKind kind, double z, double y) {
  if (kind == LossKind::SquaredError) return 2.0 * (z - y);
  return detail::sigmoid(z) - y;
}

// --------------------------------------------------------------------------
// Adam
// --------------------------------------------------------------------------

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// Bias-corrected Adam over a model's tensors. L2 regularization enters as a
// gradient term l2 * w on weight matrices (not decoupled; biases exempt).
class AdamState {
 public:
  template <class Model>
  explicit AdamState(Model& model, AdamConfig cfg = {}) : cfg_(cfg) {
    model.for_each_tensor([&](double*, double*, std::size_t n, bool) {
      m_.emplace_back(n, 0.0);
      v_.emplace_back(n, 0.0);
    });
  }

  template <class Model>
  void step(Model& model, double lr, double l2 = 0.0) {
    ++t_;
    const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
    std::size_t k = 0;
    model.for_each_tensor([&](double* p, double* g, std::size_t n, bool is_weight) {
      if (k >= m_.size() || m_[k].size() != n)
        throw ShapeMismatch("Adam state does not match model tensors");
      std::vector<double>& m = m_[k];
      std::vector<double>& v = v_[k];
      for (std::size_t i = 0; i < n; ++i) {
        const double grad = g[i] + (is_weight ? l2 * p[i] : 0.0);
        m[i] = cfg_.beta1 * m[i] + (1.0 - cfg_.beta1) * grad;
        v[i] = cfg_.beta2 * v[i] + (1.0 - cfg_.beta2) * grad * grad;
        const double mhat = m[i] / bc1;
        const double vhat = v[i] / bc2;
        p[i] -= lr * mhat / (std::sqrt(vhat) + cfg_.epsilon);
      }
      ++k;
    });
  }

  long timestep() const { return t_; }

 private:
  AdamConfig cfg_;
  std::vector<std::vector<double>> m_, v_;
  long t_ = 0;
};

// --------------------------------------------------------------------------
// Training loop
// --------------------------------------------------------------------------

struct TrainConfig {
  double learning_rate = 1e-4;
  std::size_t max_epochs = 1000;
  std::vector<double> l2_grid = {1e-2, 5e-3, 1e-3, 5e-4, 1e-4, 5e-5, 1e-5, 0.0};
  std::size_t patience = 5;
  double lr_decay_factor = 0.5;
  std::size_t lr_decay_patience = 5;
  std::size_t batch_size = 0;  // 0 = full batch
  std::uint64_t seed = 0;

  void validate() const {
    if (!(learning_rate > 0.0)) throw ConfigError("learning_rate must be > 0");
    if (patience < 1) throw ConfigError("patience must be >= 1");
    if (lr_decay_patience < 1) throw ConfigError("lr_decay_patience must be >= 1");
    if (l2_grid.empty()) throw ConfigError("l2_grid must not be empty");
  }
};

struct HistoryRow {
  std::size_t epoch = 0;
  double train_loss = 0.0;
  double val_loss = 0.0;
  double lr = 0.0;
};

struct TrainResult {
  std::vector<HistoryRow> history;
  double best_val_loss = std::numeric_limits<double>::infinity();
  std::size_t best_epoch = 0;  // 0 when training never ran an epoch
};

namespace detail {

template <class Model>
std::vector<double> snapshot_params(Model& model) {
  std::vector<double> flat;
  model.for_each_tensor(
      [&](double* p, double*, std::size_t n, bool) { flat.insert(flat.end(), p, p + n); });
  return flat;
}

template <class Model>
void restore_params(Model& model, const std::vector<double>& flat) {
  std::size_t off = 0;
  model.for_each_tensor([&](double* p, double*, std::size_t n, bool) {
    std::copy(flat.begin() + off, flat.begin() + off + n, p);
    off += n;
  });
}

}  // namespace detail

// Trains `model` on `train_batch`, monitoring `val_batch`. A Model provides
//   double forward_backward(const Batch&)   (data loss; grads accumulated)
//   double evaluate(const Batch&) const     (data loss only)
//   void zero_grads()
//   for_each_tensor(fn)
// and a Batch provides size() and subset(indices). Validation loss excludes
// the L2 penalty. On return the model holds the parameters of the epoch with
// the lowest validation loss (ties resolved to the earliest epoch).
template <class Model, class Batch>
TrainResult train(Model& model, const Batch& train_batch, const Batch& val_batch,
                  const TrainConfig& cfg, double l2) {
  cfg.validate();
  if (train_batch.size() == 0 || val_batch.size() == 0)
    throw EmptyData("training requires non-empty train and validation data");

  TrainResult result;
  if (cfg.max_epochs == 0) return result;

  AdamState adam(model);
  SplitMix64 shuffle_rng(derive_seed(cfg.seed, 0x5u));
  double lr = cfg.learning_rate;
  std::vector<double> best_params = detail::snapshot_params(model);
  double best_val = std::numeric_limits<double>::infinity();
  std::size_t epochs_since_best = 0;

  std::vector<std::size_t> order(train_batch.size());
  std::iota(order.begin(), order.end(), 0);

  for (std::size_t epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    double train_loss = 0.0;
    if (cfg.batch_size == 0 || cfg.batch_size >= train_batch.size()) {
      model.zero_grads();
      train_loss = model.forward_backward(train_batch);
      adam.step(model, lr, l2);
    } else {
      for (std::size_t i = order.size(); i > 1; --i)
        std::swap(order[i - 1],
                  order[shuffle_rng.next_u64() % static_cast<std::uint64_t>(i)]);
      double total = 0.0;
      for (std::size_t lo = 0; lo < order.size(); lo += cfg.batch_size) {
        const std::size_t hi = std::min(order.size(), lo + cfg.batch_size);
        const std::vector<std::size_t> idx(order.begin() + lo, order.begin() + hi);
        const Batch mb = train_batch.subset(idx);
        model.zero_grads();
        total += model.forward_backward(mb) * static_cast<double>(idx.size());
        adam.step(model, lr, l2);
      }
      train_loss = total / static_cast<double>(order.size());
    }

    const double val_loss = model.evaluate(val_batch);
    result.history.push_back({epoch, train_loss, val_loss, lr});

    if (val_loss < best_val) {
      best_val = val_loss;
      best_params = detail::snapshot_params(model);
      result.best_epoch = epoch;
      epochs_since_best = 0;
    } else {
      ++epochs_since_best;
      if (epochs_since_best >= cfg.patience) break;
      if (epochs_since_best % cfg.lr_decay_patience == 0) lr *= cfg.lr_decay_factor;
    }
  }

  detail::restore_params(model, best_params);
  result.best_val_loss = best_val;
  return result;
}

// --------------------------------------------------------------------------
// Single-headed network model (one MLP, scalar target)
// --------------------------------------------------------------------------

struct ScalarBatch {
  Matrix x;
  std::vector<double> y;

  std::size_t size() const { return y.size(); }
  ScalarBatch subset(const std::vector<std::size_t>& idx) const {
    ScalarBatch b;
    b.x = gather_rows(x, idx);
    b.y.reserve(idx.size());
    for (std::size_t i : idx) b.y.push_back(y[i]);
    return b;
  }
};

// An MLP with a scalar output head trained under one loss; the workhorse for
// T-learner components. Binary targets use logit outputs with fused sigmoid
// cross-entropy; predict_probability applies the sigmoid and clamp.
struct ScalarNet {
  Mlp mlp;
  LossKind loss = LossKind::SquaredError;

  double forward_backward(const ScalarBatch& batch) {
    Mlp::Cache cache;
    const Matrix out = mlp.forward(batch.x, &cache);
    const double inv_n = 1.0 / static_cast<double>(batch.size());
    Matrix dout(out.rows, 1);
    double total = 0.0;
    for (std::size_t i = 0; i < out.rows; ++i) {
      total += loss_value(loss, out(i, 0), batch.y[i]);
      dout(i, 0) = loss_grad(loss, out(i, 0), batch.y[i]) * inv_n;
    }
    mlp.backward(cache, dout);
    return total * inv_n;
  }

  double evaluate(const ScalarBatch& batch) const {
    const Matrix out = mlp.forward(batch.x);
    double total = 0.0;
    for (std::size_t i = 0; i < out.rows; ++i)
      total += loss_value(loss, out(i, 0), batch.y[i]);
    return total / static_cast<double>(batch.size());
  }

  void zero_grads() { mlp.zero_grads(); }

  template <class Fn>
  void for_each_tensor(Fn&& fn) {
    mlp.for_each_tensor(fn);
  }

  double predict_raw(const std::vector<double>& x) const {
    Matrix m(1, x.size());
    std::copy(x.begin(), x.end(), m.row(0));
    return mlp.forward(m)(0, 0);
  }

  double predict_probability(const std::vector<double>& x) const {
    return clamp_probability(detail::sigmoid(predict_raw(x)));
  }
};

// Standard architecture for this library's learners: `depth` hidden ELU
// layers of width `hidden`, then a linear scalar head (interpreted as a logit
// when the loss is cross-entropy).
inline std::vector<LayerSpec> scalar_head_specs(std::size_t in_dim, std::size_t hidden,
                                                std::size_t depth = 3) {
  std::vector<LayerSpec> specs;
  std::size_t cur = in_dim;
  for (std::size_t k = 0; k < depth; ++k) {
    specs.push_back({cur, hidden, Activation::Elu});
    cur = hidden;
  }
  specs.push_back({cur, 1, Activation::Identity});
  return specs;
}

inline std::vector<LayerSpec> representation_specs(std::size_t in_dim, std::size_t hidden,
                                                   std::size_t depth = 3) {
  std::vector<LayerSpec> specs;
  std::size_t cur = in_dim;
  for (std::size_t k = 0; k < depth; ++k) {
    specs.push_back({cur, hidden, Activation::Elu});
    cur = hidden;
  }
  return specs;
}

}  // namespace catea::net
