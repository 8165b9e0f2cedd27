#pragma once

// Multi-stratum CATEA learners. T-learner variants train one independent
// network per conditioning cell; LobsterNet trains a single multi-task
// parameter set whose shared backbone and assignment-branch representations
// feed every nuisance head, so every sample updates every nuisance estimate.

#include <cmath>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "catea/adjustment.hpp"
#include "catea/core.hpp"
#include "catea/net.hpp"
#include "catea/rng.hpp"

namespace catea::learners {

struct NotFitted : DataError {
  using DataError::DataError;
};
// a = -1 marks cells conditioned on assignment only (intake networks).
struct EmptyConditioningSet : DataError {
  int a, t;
  EmptyConditioningSet(int a_, int t_)
      : DataError("no samples in conditioning cell (a=" +
                  (a_ < 0 ? std::string("*") : std::to_string(a_)) +
                  ",t=" + std::to_string(t_) + ")"),
        a(a_),
        t(t_) {}
};

// Loss-balance weights for LobsterNet's composite objective: 1 for binary
// outcomes, the root mean square of the training outcomes for continuous.
inline std::pair<double, double> alpha_beta_defaults(const Dataset& ds) {
  if (ds.samples.empty()) throw net::EmptyData("alpha_beta_defaults needs samples");
  if (ds.outcome_kind == OutcomeKind::Binary) return {1.0, 1.0};
  double sq = 0.0;
  for (const Sample& s : ds.samples) sq += s.y * s.y;
  const double rms = std::sqrt(sq / static_cast<double>(ds.samples.size()));
  return {rms, rms};
}

class CateaLearner {
 public:
  virtual ~CateaLearner() = default;
  virtual std::string name() const = 0;
  virtual void fit(const Dataset& train, const Dataset& val,
                   const net::TrainConfig& cfg) = 0;
  virtual adjustment::CateaValue predict_catea(const std::vector<double>& x) const = 0;

  double selected_l2() const { return selected_l2_; }

 protected:
  void require_fitted() const {
    if (!fitted_) throw NotFitted("learner has not been fitted");
  }
  bool fitted_ = false;
  double selected_l2_ = 0.0;
};

namespace detail {

inline net::Matrix feature_matrix(const Dataset& ds, const std::vector<std::size_t>& idx) {
  net::Matrix x(idx.size(), ds.feature_dim);
  for (std::size_t k = 0; k < idx.size(); ++k)
    std::copy(ds.samples[idx[k]].x.begin(), ds.samples[idx[k]].x.end(), x.row(k));
  return x;
}

template <class TargetFn>
net::ScalarBatch scalar_batch(const Dataset& ds, const std::vector<std::size_t>& idx,
                              TargetFn&& target) {
  net::ScalarBatch b;
  b.x = feature_matrix(ds, idx);
  b.y.reserve(idx.size());
  for (std::size_t i : idx) b.y.push_back(target(ds.samples[i]));
  return b;
}

inline std::vector<std::size_t> all_indices(const Dataset& ds) {
  std::vector<std::size_t> idx(ds.samples.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  return idx;
}

template <class Pred>
std::vector<std::size_t> indices_where(const Dataset& ds, Pred&& pred) {
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < ds.samples.size(); ++i)
    if (pred(ds.samples[i])) idx.push_back(i);
  return idx;
}

// Grid values sorted descending so that a strict improvement rule breaks
// validation-loss ties toward the larger regularization strength.
inline std::vector<double> descending_l2_grid(const net::TrainConfig& cfg) {
  std::vector<double> grid = cfg.l2_grid;
  std::sort(grid.begin(), grid.end(), std::greater<double>());
  return grid;
}

}  // namespace detail

// One per-assignment outcome network pair; the standard backdoor estimator.
class TLearnerSbd : public CateaLearner {
 public:
  explicit TLearnerSbd(std::size_t hidden_width = 300) : hidden_(hidden_width) {}

  std::string name() const override { return "tlearner_sbd"; }

  void fit(const Dataset& train, const Dataset& val,
           const net::TrainConfig& cfg) override {
    validate_dataset(train);
    const net::LossKind loss = train.outcome_kind == OutcomeKind::Binary
                                   ? net::LossKind::SigmoidCrossEntropy
                                   : net::LossKind::SquaredError;
    net::ScalarBatch tb[2], vb[2];
    for (int t = 0; t < 2; ++t) {
      auto cond = [t](const Sample& s) { return s.t == t; };
      const auto train_idx = detail::indices_where(train, cond);
      if (train_idx.empty()) throw EmptyConditioningSet(-1, t);
      auto val_idx = detail::indices_where(val, cond);
      tb[t] = detail::scalar_batch(train, train_idx, [](const Sample& s) { return s.y; });
      // An empty validation slice falls back to validating on the train slice.
      vb[t] = val_idx.empty()
                  ? tb[t]
                  : detail::scalar_batch(val, val_idx, [](const Sample& s) { return s.y; });
    }

    double best_total = std::numeric_limits<double>::infinity();
    bool selected = false;
    for (double l2 : detail::descending_l2_grid(cfg)) {
      net::ScalarNet nets[2];
      double total = 0.0;
      for (int t = 0; t < 2; ++t) {
        SplitMix64 init(derive_seed(cfg.seed, 1 + t));
        nets[t].mlp = net::Mlp::build(
            net::scalar_head_specs(train.feature_dim, hidden_), init);
        nets[t].loss = loss;
        total += net::train(nets[t], tb[t], vb[t], cfg, l2).best_val_loss;
      }
      if (!selected || total < best_total) {
        selected = true;
        best_total = total;
        outcome_[0] = std::move(nets[0]);
        outcome_[1] = std::move(nets[1]);
        selected_l2_ = l2;
      }
    }
    binary_ = train.outcome_kind == OutcomeKind::Binary;
    fitted_ = true;
  }

  adjustment::CateaValue predict_catea(const std::vector<double>& x) const override {
    require_fitted();
    const double y1 = predict_outcome(1, x);
    const double y0 = predict_outcome(0, x);
    return adjustment::sbd_catea(y1, y0);
  }

  double predict_outcome(int t, const std::vector<double>& x) const {
    require_fitted();
    return binary_ ? outcome_[t].predict_probability(x) : outcome_[t].predict_raw(x);
  }

  const net::ScalarNet& outcome_net(int t) const { return outcome_[t]; }
  bool is_binary() const { return binary_; }

  void restore(net::ScalarNet n0, net::ScalarNet n1, bool binary, double l2) {
    outcome_[0] = std::move(n0);
    outcome_[1] = std::move(n1);
    binary_ = binary;
    selected_l2_ = l2;
    fitted_ = true;
  }

 private:
  std::size_t hidden_;
  net::ScalarNet outcome_[2];
  bool binary_ = true;
};

// Independent networks for every CFD nuisance: one propensity net, one intake
// net per assignment, one outcome net per (intake, assignment) cell. Under
// one-sided non-adherence the t=0 intake net and the (a=1,t=0) outcome net
// are omitted (five networks instead of seven).
class TLearnerCfd : public CateaLearner {
 public:
  explicit TLearnerCfd(std::size_t hidden_width = 300) : hidden_(hidden_width) {}

  std::string name() const override { return "tlearner_cfd"; }

  void fit(const Dataset& train, const Dataset& val,
           const net::TrainConfig& cfg) override {
    validate_dataset(train);
    mode_ = train.mode;
    binary_ = train.outcome_kind == OutcomeKind::Binary;
    const bool one_sided = mode_ == NonAdherenceMode::OneSided;
    const net::LossKind outcome_loss =
        binary_ ? net::LossKind::SigmoidCrossEntropy : net::LossKind::SquaredError;

    const auto all_train = detail::all_indices(train);
    const auto all_val = detail::all_indices(val);
    const auto target_t = [](const Sample& s) { return static_cast<double>(s.t); };
    const auto target_a = [](const Sample& s) { return static_cast<double>(s.a); };
    const auto target_y = [](const Sample& s) { return s.y; };

    net::ScalarBatch prop_tb = detail::scalar_batch(train, all_train, target_t);
    net::ScalarBatch prop_vb = val.samples.empty()
                                   ? prop_tb
                                   : detail::scalar_batch(val, all_val, target_t);

    net::ScalarBatch intake_tb[2], intake_vb[2];
    for (int t = 0; t < 2; ++t) {
      if (one_sided && t == 0) continue;
      auto cond = [t](const Sample& s) { return s.t == t; };
      const auto idx = detail::indices_where(train, cond);
      if (idx.empty()) throw EmptyConditioningSet(-1, t);
      const auto vidx = detail::indices_where(val, cond);
      intake_tb[t] = detail::scalar_batch(train, idx, target_a);
      intake_vb[t] =
          vidx.empty() ? intake_tb[t] : detail::scalar_batch(val, vidx, target_a);
    }

    net::ScalarBatch out_tb[2][2], out_vb[2][2];
    for (int a = 0; a < 2; ++a)
      for (int t = 0; t < 2; ++t) {
        if (one_sided && a == 1 && t == 0) continue;
        auto cond = [a, t](const Sample& s) { return s.a == a && s.t == t; };
        const auto idx = detail::indices_where(train, cond);
        if (idx.empty()) throw EmptyConditioningSet(a, t);
        const auto vidx = detail::indices_where(val, cond);
        out_tb[a][t] = detail::scalar_batch(train, idx, target_y);
        out_vb[a][t] =
            vidx.empty() ? out_tb[a][t] : detail::scalar_batch(val, vidx, target_y);
      }

    double best_total = std::numeric_limits<double>::infinity();
    bool selected = false;
    for (double l2 : detail::descending_l2_grid(cfg)) {
      double total = 0.0;
      net::ScalarNet prop;
      net::ScalarNet intake[2], outcome[2][2];
      {
        SplitMix64 init(derive_seed(cfg.seed, 10));
        prop.mlp = net::Mlp::build(net::scalar_head_specs(train.feature_dim, hidden_), init);
        prop.loss = net::LossKind::SigmoidCrossEntropy;
        total += net::train(prop, prop_tb, prop_vb, cfg, l2).best_val_loss;
      }
      for (int t = 0; t < 2; ++t) {
        if (one_sided && t == 0) continue;
        SplitMix64 init(derive_seed(cfg.seed, 20 + t));
        intake[t].mlp =
            net::Mlp::build(net::scalar_head_specs(train.feature_dim, hidden_), init);
        intake[t].loss = net::LossKind::SigmoidCrossEntropy;
        total += net::train(intake[t], intake_tb[t], intake_vb[t], cfg, l2).best_val_loss;
      }
      for (int a = 0; a < 2; ++a)
        for (int t = 0; t < 2; ++t) {
          if (one_sided && a == 1 && t == 0) continue;
          SplitMix64 init(derive_seed(cfg.seed, 30 + 2 * a + t));
          outcome[a][t].mlp =
              net::Mlp::build(net::scalar_head_specs(train.feature_dim, hidden_), init);
          outcome[a][t].loss = outcome_loss;
          total +=
              net::train(outcome[a][t], out_tb[a][t], out_vb[a][t], cfg, l2).best_val_loss;
        }
      if (!selected || total < best_total) {
        selected = true;
        best_total = total;
        propensity_ = std::move(prop);
        for (int t = 0; t < 2; ++t) intake_[t] = std::move(intake[t]);
        for (int a = 0; a < 2; ++a)
          for (int t = 0; t < 2; ++t) outcome_[a][t] = std::move(outcome[a][t]);
        selected_l2_ = l2;
      }
    }
    fitted_ = true;
  }

  NuisanceValues predict_nuisances(const std::vector<double>& x) const {
    require_fitted();
    const bool one_sided = mode_ == NonAdherenceMode::OneSided;
    NuisanceValues nv;
    nv.pi = propensity_.predict_probability(x);
    nv.a_given_t[0] = one_sided ? 0.0 : intake_[0].predict_probability(x);
    nv.a_given_t[1] = intake_[1].predict_probability(x);
    for (int a = 0; a < 2; ++a)
      for (int t = 0; t < 2; ++t) {
        if (one_sided && a == 1 && t == 0) continue;
        nv.y_given_at[a][t] = binary_ ? outcome_[a][t].predict_probability(x)
                                      : outcome_[a][t].predict_raw(x);
      }
    return nv;
  }

  adjustment::CateaValue predict_catea(const std::vector<double>& x) const override {
    return adjustment::cfd_catea(predict_nuisances(x), mode_);
  }

  NonAdherenceMode mode() const { return mode_; }
  bool is_binary() const { return binary_; }
  const net::ScalarNet& propensity_net() const { return propensity_; }
  const net::ScalarNet& intake_net(int t) const { return intake_[t]; }
  const net::ScalarNet& outcome_net(int a, int t) const { return outcome_[a][t]; }

  struct Parts {
    NonAdherenceMode mode = NonAdherenceMode::TwoSided;
    bool binary = true;
    double l2 = 0.0;
    net::ScalarNet propensity;
    net::ScalarNet intake[2];
    net::ScalarNet outcome[2][2];
  };

  void restore(Parts parts) {
    mode_ = parts.mode;
    binary_ = parts.binary;
    selected_l2_ = parts.l2;
    propensity_ = std::move(parts.propensity);
    for (int t = 0; t < 2; ++t) intake_[t] = std::move(parts.intake[t]);
    for (int a = 0; a < 2; ++a)
      for (int t = 0; t < 2; ++t) outcome_[a][t] = std::move(parts.outcome[a][t]);
    fitted_ = true;
  }

 private:
  std::size_t hidden_;
  NonAdherenceMode mode_ = NonAdherenceMode::TwoSided;
  bool binary_ = true;
  net::ScalarNet propensity_;
  net::ScalarNet intake_[2];
  net::ScalarNet outcome_[2][2];
};

// --------------------------------------------------------------------------
// LobsterNet
// --------------------------------------------------------------------------

struct LobsterBatch {
  net::Matrix x;
  std::vector<int> t, a;
  std::vector<double> y;

  std::size_t size() const { return y.size(); }
  LobsterBatch subset(const std::vector<std::size_t>& idx) const {
    LobsterBatch b;
    b.x = net::gather_rows(x, idx);
    b.t.reserve(idx.size());
    b.a.reserve(idx.size());
    b.y.reserve(idx.size());
    for (std::size_t i : idx) {
      b.t.push_back(t[i]);
      b.a.push_back(a[i]);
      b.y.push_back(y[i]);
    }
    return b;
  }

  static LobsterBatch from_dataset(const Dataset& ds) {
    LobsterBatch b;
    b.x = detail::feature_matrix(ds, detail::all_indices(ds));
    b.t.reserve(ds.size());
    b.a.reserve(ds.size());
    b.y.reserve(ds.size());
    for (const Sample& s : ds.samples) {
      b.t.push_back(s.t);
      b.a.push_back(s.a);
      b.y.push_back(s.y);
    }
    return b;
  }
};

// The joint multi-task parameter set. A backbone produces a shared
// representation; per-assignment branches refine it; the propensity head
// reads the backbone, the intake heads read their branch, and the two
// per-intake outcome heads read whichever branch the router selects for the
// assignment being conditioned on. Ŷ(a,t,x) = F_{Ya}(Z_t(Ω(x))); the router
// is pure selection and has no parameters.
struct LobsterParams {
  net::Mlp omega;
  net::Mlp f_t;
  net::Mlp z[2];
  net::Mlp f_a[2];
  net::Mlp f_y[2];
  net::LossKind outcome_loss = net::LossKind::SigmoidCrossEntropy;
  double alpha = 1.0;
  double beta = 1.0;

  static LobsterParams build(std::size_t in_dim, std::size_t shared_width,
                             std::size_t head_width, net::LossKind outcome_loss,
                             double alpha, double beta, std::uint64_t seed) {
    LobsterParams p;
    p.outcome_loss = outcome_loss;
    p.alpha = alpha;
    p.beta = beta;
    SplitMix64 r_omega(derive_seed(seed, 40));
    p.omega = net::Mlp::build(net::representation_specs(in_dim, shared_width), r_omega);
    SplitMix64 r_ft(derive_seed(seed, 41));
    p.f_t = net::Mlp::build(net::scalar_head_specs(shared_width, head_width), r_ft);
    for (int t = 0; t < 2; ++t) {
      SplitMix64 r_z(derive_seed(seed, 42 + t));
      p.z[t] = net::Mlp::build(net::representation_specs(shared_width, shared_width), r_z);
      SplitMix64 r_fa(derive_seed(seed, 44 + t));
      p.f_a[t] = net::Mlp::build(net::scalar_head_specs(shared_width, head_width), r_fa);
    }
    for (int a = 0; a < 2; ++a) {
      SplitMix64 r_fy(derive_seed(seed, 46 + a));
      p.f_y[a] = net::Mlp::build(net::scalar_head_specs(shared_width, head_width), r_fy);
    }
    return p;
  }

  void zero_grads() {
    omega.zero_grads();
    f_t.zero_grads();
    for (int t = 0; t < 2; ++t) {
      z[t].zero_grads();
      f_a[t].zero_grads();
    }
    for (int a = 0; a < 2; ++a) f_y[a].zero_grads();
  }

  template <class Fn>
  void for_each_tensor(Fn&& fn) {
    omega.for_each_tensor(fn);
    f_t.for_each_tensor(fn);
    for (int t = 0; t < 2; ++t) {
      z[t].for_each_tensor(fn);
      f_a[t].for_each_tensor(fn);
    }
    for (int a = 0; a < 2; ++a) f_y[a].for_each_tensor(fn);
  }

  // Composite loss: mean over samples of
  //   ol(Ŷ(t_i,a_i,x_i), y_i) + alpha*CE(Â(t_i,x_i), a_i) + beta*CE(T̂(x_i), t_i).
  // Each sample's outcome term routes through its observed (t_i, a_i).
  double forward_backward(const LobsterBatch& batch) { return run(batch, true); }
  double evaluate(const LobsterBatch& batch) const {
    return const_cast<LobsterParams*>(this)->run(batch, false);
  }

  double run(const LobsterBatch& batch, bool with_grad) {
    const std::size_t n = batch.size();
    const double inv_n = 1.0 / static_cast<double>(n);
    double total = 0.0;

    net::Mlp::Cache c_omega;
    const net::Matrix h = omega.forward(batch.x, with_grad ? &c_omega : nullptr);
    net::Matrix dh(h.rows, h.cols);

    {  // propensity head over the full batch
      net::Mlp::Cache c_ft;
      const net::Matrix zt = f_t.forward(h, with_grad ? &c_ft : nullptr);
      net::Matrix dz(zt.rows, 1);
      for (std::size_t i = 0; i < n; ++i) {
        const double target = static_cast<double>(batch.t[i]);
        total += beta * net::loss_value(net::LossKind::SigmoidCrossEntropy, zt(i, 0), target);
        dz(i, 0) = beta * net::loss_grad(net::LossKind::SigmoidCrossEntropy, zt(i, 0), target) *
                   inv_n;
      }
      if (with_grad) {
        const net::Matrix back = f_t.backward(c_ft, dz);
        for (std::size_t i = 0; i < back.a.size(); ++i) dh.a[i] += back.a[i];
      }
    }

    for (int t = 0; t < 2; ++t) {
      std::vector<std::size_t> idx_t;
      for (std::size_t i = 0; i < n; ++i)
        if (batch.t[i] == t) idx_t.push_back(i);
      if (idx_t.empty()) continue;

      net::Mlp::Cache c_z;
      const net::Matrix ht = net::gather_rows(h, idx_t);
      const net::Matrix rep = z[t].forward(ht, with_grad ? &c_z : nullptr);
      net::Matrix drep(rep.rows, rep.cols);

      {  // intake head for this assignment branch
        net::Mlp::Cache c_fa;
        const net::Matrix za = f_a[t].forward(rep, with_grad ? &c_fa : nullptr);
        net::Matrix dz(za.rows, 1);
        for (std::size_t k = 0; k < idx_t.size(); ++k) {
          const double target = static_cast<double>(batch.a[idx_t[k]]);
          total +=
              alpha * net::loss_value(net::LossKind::SigmoidCrossEntropy, za(k, 0), target);
          dz(k, 0) =
              alpha * net::loss_grad(net::LossKind::SigmoidCrossEntropy, za(k, 0), target) *
              inv_n;
        }
        if (with_grad) {
          const net::Matrix back = f_a[t].backward(c_fa, dz);
          for (std::size_t i = 0; i < back.a.size(); ++i) drep.a[i] += back.a[i];
        }
      }

      for (int a = 0; a < 2; ++a) {  // outcome heads, routed through branch t
        std::vector<std::size_t> rows;
        for (std::size_t k = 0; k < idx_t.size(); ++k)
          if (batch.a[idx_t[k]] == a) rows.push_back(k);
        if (rows.empty()) continue;
        net::Mlp::Cache c_fy;
        const net::Matrix rep_a = net::gather_rows(rep, rows);
        const net::Matrix zy = f_y[a].forward(rep_a, with_grad ? &c_fy : nullptr);
        net::Matrix dz(zy.rows, 1);
        for (std::size_t k = 0; k < rows.size(); ++k) {
          const double target = batch.y[idx_t[rows[k]]];
          total += net::loss_value(outcome_loss, zy(k, 0), target);
          dz(k, 0) = net::loss_grad(outcome_loss, zy(k, 0), target) * inv_n;
        }
        if (with_grad) {
          const net::Matrix back = f_y[a].backward(c_fy, dz);
          net::scatter_add_rows(drep, rows, back);
        }
      }

      if (with_grad) {
        const net::Matrix back = z[t].backward(c_z, drep);
        net::scatter_add_rows(dh, idx_t, back);
      }
    }

    if (with_grad) omega.backward(c_omega, dh);
    return total * inv_n;
  }
};

class LobsterNet : public CateaLearner {
 public:
  explicit LobsterNet(std::size_t shared_width = 300, std::size_t head_width = 100)
      : shared_(shared_width), head_(head_width) {}

  std::string name() const override { return "lobsternet"; }

  void fit(const Dataset& train, const Dataset& val,
           const net::TrainConfig& cfg) override {
    validate_dataset(train);
    mode_ = train.mode;
    binary_ = train.outcome_kind == OutcomeKind::Binary;
    const auto [alpha, beta] = alpha_beta_defaults(train);
    const net::LossKind outcome_loss =
        binary_ ? net::LossKind::SigmoidCrossEntropy : net::LossKind::SquaredError;
    const LobsterBatch tb = LobsterBatch::from_dataset(train);
    const LobsterBatch vb = LobsterBatch::from_dataset(val);

    double best_val = std::numeric_limits<double>::infinity();
    bool selected = false;
    for (double l2 : detail::descending_l2_grid(cfg)) {
      LobsterParams params = LobsterParams::build(train.feature_dim, shared_, head_,
                                                  outcome_loss, alpha, beta, cfg.seed);
      const net::TrainResult r = net::train(params, tb, vb, cfg, l2);
      if (!selected || r.best_val_loss < best_val) {
        selected = true;
        best_val = r.best_val_loss;
        params_ = std::make_unique<LobsterParams>(std::move(params));
        selected_l2_ = l2;
      }
    }
    fitted_ = true;
  }

  // Ŷ(a, t, x): outcome head a applied to the representation selected for
  // assignment t. Touches only omega, z[t], and f_y[a].
  double predict_outcome(int a, int t, const std::vector<double>& x) const {
    require_fitted();
    net::Matrix m(1, x.size());
    std::copy(x.begin(), x.end(), m.row(0));
    const net::Matrix rep = params_->z[t].forward(params_->omega.forward(m));
    const double raw = params_->f_y[a].forward(rep)(0, 0);
    return binary_ ? net::clamp_probability(net::detail::sigmoid(raw)) : raw;
  }

  NuisanceValues predict_nuisances(const std::vector<double>& x) const {
    require_fitted();
    const bool one_sided = mode_ == NonAdherenceMode::OneSided;
    net::Matrix m(1, x.size());
    std::copy(x.begin(), x.end(), m.row(0));
    const net::Matrix h = params_->omega.forward(m);
    NuisanceValues nv;
    nv.pi = net::clamp_probability(net::detail::sigmoid(params_->f_t.forward(h)(0, 0)));
    for (int t = 0; t < 2; ++t) {
      const net::Matrix rep = params_->z[t].forward(h);
      const double a_raw = net::detail::sigmoid(params_->f_a[t].forward(rep)(0, 0));
      // The one-sided mode pins intake under t=0 to zero by definition.
      nv.a_given_t[t] = (one_sided && t == 0) ? 0.0 : a_raw;
      for (int a = 0; a < 2; ++a) {
        const double raw = params_->f_y[a].forward(rep)(0, 0);
        nv.y_given_at[a][t] =
            binary_ ? net::clamp_probability(net::detail::sigmoid(raw)) : raw;
      }
    }
    return nv;
  }

  adjustment::CateaValue predict_catea(const std::vector<double>& x) const override {
    return adjustment::cfd_catea(predict_nuisances(x), mode_);
  }

  LobsterParams& params() {
    require_fitted();
    return *params_;
  }
  const LobsterParams& params() const {
    require_fitted();
    return *params_;
  }
  NonAdherenceMode mode() const { return mode_; }
  bool is_binary() const { return binary_; }

  void restore(LobsterParams params, NonAdherenceMode mode, bool binary, double l2) {
    params_ = std::make_unique<LobsterParams>(std::move(params));
    mode_ = mode;
    binary_ = binary;
    selected_l2_ = l2;
    fitted_ = true;
  }

 private:
  std::size_t shared_, head_;
  NonAdherenceMode mode_ = NonAdherenceMode::TwoSided;
  bool binary_ = true;
  std::unique_ptr<LobsterParams> params_;
};

}  // namespace catea::learners
