#pragma once

#include <cstdint>
#include <vector>

#include "voltwatch/data.hpp"
#include "voltwatch/features.hpp"
#include "voltwatch/matrix.hpp"
#include "voltwatch/model.hpp"

namespace voltwatch::training {

// ---------------------------------------------------------------------------
// Unsupervised training: minimize mean reconstruction error over fault-free
// windows with mini-batch Adam, then set the alarm threshold at a quantile of
// the training score distribution.
// ---------------------------------------------------------------------------

struct TrainConfig {
  std::size_t epochs = 100;
  std::size_t batch_size = 32;
  double learning_rate = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_eps = 1e-8;
  double clip_norm = 5.0;   // global gradient norm ceiling
  double quantile = 0.95;   // threshold quantile q
  std::uint64_t seed = 42;

  void validate() const;  // throws std::invalid_argument
};

// Mean squared error between two equal-shape matrices (sum / element count).
double mse_loss(const numerics::Matrix& target, const numerics::Matrix& pred);

// Scales all gradients so the global L2 norm is at most max_norm.
// Returns the pre-clip norm.
double clip_to_global_norm(numerics::GradientStore& grads, double max_norm);

struct AdamState {
  numerics::GradientStore m;  // first moment
  numerics::GradientStore v;  // second moment
  std::uint64_t step = 0;

  static AdamState zeros_like(const numerics::ParameterStore& params);
};

// One bias-corrected Adam update over every parameter (lexicographic order).
void adam_update(numerics::ParameterStore& params,
                 const numerics::GradientStore& grads, AdamState& state,
                 const TrainConfig& config);

// Smallest observed score whose empirical CDF reaches q: with scores sorted
// ascending, the entry at the smallest 1-based j with j/N >= q.
// q must lie in (0, 1]; scores must be non-empty and finite.
double compute_threshold(std::vector<double> scores, double quantile);

struct ThresholdInfo {
  double lambda = 0.0;
  double quantile = 0.95;
  std::vector<double> training_scores;  // sorted ascending
};

struct TrainedModel {
  model::ModelConfig config;
  numerics::ParameterStore params;
  features::ChannelStats stats;
  features::PhysicalFeatureSpec feature_spec;
  ThresholdInfo threshold;
  std::vector<double> loss_history;  // per-epoch mean training loss

  double score(const data::WindowedSample& sample) const;
  bool flag(const data::WindowedSample& sample) const {
    return score(sample) > threshold.lambda;
  }
};

// Full training run.  The training set must be non-empty, all windows
// labeled normal, and shapes consistent with the config.  Deterministic for
// a fixed (data, config, seed); divergence raises NumericError naming the
// epoch and batch.
TrainedModel fit(const std::vector<data::WindowedSample>& train,
                 const model::ModelConfig& model_config,
                 const TrainConfig& train_config);

}  // namespace voltwatch::training
