#include "voltwatch/training.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "voltwatch/kernels.hpp"
#include "voltwatch/rng.hpp"
#include "voltwatch/tape.hpp"

namespace voltwatch::training {

using numerics::GradientStore;
using numerics::Matrix;
using numerics::NumericError;
using numerics::ParameterStore;

void TrainConfig::validate() const {
  if (batch_size == 0) throw std::invalid_argument("batch size must be positive");
  if (learning_rate <= 0.0)
    throw std::invalid_argument("learning rate must be positive");
  if (beta1 < 0.0 || beta1 >= 1.0 || beta2 < 0.0 || beta2 >= 1.0)
    throw std::invalid_argument("Adam betas must lie in [0, 1)");
  if (adam_eps <= 0.0) throw std::invalid_argument("Adam eps must be positive");
  if (clip_norm <= 0.0)
    throw std::invalid_argument("gradient clip norm must be positive");
  if (!(quantile > 0.0) || quantile > 1.0)
    throw std::invalid_argument("quantile must lie in (0, 1]");
}

double mse_loss(const Matrix& target, const Matrix& pred) {
  if (!target.same_shape(pred))
    throw numerics::DimensionError("mse shapes differ: " +
                                   target.shape_string() + " vs " +
                                   pred.shape_string());
  if (target.size() == 0)
    throw numerics::DimensionError("mse over an empty matrix");
  const double sum = kernels::active().sq_err_sum(
      target.data(), pred.data(), target.size());
  return sum / static_cast<double>(target.size());
}

double clip_to_global_norm(GradientStore& grads, double max_norm) {
  if (max_norm <= 0.0)
    throw std::invalid_argument("clip norm must be positive");
  const double norm = grads.global_norm();
  if (norm > max_norm) grads.scale_all(max_norm / norm);
  return norm;
}

AdamState AdamState::zeros_like(const ParameterStore& params) {
  AdamState state;
  state.m = GradientStore::zeros_like(params);
  state.v = GradientStore::zeros_like(params);
  state.step = 0;
  return state;
}

void adam_update(ParameterStore& params, const GradientStore& grads,
                 AdamState& state, const TrainConfig& config) {
  state.step += 1;
  const auto t = static_cast<double>(state.step);
  const double inv_bc1 = 1.0 / (1.0 - std::pow(config.beta1, t));
  const double inv_bc2 = 1.0 / (1.0 - std::pow(config.beta2, t));
  const auto& k = kernels::active();
  for (auto& [name, theta] : params) {
    const Matrix& g = grads.at(name);
    Matrix& m = state.m.at(name);
    Matrix& v = state.v.at(name);
    if (!g.same_shape(theta))
      throw numerics::DimensionError("gradient for '" + name +
                                     "' has shape " + g.shape_string() +
                                     ", parameter is " + theta.shape_string());
    k.adam_step(theta.data(), m.data(), v.data(), g.data(), theta.size(),
                config.learning_rate, config.beta1, config.beta2,
                config.adam_eps, inv_bc1, inv_bc2);
  }
}

double compute_threshold(std::vector<double> scores, double quantile) {
  if (scores.empty())
    throw std::invalid_argument("threshold needs at least one score");
  if (!(quantile > 0.0) || quantile > 1.0)
    throw std::invalid_argument("quantile must lie in (0, 1]");
  for (double s : scores)
    if (!std::isfinite(s))
      throw NumericError("non-finite score in threshold computation");
  std::sort(scores.begin(), scores.end());
  const auto n = static_cast<double>(scores.size());
  // Smallest score whose empirical CDF reaches the quantile.
  for (std::size_t j = 1; j <= scores.size(); ++j) {
    if (static_cast<double>(j) / n >= quantile) return scores[j - 1];
  }
  return scores.back();  // unreachable: j = N gives CDF 1 >= quantile
}

double TrainedModel::score(const data::WindowedSample& sample) const {
  return model::reconstruct(sample, params, config, stats, feature_spec).score;
}

TrainedModel fit(const std::vector<data::WindowedSample>& train,
                 const model::ModelConfig& model_config,
                 const training::TrainConfig& train_config) {
  model_config.validate();
  train_config.validate();
  if (train.empty())
    throw std::invalid_argument("training set is empty");
  for (const auto& s : train)
    if (s.label != 0)
      throw std::invalid_argument(
          "training set must contain only normal windows (vehicle " +
          s.vehicle_id + " has a faulted window)");

  TrainedModel out;
  out.config = model_config;
  out.stats = features::fit_normalizer(train);
  if (model_config.use_physics_features) {
    const features::CorrelationReport report =
        features::correlate_with_mileage(train);
    out.feature_spec =
        features::fit_features(train, out.stats, report,
                               model_config.selected_features,
                               model_config.feature_epsilon);
  } else {
    out.feature_spec = features::PhysicalFeatureSpec{};
    out.feature_spec.extra_mean.assign(1, 0.0);
    out.feature_spec.extra_scale.assign(1, 1.0);
  }
  out.params = model::init_parameters(model_config, train_config.seed);

  // Inputs are pure functions of (sample, stats, spec): build them once.
  std::vector<model::ModelInput> inputs;
  inputs.reserve(train.size());
  for (const auto& s : train)
    inputs.push_back(model::prepare_input(s, model_config, out.stats,
                                          out.feature_spec));

  AdamState adam = AdamState::zeros_like(out.params);
  GradientStore batch_grads = GradientStore::zeros_like(out.params);

  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), 0);

  for (std::size_t epoch = 1; epoch <= train_config.epochs; ++epoch) {
    rng::Rng shuffle_gen(
        rng::substream(train_config.seed, "shuffle", epoch));
    shuffle_gen.shuffle(order.begin(), order.end());

    double epoch_loss_sum = 0.0;
    std::size_t batch_index = 0;
    for (std::size_t begin = 0; begin < order.size();
         begin += train_config.batch_size, ++batch_index) {
      const std::size_t end =
          std::min(begin + train_config.batch_size, order.size());
      batch_grads.reset();
      double batch_loss_sum = 0.0;
      try {
        for (std::size_t i = begin; i < end; ++i) {
          const model::ModelInput& input = inputs[order[i]];
          numerics::Tape tape(&out.params);
          const model::ReconstructionGraph graph =
              model::build_reconstruction_graph(tape, model_config, input);
          batch_loss_sum += tape.scalar(graph.loss);
          tape.accumulate_gradients(graph.loss, batch_grads);
        }
      } catch (const NumericError& e) {
        throw NumericError("training diverged at epoch " +
                           std::to_string(epoch) + ", batch " +
                           std::to_string(batch_index) + ": " + e.what());
      }
      const auto batch_n = static_cast<double>(end - begin);
      batch_grads.scale_all(1.0 / batch_n);
      clip_to_global_norm(batch_grads, train_config.clip_norm);
      adam_update(out.params, batch_grads, adam, train_config);
      epoch_loss_sum += batch_loss_sum;
    }
    out.loss_history.push_back(epoch_loss_sum /
                               static_cast<double>(train.size()));
  }

  // Threshold from the trained model's scores on its own training windows.
  std::vector<double> scores;
  scores.reserve(train.size());
  for (const auto& s : train) scores.push_back(out.score(s));
  out.threshold.quantile = train_config.quantile;
  out.threshold.lambda = compute_threshold(scores, train_config.quantile);
  std::sort(scores.begin(), scores.end());
  out.threshold.training_scores = std::move(scores);
  return out;
}

}  // namespace voltwatch::training
