#include "voltwatch/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "voltwatch/rng.hpp"

namespace voltwatch::evaluation {

Confusion confusion(const std::vector<int>& labels,
                    const std::vector<int>& predictions) {
  if (labels.size() != predictions.size())
    throw std::invalid_argument("labels and predictions differ in length: " +
                                std::to_string(labels.size()) + " vs " +
                                std::to_string(predictions.size()));
  Confusion c;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const bool is_fault = labels[i] != 0;
    const bool said_fault = predictions[i] != 0;
    if (is_fault && said_fault)
      ++c.tp;
    else if (!is_fault && said_fault)
      ++c.fp;
    else if (!is_fault && !said_fault)
      ++c.tn;
    else
      ++c.fn;
  }
  return c;
}

double accuracy(const Confusion& c) {
  const std::size_t total = c.tp + c.fp + c.tn + c.fn;
  if (total == 0) return 0.0;
  return static_cast<double>(c.tp + c.tn) / static_cast<double>(total);
}

ClassMetrics class_metrics(const Confusion& c, int positive_class) {
  // For class 0 the roles swap: its "true positives" are the true negatives.
  std::size_t tp = c.tp, fp = c.fp, fn = c.fn;
  if (positive_class == 0) {
    tp = c.tn;
    fp = c.fn;
    fn = c.fp;
  } else if (positive_class != 1) {
    throw std::invalid_argument("positive_class must be 0 or 1");
  }
  ClassMetrics m;
  m.precision = tp + fp == 0
                    ? 0.0
                    : static_cast<double>(tp) / static_cast<double>(tp + fp);
  m.recall = tp + fn == 0
                 ? 0.0
                 : static_cast<double>(tp) / static_cast<double>(tp + fn);
  m.f1 = m.precision + m.recall == 0.0
             ? 0.0
             : 2.0 * m.precision * m.recall / (m.precision + m.recall);
  return m;
}

namespace {

void check_scored_set(const std::vector<double>& scores,
                      const std::vector<int>& labels) {
  if (scores.size() != labels.size())
    throw std::invalid_argument("scores and labels differ in length: " +
                                std::to_string(scores.size()) + " vs " +
                                std::to_string(labels.size()));
  if (scores.empty()) throw std::invalid_argument("empty scored set");
  for (double s : scores)
    if (!std::isfinite(s))
      throw numerics::NumericError("non-finite score in metric computation");
  bool has_pos = false, has_neg = false;
  for (int l : labels) (l != 0 ? has_pos : has_neg) = true;
  if (!has_pos || !has_neg)
    throw std::invalid_argument(
        "ranking metrics need both classes present in the labels");
}

}  // namespace

std::vector<RocPoint> roc_curve(const std::vector<double>& scores,
                                const std::vector<int>& labels) {
  check_scored_set(scores, labels);

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return scores[a] > scores[b];
  });

  std::size_t pos = 0, neg = 0;
  for (int l : labels) (l != 0 ? pos : neg) += 1;

  std::vector<RocPoint> curve;
  curve.push_back({0.0, 0.0});
  std::size_t tp = 0, fp = 0;
  std::size_t i = 0;
  while (i < order.size()) {
    // Sweep one distinct score at a time so ties move diagonally.
    const double s = scores[order[i]];
    while (i < order.size() && scores[order[i]] == s) {
      if (labels[order[i]] != 0)
        ++tp;
      else
        ++fp;
      ++i;
    }
    curve.push_back({static_cast<double>(fp) / static_cast<double>(neg),
                     static_cast<double>(tp) / static_cast<double>(pos)});
  }
  if (curve.back().fpr != 1.0 || curve.back().tpr != 1.0)
    curve.push_back({1.0, 1.0});
  return curve;
}

double roc_auc(const std::vector<double>& scores,
               const std::vector<int>& labels) {
  const std::vector<RocPoint> curve = roc_curve(scores, labels);
  double auc = 0.0;
  for (std::size_t i = 1; i < curve.size(); ++i) {
    const double width = curve[i].fpr - curve[i - 1].fpr;
    auc += width * 0.5 * (curve[i].tpr + curve[i - 1].tpr);
  }
  return auc;
}

std::vector<double> score_samples(const training::TrainedModel& model,
                                  const std::vector<data::WindowedSample>& samples) {
  std::vector<double> scores;
  scores.reserve(samples.size());
  for (const auto& s : samples) scores.push_back(model.score(s));
  return scores;
}

// --- cross-validation ------------------------------------------------------------

namespace {

struct AggregateBuilder {
  std::vector<double> values;
  void add(double v) { values.push_back(v); }
  Aggregate finish() const {
    Aggregate a;
    const auto n = static_cast<double>(values.size());
    for (double v : values) a.mean += v;
    a.mean /= n;
    double ss = 0.0;
    for (double v : values) {
      const double d = v - a.mean;
      ss += d * d;
    }
    a.stddev = std::sqrt(ss / n);
    return a;
  }
};

}  // namespace

CrossValidationReport cross_validate(
    const std::vector<data::WindowedSample>& normals,
    const std::vector<data::WindowedSample>& faults,
    const model::ModelConfig& model_config,
    const training::TrainConfig& train_config, std::size_t folds) {
  if (folds < 2)
    throw std::invalid_argument("cross-validation needs at least 2 folds");
  if (normals.size() < folds)
    throw std::invalid_argument(
        "cross-validation needs at least one normal window per fold: " +
        std::to_string(normals.size()) + " windows for " +
        std::to_string(folds) + " folds");
  if (faults.empty())
    throw std::invalid_argument("cross-validation needs fault windows");

  // Seeded permutation; part i takes every folds-th index.  The parts are
  // disjoint by construction and cover all normals.
  std::vector<std::size_t> perm(normals.size());
  std::iota(perm.begin(), perm.end(), 0);
  rng::Rng gen(rng::substream(train_config.seed, "cv"));
  gen.shuffle(perm.begin(), perm.end());

  CrossValidationReport report;
  AggregateBuilder acc, p0, r0, f0, p1, r1, f1, auc, lambda;

  for (std::size_t fold = 0; fold < folds; ++fold) {
    FoldResult result;
    result.fold = fold;

    std::vector<data::WindowedSample> train_set;
    for (std::size_t j = 0; j < perm.size(); ++j) {
      if (j % folds == fold)
        result.test_normal_indices.push_back(perm[j]);
      else
        train_set.push_back(normals[perm[j]]);
    }

    training::TrainConfig fold_config = train_config;
    fold_config.seed = rng::substream(train_config.seed, "fold", fold);
    const training::TrainedModel model =
        training::fit(train_set, model_config, fold_config);
    result.lambda = model.threshold.lambda;

    for (std::size_t idx : result.test_normal_indices) {
      result.scores.push_back(model.score(normals[idx]));
      result.labels.push_back(0);
    }
    for (const auto& s : faults) {
      result.scores.push_back(model.score(s));
      result.labels.push_back(1);
    }

    std::vector<int> predictions;
    predictions.reserve(result.scores.size());
    for (double s : result.scores)
      predictions.push_back(s > result.lambda ? 1 : 0);

    result.counts = confusion(result.labels, predictions);
    result.accuracy = evaluation::accuracy(result.counts);
    result.normal = class_metrics(result.counts, 0);
    result.fault = class_metrics(result.counts, 1);
    result.auc = roc_auc(result.scores, result.labels);

    acc.add(result.accuracy);
    p0.add(result.normal.precision);
    r0.add(result.normal.recall);
    f0.add(result.normal.f1);
    p1.add(result.fault.precision);
    r1.add(result.fault.recall);
    f1.add(result.fault.f1);
    auc.add(result.auc);
    lambda.add(result.lambda);
    report.folds.push_back(std::move(result));
  }

  report.accuracy = acc.finish();
  report.precision0 = p0.finish();
  report.recall0 = r0.finish();
  report.f10 = f0.finish();
  report.precision1 = p1.finish();
  report.recall1 = r1.finish();
  report.f11 = f1.finish();
  report.auc = auc.finish();
  report.lambda = lambda.finish();
  return report;
}

std::vector<GridCell> grid_search(
    const std::vector<data::WindowedSample>& normals,
    const std::vector<data::WindowedSample>& faults,
    const model::ModelConfig& base_config,
    const training::TrainConfig& train_config,
    const std::vector<std::size_t>& layer_axis,
    const std::vector<std::size_t>& hidden_axis, std::size_t folds) {
  if (layer_axis.empty() || hidden_axis.empty())
    throw std::invalid_argument("grid axes must be non-empty");
  std::vector<GridCell> cells;
  cells.reserve(layer_axis.size() * hidden_axis.size());
  for (std::size_t layers : layer_axis) {
    for (std::size_t hidden : hidden_axis) {
      model::ModelConfig config = base_config;
      config.layers = layers;
      config.hidden = hidden;
      const CrossValidationReport report =
          cross_validate(normals, faults, config, train_config, folds);
      cells.push_back({layers, hidden, report.auc.mean});
    }
  }
  return cells;
}

}  // namespace voltwatch::evaluation
