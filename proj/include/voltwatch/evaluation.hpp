#pragma once

#include <cstddef>
#include <vector>

#include "voltwatch/data.hpp"
#include "voltwatch/model.hpp"
#include "voltwatch/training.hpp"

namespace voltwatch::evaluation {

// ---------------------------------------------------------------------------
// Detection metrics and the cross-validated evaluation protocol.
// Fault windows are the positive class (label 1).
// ---------------------------------------------------------------------------

struct Confusion {
  std::size_t tp = 0;  // fault predicted fault
  std::size_t fp = 0;  // normal predicted fault
  std::size_t tn = 0;  // normal predicted normal
  std::size_t fn = 0;  // fault predicted normal
};

Confusion confusion(const std::vector<int>& labels,
                    const std::vector<int>& predictions);

double accuracy(const Confusion& c);

struct ClassMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

// Metrics for either class; a zero denominator yields 0 for that metric.
ClassMetrics class_metrics(const Confusion& c, int positive_class);

struct RocPoint {
  double fpr = 0.0;
  double tpr = 0.0;
};

// Threshold sweep over the distinct scores, descending (predict positive when
// score >= s), anchored at (0,0) and (1,1).  Both classes must be present.
std::vector<RocPoint> roc_curve(const std::vector<double>& scores,
                                const std::vector<int>& labels);

// Trapezoidal area under roc_curve; ties handled so the result equals the
// rank statistic P(score_pos > score_neg) + 0.5 P(equal).
double roc_auc(const std::vector<double>& scores,
               const std::vector<int>& labels);

// --- cross-validated protocol -------------------------------------------------

struct FoldResult {
  std::size_t fold = 0;
  double lambda = 0.0;  // threshold fitted on this fold's training windows
  Confusion counts;
  double accuracy = 0.0;
  ClassMetrics normal;  // class 0
  ClassMetrics fault;   // class 1
  double auc = 0.0;
  std::vector<double> scores;                    // test-set scores
  std::vector<int> labels;                       // matching labels
  std::vector<std::size_t> test_normal_indices;  // into the normal set
};

struct Aggregate {
  double mean = 0.0;
  double stddev = 0.0;  // population std over folds
};

struct CrossValidationReport {
  std::vector<FoldResult> folds;
  Aggregate accuracy, precision0, recall0, f10, precision1, recall1, f11, auc,
      lambda;
};

// Normal windows are partitioned into `folds` disjoint parts by a seeded
// permutation; fold i trains on the other parts and tests on part i plus the
// complete fault set.  Feature statistics, selection, and the threshold are
// fitted inside each fold's training data only.
CrossValidationReport cross_validate(
    const std::vector<data::WindowedSample>& normals,
    const std::vector<data::WindowedSample>& faults,
    const model::ModelConfig& model_config,
    const training::TrainConfig& train_config, std::size_t folds);

struct GridCell {
  std::size_t layers = 0;
  std::size_t hidden = 0;
  double mean_auc = 0.0;
};

// Cross-validates every (layers, hidden) combination; emits cells in
// row-major order (layer axis outer).
std::vector<GridCell> grid_search(
    const std::vector<data::WindowedSample>& normals,
    const std::vector<data::WindowedSample>& faults,
    const model::ModelConfig& base_config,
    const training::TrainConfig& train_config,
    const std::vector<std::size_t>& layer_axis,
    const std::vector<std::size_t>& hidden_axis, std::size_t folds);

// Scores a batch of windows with a trained model.
std::vector<double> score_samples(const training::TrainedModel& model,
                                  const std::vector<data::WindowedSample>& samples);

}  // namespace voltwatch::evaluation
