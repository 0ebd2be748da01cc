#include "voltwatch/features.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace voltwatch::features {

using numerics::DimensionError;
using numerics::Matrix;
using numerics::NumericError;

namespace {

// Population mean/std over a flat accumulation: two-pass for accuracy.
struct MeanStd {
  double mean = 0.0;
  double std = 0.0;
};

MeanStd mean_std(const std::vector<double>& values) {
  const std::size_t n = values.size();
  double sum = 0.0;
  for (double v : values) sum += v;
  const double mean = sum / static_cast<double>(n);
  double ss = 0.0;
  for (double v : values) {
    const double d = v - mean;
    ss += d * d;
  }
  return {mean, std::sqrt(ss / static_cast<double>(n))};
}

std::size_t channel_count_of(const std::vector<data::WindowedSample>& set) {
  if (set.empty())
    throw std::invalid_argument("need at least one window to fit statistics");
  const std::size_t d = set.front().values.cols();
  if (d == 0) throw std::invalid_argument("windows have zero channels");
  for (const auto& s : set) {
    if (s.values.cols() != d)
      throw DimensionError("inconsistent channel counts across windows: " +
                           std::to_string(d) + " vs " +
                           std::to_string(s.values.cols()));
    if (s.values.rows() == 0)
      throw std::invalid_argument("empty window in training set");
  }
  return d;
}

}  // namespace

ChannelStats fit_normalizer(const std::vector<data::WindowedSample>& train) {
  const std::size_t d = channel_count_of(train);
  ChannelStats stats;
  stats.mean.resize(d);
  stats.scale.resize(d);

  std::vector<double> column;
  for (std::size_t c = 0; c < d; ++c) {
    column.clear();
    for (const auto& s : train)
      for (std::size_t t = 0; t < s.values.rows(); ++t)
        column.push_back(s.values(t, c));
    const MeanStd ms = mean_std(column);
    stats.mean[c] = ms.mean;
    stats.scale[c] = ms.std < kConstantStd ? 1.0 : ms.std;
  }

  double mmax = 0.0;
  for (const auto& s : train) mmax = std::max(mmax, s.mileage);
  stats.mileage_max = mmax;
  return stats;
}

double normalized_mileage(double mileage, const ChannelStats& stats) {
  if (stats.mileage_max <= 0.0) return 0.0;
  return mileage / stats.mileage_max;
}

double pearson(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size())
    throw DimensionError("correlation needs equal lengths, got " +
                         std::to_string(x.size()) + " and " +
                         std::to_string(y.size()));
  const std::size_t n = x.size();
  if (n < 2)
    throw DimensionError("correlation needs at least 2 points, got " +
                         std::to_string(n));

  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);

  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0)
    throw NumericError("correlation undefined: a series is constant");
  const double rho = sxy / (std::sqrt(sxx) * std::sqrt(syy));
  return std::clamp(rho, -1.0, 1.0);
}

CorrelationReport correlate_with_mileage(
    const std::vector<data::WindowedSample>& train) {
  const std::size_t d = channel_count_of(train);
  if (train.size() < 2)
    throw std::invalid_argument(
        "correlation ranking needs at least two windows, got " +
        std::to_string(train.size()));

  std::vector<double> mileage(train.size());
  for (std::size_t i = 0; i < train.size(); ++i) mileage[i] = train[i].mileage;

  CorrelationReport report;
  report.rho.assign(d, std::numeric_limits<double>::quiet_NaN());

  std::vector<double> means(train.size());
  for (std::size_t c = 0; c < d; ++c) {
    for (std::size_t i = 0; i < train.size(); ++i) {
      const auto& m = train[i].values;
      double sum = 0.0;
      for (std::size_t t = 0; t < m.rows(); ++t) sum += m(t, c);
      means[i] = sum / static_cast<double>(m.rows());
    }
    try {
      report.rho[c] = pearson(means, mileage);
    } catch (const NumericError&) {
      // constant series: leave NaN, excluded from ranking
    }
  }

  for (std::size_t c = 0; c < d; ++c)
    if (!std::isnan(report.rho[c])) report.ranked.push_back(c);
  std::stable_sort(report.ranked.begin(), report.ranked.end(),
                   [&](std::size_t a, std::size_t b) {
                     const double fa = std::fabs(report.rho[a]);
                     const double fb = std::fabs(report.rho[b]);
                     if (fa != fb) return fa > fb;
                     return a < b;
                   });
  return report;
}

namespace {

// Interaction columns for one window, in augmented-layout order.
// Returns a T x (2K+1) matrix of *raw* (un-normalized) interaction values.
Matrix interaction_columns(const data::WindowedSample& sample,
                           const ChannelStats& stats,
                           const std::vector<std::size_t>& selected,
                           double epsilon) {
  const std::size_t t_len = sample.values.rows();
  const std::size_t k = selected.size();
  Matrix extra(t_len, 2 * k + 1);
  const double mn = normalized_mileage(sample.mileage, stats);
  const double macc = mn * mn;
  for (std::size_t t = 0; t < t_len; ++t) {
    for (std::size_t j = 0; j < k; ++j) {
      const double x = sample.values(t, selected[j]);
      extra(t, 2 * j) = x * mn;
      extra(t, 2 * j + 1) = x / (mn + epsilon);
    }
    extra(t, 2 * k) = macc;
  }
  return extra;
}

}  // namespace

PhysicalFeatureSpec fit_features(const std::vector<data::WindowedSample>& train,
                                 const ChannelStats& stats,
                                 const CorrelationReport& report, std::size_t k,
                                 double epsilon) {
  if (k > report.ranked.size())
    throw std::invalid_argument(
        "cannot select " + std::to_string(k) + " channels: only " +
        std::to_string(report.ranked.size()) +
        " have a defined mileage correlation");
  if (epsilon <= 0.0)
    throw std::invalid_argument("epsilon must be positive");

  PhysicalFeatureSpec spec;
  spec.selected.assign(report.ranked.begin(), report.ranked.begin() + k);
  spec.epsilon = epsilon;

  const std::size_t n_extra = 2 * k + 1;
  std::vector<std::vector<double>> columns(n_extra);
  for (const auto& s : train) {
    const Matrix extra = interaction_columns(s, stats, spec.selected, epsilon);
    for (std::size_t j = 0; j < n_extra; ++j)
      for (std::size_t t = 0; t < extra.rows(); ++t)
        columns[j].push_back(extra(t, j));
  }
  spec.extra_mean.resize(n_extra);
  spec.extra_scale.resize(n_extra);
  for (std::size_t j = 0; j < n_extra; ++j) {
    const MeanStd ms = mean_std(columns[j]);
    spec.extra_mean[j] = ms.mean;
    spec.extra_scale[j] = ms.std < kConstantStd ? 1.0 : ms.std;
  }
  return spec;
}

Matrix normalize_window(const data::WindowedSample& sample,
                        const ChannelStats& stats) {
  const std::size_t d = stats.mean.size();
  if (sample.values.cols() != d)
    throw DimensionError("window has " + std::to_string(sample.values.cols()) +
                         " channels but statistics cover " + std::to_string(d));
  Matrix out(sample.values.rows(), d);
  for (std::size_t t = 0; t < out.rows(); ++t)
    for (std::size_t c = 0; c < d; ++c)
      out(t, c) = (sample.values(t, c) - stats.mean[c]) / stats.scale[c];
  return out;
}

double denormalize(double z, std::size_t channel, const ChannelStats& stats) {
  if (channel >= stats.mean.size())
    throw DimensionError("channel " + std::to_string(channel) +
                         " out of range for statistics over " +
                         std::to_string(stats.mean.size()));
  return z * stats.scale[channel] + stats.mean[channel];
}

Matrix augment_window(const data::WindowedSample& sample,
                      const ChannelStats& stats,
                      const PhysicalFeatureSpec& spec) {
  const std::size_t d = stats.mean.size();
  const std::size_t k = spec.selected.size();
  const std::size_t n_extra = 2 * k + 1;
  if (spec.extra_mean.size() != n_extra || spec.extra_scale.size() != n_extra)
    throw DimensionError("feature spec statistics cover " +
                         std::to_string(spec.extra_mean.size()) +
                         " columns, expected " + std::to_string(n_extra));
  for (std::size_t c : spec.selected)
    if (c >= d)
      throw DimensionError("selected channel " + std::to_string(c) +
                           " out of range for " + std::to_string(d) +
                           " channels");

  const Matrix raw = normalize_window(sample, stats);
  const Matrix extra = interaction_columns(sample, stats, spec.selected,
                                           spec.epsilon);
  Matrix out(sample.values.rows(), d + n_extra);
  for (std::size_t t = 0; t < out.rows(); ++t) {
    for (std::size_t c = 0; c < d; ++c) out(t, c) = raw(t, c);
    for (std::size_t j = 0; j < n_extra; ++j)
      out(t, d + j) =
          (extra(t, j) - spec.extra_mean[j]) / spec.extra_scale[j];
  }
  return out;
}

}  // namespace voltwatch::features
