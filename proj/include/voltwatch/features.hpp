#pragma once

#include <cstddef>
#include <vector>

#include "voltwatch/data.hpp"
#include "voltwatch/matrix.hpp"

namespace voltwatch::features {

// ---------------------------------------------------------------------------
// Physical feature construction.
//
// Degradation-relevant channels are found by correlating each channel's
// per-window mean with the window's odometer reading across the training
// fleet.  The top-K channels by |rho| are combined with normalized mileage
// m_n into interaction features:
//     f_weighted = x * m_n          (aging-scaled signal)
//     f_rate     = x / (m_n + eps)  (signal per unit wear)
//     f_acc      = m_n^2            (quadratic wear term, one shared column)
// yielding an augmented window of D + 2K + 1 columns, all z-scored with
// training-population statistics.
// ---------------------------------------------------------------------------

// Channels whose standard deviation falls below this are treated as constant:
// z-scored with divisor 1 and excluded from correlation ranking.
inline constexpr double kConstantStd = 1e-12;

// Z-score statistics for the raw channels plus the mileage scale.
struct ChannelStats {
  std::vector<double> mean;   // per raw channel
  std::vector<double> scale;  // per raw channel; population std, guarded to 1
  double mileage_max = 0.0;   // training maximum; m_n = m / mileage_max
};

// Population statistics over every record of every training window.
// Throws std::invalid_argument on an empty or shape-inconsistent set.
ChannelStats fit_normalizer(const std::vector<data::WindowedSample>& train);

double normalized_mileage(double mileage, const ChannelStats& stats);

// Pearson correlation coefficient of two equal-length series.
// Throws DimensionError for length < 2 or mismatched sizes, NumericError if
// either series is constant (the coefficient is undefined).
double pearson(const std::vector<double>& x, const std::vector<double>& y);

struct CorrelationReport {
  // rho per raw channel; quiet NaN where undefined (constant series).
  std::vector<double> rho;
  // channel indices with defined rho, sorted by |rho| descending,
  // ties broken by ascending channel index.
  std::vector<std::size_t> ranked;
};

// Correlates each channel's per-window mean with window mileage.
// Needs at least two windows.
CorrelationReport correlate_with_mileage(
    const std::vector<data::WindowedSample>& train);

struct PhysicalFeatureSpec {
  std::vector<std::size_t> selected;  // channel indices in rank order, size K
  double epsilon = 1e-6;              // guard for f_rate's denominator
  // Z-score statistics for the 2K+1 interaction columns, in the order they
  // appear in the augmented window.
  std::vector<double> extra_mean;
  std::vector<double> extra_scale;
};

// Selects the top-k channels and fits interaction-column statistics on the
// training windows.  Throws std::invalid_argument if k exceeds the number of
// channels with a defined correlation.
PhysicalFeatureSpec fit_features(const std::vector<data::WindowedSample>& train,
                                 const ChannelStats& stats,
                                 const CorrelationReport& report, std::size_t k,
                                 double epsilon = 1e-6);

// Normalized raw window: (x - mean) / scale, T x D.  This is both the
// plain-model input and the reconstruction target.
numerics::Matrix normalize_window(const data::WindowedSample& sample,
                                  const ChannelStats& stats);

// Inverts normalize_window for one channel.
double denormalize(double z, std::size_t channel, const ChannelStats& stats);

// Full augmented, normalized window: T x (D + 2K + 1) with column layout
// [raw... | f_weighted(c1), f_rate(c1), ... | f_acc].
numerics::Matrix augment_window(const data::WindowedSample& sample,
                                const ChannelStats& stats,
                                const PhysicalFeatureSpec& spec);

}  // namespace voltwatch::features
