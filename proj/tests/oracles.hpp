#pragma once

// Independent reference implementations for the test suites.  Everything here
// is deliberately brute force — plain loops, libm transcendentals, textbook
// formulas — and shares no code with the library's kernels or graph, so an
// agreement between the two is meaningful evidence.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <vector>

#include "voltwatch/matrix.hpp"
#include "voltwatch/model.hpp"
#include "voltwatch/rng.hpp"
#include "voltwatch/tape.hpp"

namespace oracle {

using voltwatch::numerics::Matrix;
using voltwatch::numerics::ParameterStore;

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

inline Matrix matvec(const Matrix& w, const Matrix& x) {
  Matrix y(w.rows(), 1);
  for (std::size_t r = 0; r < w.rows(); ++r) {
    double s = 0.0;
    for (std::size_t c = 0; c < w.cols(); ++c) s += w(r, c) * x[c];
    y[r] = s;
  }
  return y;
}

inline Matrix affine(const Matrix& w, const Matrix& x, const Matrix& b) {
  Matrix y = oracle::matvec(w, x);
  for (std::size_t r = 0; r < y.rows(); ++r) y[r] += b[r];
  return y;
}

// --- LSTM -------------------------------------------------------------------

struct LstmStateO {
  std::vector<double> h, c;
};

// One recurrence step written out gate by gate.
inline LstmStateO lstm_step(const Matrix& x, const LstmStateO& prev,
                            const voltwatch::model::LstmWeights& w) {
  const std::size_t dh = w.b_f.rows();
  LstmStateO next{std::vector<double>(dh), std::vector<double>(dh)};
  for (std::size_t r = 0; r < dh; ++r) {
    double zf = w.b_f[r], zi = w.b_i[r], zc = w.b_c[r], zo = w.b_o[r];
    for (std::size_t c = 0; c < x.rows(); ++c) {
      zf += w.w_fx(r, c) * x[c];
      zi += w.w_ix(r, c) * x[c];
      zc += w.w_cx(r, c) * x[c];
      zo += w.w_ox(r, c) * x[c];
    }
    for (std::size_t c = 0; c < dh; ++c) {
      zf += w.w_fh(r, c) * prev.h[c];
      zi += w.w_ih(r, c) * prev.h[c];
      zc += w.w_ch(r, c) * prev.h[c];
      zo += w.w_oh(r, c) * prev.h[c];
    }
    const double f = sigmoid(zf);
    const double i = sigmoid(zi);
    const double ct = std::tanh(zc);
    const double o = sigmoid(zo);
    next.c[r] = f * prev.c[r] + i * ct;
    next.h[r] = o * std::tanh(next.c[r]);
  }
  return next;
}

// Stacked encoder over a T x D window; returns the top layer's final h.
inline std::vector<double> encode(
    const Matrix& window,
    const std::vector<voltwatch::model::LstmWeights>& layers) {
  std::vector<std::vector<Matrix>> outputs;  // per layer, per step
  std::vector<Matrix> current;
  for (std::size_t t = 0; t < window.rows(); ++t)
    current.push_back(window.row_as_column(t));
  std::vector<double> top_h;
  for (const auto& w : layers) {
    const std::size_t dh = w.b_f.rows();
    LstmStateO s{std::vector<double>(dh, 0.0), std::vector<double>(dh, 0.0)};
    std::vector<Matrix> next;
    for (const auto& x : current) {
      s = lstm_step(x, s, w);
      next.push_back(Matrix::column(s.h));
    }
    current = std::move(next);
    top_h = s.h;
  }
  return top_h;
}

// Decoder: initial states projected from the latent, unrolled with a zero
// input of width `channels`, linear readout.  Returns steps x channels.
inline Matrix decode(const Matrix& z, std::size_t steps, std::size_t channels,
                     const ParameterStore& params) {
  const Matrix h0_pre =
      oracle::affine(params.get("dec.w_h0"), z, params.get("dec.b_h0"));
  LstmStateO s;
  s.h.resize(h0_pre.rows());
  for (std::size_t r = 0; r < h0_pre.rows(); ++r) s.h[r] = std::tanh(h0_pre[r]);
  const Matrix c0 =
      oracle::affine(params.get("dec.w_c0"), z, params.get("dec.b_c0"));
  s.c.assign(c0.values().begin(), c0.values().end());

  const auto cell = voltwatch::model::lstm_weights_from(params, "dec");
  const Matrix zero_in(channels, 1);
  const Matrix& w_out = params.get("out.w");
  const Matrix& b_out = params.get("out.b");
  Matrix x_hat(steps, w_out.rows());
  for (std::size_t t = 0; t < steps; ++t) {
    s = lstm_step(zero_in, s, cell);
    const Matrix y = oracle::affine(w_out, Matrix::column(s.h), b_out);
    for (std::size_t c = 0; c < y.rows(); ++c) x_hat(t, c) = y[c];
  }
  return x_hat;
}

// Plain LSTM autoencoder forward pass: encoder stack, latent = top h_T (no
// fusion, no attention, no bottleneck), decoder, linear readout.  The input
// window must hold the raw channels only.  Returns the T x D reconstruction.
inline Matrix plain_autoencoder(const Matrix& window,
                                const ParameterStore& params,
                                std::size_t layers) {
  std::vector<voltwatch::model::LstmWeights> enc;
  for (std::size_t l = 0; l < layers; ++l)
    enc.push_back(voltwatch::model::lstm_weights_from(
        params, "enc" + std::to_string(l)));
  const std::vector<double> z = oracle::encode(window, enc);
  return oracle::decode(Matrix::column(z), window.rows(), window.cols(),
                        params);
}

// Full fused forward pass over an already-augmented input window.
inline Matrix fused_forward(const Matrix& input, double mileage_norm,
                            const ParameterStore& params,
                            const voltwatch::model::ModelConfig& config) {
  std::vector<voltwatch::model::LstmWeights> enc;
  for (std::size_t l = 0; l < config.layers; ++l)
    enc.push_back(voltwatch::model::lstm_weights_from(
        params, "enc" + std::to_string(l)));
  Matrix z = Matrix::column(oracle::encode(input, enc));

  if (config.use_latent_fusion) {
    const Matrix m(1, 1, {mileage_norm});
    Matrix v = oracle::affine(params.get("fusion.w_proj"), m,
                              params.get("fusion.b_proj"));
    for (std::size_t r = 0; r < v.rows(); ++r) v[r] = v[r] > 0.0 ? v[r] : 0.0;
    Matrix cat(z.rows() + v.rows(), 1);
    for (std::size_t r = 0; r < z.rows(); ++r) cat[r] = z[r];
    for (std::size_t r = 0; r < v.rows(); ++r) cat[z.rows() + r] = v[r];
    z = std::move(cat);
  }
  if (config.use_attention) {
    const Matrix gate_pre = oracle::affine(params.get("fusion.w_att"), z,
                                           params.get("fusion.b_att"));
    for (std::size_t r = 0; r < z.rows(); ++r) z[r] *= sigmoid(gate_pre[r]);
  }
  if (config.latent_dim > 0)
    z = oracle::affine(params.get("bottleneck.w"), z,
                       params.get("bottleneck.b"));
  return oracle::decode(z, config.window, config.channels, params);
}

// --- statistics ---------------------------------------------------------------

inline double pearson(const std::vector<double>& x,
                      const std::vector<double>& y) {
  const std::size_t n = x.size();
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  return sxy / std::sqrt(sxx * syy);
}

// AUC as the rank statistic: P(score_pos > score_neg) + 0.5 P(equal),
// averaged by brute force over every positive/negative pair.
inline double auc(const std::vector<double>& scores,
                  const std::vector<int>& labels) {
  double wins = 0.0;
  std::size_t pairs = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (labels[i] != 1) continue;
    for (std::size_t j = 0; j < scores.size(); ++j) {
      if (labels[j] != 0) continue;
      ++pairs;
      if (scores[i] > scores[j])
        wins += 1.0;
      else if (scores[i] == scores[j])
        wins += 0.5;
    }
  }
  return wins / static_cast<double>(pairs);
}

// Empirical-quantile threshold: the smallest observed value whose CDF
// (computed by brute-force counting) reaches q.
inline double threshold(std::vector<double> scores, double q) {
  std::sort(scores.begin(), scores.end());
  const double n = static_cast<double>(scores.size());
  for (const double s : scores) {
    std::size_t le = 0;
    for (const double x : scores) le += x <= s ? 1 : 0;
    if (static_cast<double>(le) / n >= q) return s;
  }
  return scores.back();
}

// --- Adam ----------------------------------------------------------------------

struct AdamTrace {
  std::vector<double> theta, m, v;
  std::uint64_t t = 0;
};

// Textbook bias-corrected update, one element at a time.
inline void adam_step(AdamTrace& s, const std::vector<double>& g, double lr,
                      double b1, double b2, double eps) {
  s.t += 1;
  const double bc1 = 1.0 - std::pow(b1, static_cast<double>(s.t));
  const double bc2 = 1.0 - std::pow(b2, static_cast<double>(s.t));
  for (std::size_t i = 0; i < s.theta.size(); ++i) {
    s.m[i] = b1 * s.m[i] + (1.0 - b1) * g[i];
    s.v[i] = b2 * s.v[i] + (1.0 - b2) * g[i] * g[i];
    const double mhat = s.m[i] / bc1;
    const double vhat = s.v[i] / bc2;
    s.theta[i] -= lr * mhat / (std::sqrt(vhat) + eps);
  }
}

// --- finite differences ----------------------------------------------------------

// Central-difference gradient of a scalar function of the parameter store,
// probing one component at a time.
inline voltwatch::numerics::GradientStore fd_gradient(
    ParameterStore params,
    const std::function<double(const ParameterStore&)>& f, double step) {
  auto grads = voltwatch::numerics::GradientStore::zeros_like(params);
  for (const auto& [name, value] : params) {
    Matrix& g = grads.at(name);
    for (std::size_t i = 0; i < value.size(); ++i) {
      Matrix& theta = params.value(name);
      const double saved = theta[i];
      theta[i] = saved + step;
      const double up = f(params);
      theta[i] = saved - step;
      const double down = f(params);
      theta[i] = saved;
      g[i] = (up - down) / (2.0 * step);
    }
  }
  return grads;
}

// Max relative disagreement between two gradient stores (guarded denominator).
inline double max_rel_gap(const voltwatch::numerics::GradientStore& a,
                          const voltwatch::numerics::GradientStore& b,
                          double guard = 1e-8) {
  double worst = 0.0;
  for (const auto& [name, ga] : a) {
    const Matrix& gb = b.at(name);
    for (std::size_t i = 0; i < ga.size(); ++i) {
      const double denom =
          std::max({std::abs(ga[i]), std::abs(gb[i]), guard});
      worst = std::max(worst, std::abs(ga[i] - gb[i]) / denom);
    }
  }
  return worst;
}

// --- misc helpers -----------------------------------------------------------------

inline Matrix random_matrix(voltwatch::rng::Rng& r, std::size_t rows,
                            std::size_t cols, double lo = -1.0,
                            double hi = 1.0) {
  Matrix m(rows, cols);
  for (std::size_t i = 0; i < m.size(); ++i) m[i] = r.uniform(lo, hi);
  return m;
}

inline double max_abs_gap(const Matrix& a, const Matrix& b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    worst = std::max(worst, std::abs(a[i] - b[i]));
  return worst;
}

}  // namespace oracle
