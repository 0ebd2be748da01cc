#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "voltwatch/features.hpp"
#include "voltwatch/matrix.hpp"
#include "voltwatch/tape.hpp"

namespace voltwatch::model {

using numerics::Matrix;

// ---------------------------------------------------------------------------
// LSTM autoencoder with physics-guided latent fusion.
//
// Encoder: stacked LSTM over the (augmented) window; the top layer's final
// hidden state h_T summarizes the sequence.  The normalized odometer reading
// is projected through a ReLU layer to v_phy and concatenated with h_T; a
// sigmoid attention gate then reweights the fused vector elementwise.  The
// decoder LSTM starts from learned projections of that latent and unrolls T
// steps with a constant zero input; a linear readout produces the
// reconstruction, scored by mean squared error against the normalized raw
// channels.
// ---------------------------------------------------------------------------

struct ModelConfig {
  std::size_t window = 256;           // T, steps per sample
  std::size_t channels = 4;           // D, raw channels
  std::size_t hidden = 64;            // d_h
  std::size_t layers = 1;             // encoder depth
  std::size_t selected_features = 2;  // K, channels picked for interactions
  std::size_t latent_dim = 0;         // optional linear bottleneck; 0 = off
  double feature_epsilon = 1e-6;      // guard for the f_rate denominator
  bool use_physics_features = true;   // augmented input columns
  bool use_latent_fusion = true;      // concatenate v_phy into the latent
  bool use_attention = true;          // sigmoid gate on the latent

  // Input width the encoder sees.
  std::size_t input_dim() const {
    return use_physics_features ? channels + 2 * selected_features + 1
                                : channels;
  }
  // Latent width after (optional) fusion.
  std::size_t fused_dim() const {
    return hidden * (use_latent_fusion ? 2 : 1);
  }
  // Width the decoder projections consume.
  std::size_t latent_out_dim() const {
    return latent_dim > 0 ? latent_dim : fused_dim();
  }

  // Throws std::invalid_argument on inconsistent settings (zero sizes, or
  // fusion/attention without physics features).
  void validate() const;
};

// Uniform init in [-1/sqrt(hidden), +1/sqrt(hidden)] from the seed's "init"
// substream; forget-gate biases start at 1.0.  Parameter names are stable:
// enc<L>.*, fusion.*, bottleneck.*, dec.*, out.*.
numerics::ParameterStore init_parameters(const ModelConfig& config,
                                         std::uint64_t seed);

// --- standalone forward ops -------------------------------------------------
// Value-level building blocks used by tests and diagnostics.  They run the
// exact same graph code as training (a tape of constants), so there is one
// source of truth for the math.

struct LstmWeights {
  Matrix w_fx, w_fh, b_f;  // forget gate
  Matrix w_ix, w_ih, b_i;  // input gate
  Matrix w_cx, w_ch, b_c;  // candidate
  Matrix w_ox, w_oh, b_o;  // output gate
};

// Copies the named cell out of a parameter store ("enc0", "dec", ...).
LstmWeights lstm_weights_from(const numerics::ParameterStore& params,
                              const std::string& prefix);

struct LstmState {
  Matrix h, c;  // hidden and cell state, d_h x 1
};

// One recurrence step:
//   f = sig(Wfx x + Wfh h + bf), i = sig(...), o = sig(...),
//   ct = tanh(Wcx x + Wch h + bc), c' = f.c + i.ct, h' = o.tanh(c').
LstmState lstm_step(const Matrix& x, const LstmState& prev,
                    const LstmWeights& w);

// Runs the stacked encoder over a window (rows are steps); returns the top
// layer's final hidden state.
Matrix encode(const Matrix& window, const std::vector<LstmWeights>& layers);

// v_phy = ReLU(w_proj * m + b_proj) for scalar normalized mileage m.
Matrix project_mileage(double mileage_norm, const Matrix& w_proj,
                       const Matrix& b_proj);

// z_raw = concat(h_last, v_phy); with attention, z = z_raw .* sig(W z_raw + b).
Matrix fuse_latent(const Matrix& h_last, const Matrix& v_phy,
                   const Matrix& w_att, const Matrix& b_att);
Matrix fuse_latent_no_attention(const Matrix& h_last, const Matrix& v_phy);
Matrix apply_attention(const Matrix& z_raw, const Matrix& w_att,
                       const Matrix& b_att);

struct DecoderWeights {
  Matrix w_h0, b_h0;  // latent -> initial hidden (tanh)
  Matrix w_c0, b_c0;  // latent -> initial cell (linear)
  LstmWeights cell;
  Matrix w_out, b_out;  // hidden -> channel readout
};

DecoderWeights decoder_weights_from(const numerics::ParameterStore& params);

// Unrolls the decoder for `steps` with a constant zero input; returns the
// steps x D reconstruction.
Matrix decode(const Matrix& z_final, std::size_t steps,
              const DecoderWeights& w);

// --- full pipeline ------------------------------------------------------------

// Model-ready view of one sample: encoder input plus normalized mileage.
struct ModelInput {
  Matrix values;              // T x input_dim, already normalized
  double mileage_norm = 0.0;  // used when fusion is on
  Matrix target;              // T x D normalized raw channels
};

ModelInput prepare_input(const data::WindowedSample& sample,
                         const ModelConfig& config,
                         const features::ChannelStats& stats,
                         const features::PhysicalFeatureSpec& spec);

// Emits the whole forward graph for one sample onto a tape whose parameter
// store holds the model weights.  Training differentiates `loss`; scoring
// just reads it.
struct ReconstructionGraph {
  numerics::Tape::Ref loss;                      // mean squared error, scalar
  std::vector<numerics::Tape::Ref> x_hat_rows;   // T refs, each D x 1
  numerics::Tape::Ref h_last;                    // encoder summary
  numerics::Tape::Ref latent;                    // decoder input
};

ReconstructionGraph build_reconstruction_graph(numerics::Tape& tape,
                                               const ModelConfig& config,
                                               const ModelInput& input);

struct Reconstruction {
  Matrix x_hat;       // T x D, normalized space
  double score = 0.0; // mean squared reconstruction error
};

Reconstruction reconstruct(const data::WindowedSample& sample,
                           const numerics::ParameterStore& params,
                           const ModelConfig& config,
                           const features::ChannelStats& stats,
                           const features::PhysicalFeatureSpec& spec);

}  // namespace voltwatch::model
