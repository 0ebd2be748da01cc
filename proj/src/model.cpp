#include "voltwatch/model.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "voltwatch/rng.hpp"

namespace voltwatch::model {

using numerics::Activation;
using numerics::DimensionError;
using numerics::ParameterStore;
using numerics::Tape;
using Ref = numerics::Tape::Ref;

// --- config ------------------------------------------------------------------

void ModelConfig::validate() const {
  if (window < 2)
    throw std::invalid_argument("window must be at least 2 steps, got " +
                                std::to_string(window));
  if (channels == 0) throw std::invalid_argument("channels must be positive");
  if (hidden == 0) throw std::invalid_argument("hidden size must be positive");
  if (layers == 0)
    throw std::invalid_argument("encoder needs at least one layer");
  if (feature_epsilon <= 0.0)
    throw std::invalid_argument("feature epsilon must be positive");
  if (!use_physics_features && (use_latent_fusion || use_attention))
    throw std::invalid_argument(
        "latent fusion and attention require physics features");
}

// --- parameter initialization ---------------------------------------------------

namespace {

Matrix uniform_matrix(rng::Rng& gen, std::size_t rows, std::size_t cols,
                      double bound) {
  Matrix m(rows, cols);
  for (std::size_t i = 0; i < m.size(); ++i) m[i] = gen.uniform(-bound, bound);
  return m;
}

}  // namespace

numerics::ParameterStore init_parameters(const ModelConfig& config,
                                         std::uint64_t seed) {
  config.validate();
  ParameterStore params;
  rng::Rng gen(rng::substream(seed, "init"));
  const std::size_t dh = config.hidden;
  const double bound = 1.0 / std::sqrt(static_cast<double>(dh));

  auto add_cell = [&](const std::string& prefix, std::size_t in_dim) {
    for (char g : {'f', 'i', 'c', 'o'}) {
      const std::string tag(1, g);
      params.create(prefix + ".w_" + tag + "x",
                    uniform_matrix(gen, dh, in_dim, bound));
      params.create(prefix + ".w_" + tag + "h",
                    uniform_matrix(gen, dh, dh, bound));
      if (g == 'f') {
        // Open forget gates at the start so early gradients flow through time.
        Matrix b(dh, 1);
        b.fill(1.0);
        params.create(prefix + ".b_f", std::move(b));
      } else {
        params.create(prefix + ".b_" + tag, uniform_matrix(gen, dh, 1, bound));
      }
    }
  };

  for (std::size_t l = 0; l < config.layers; ++l)
    add_cell("enc" + std::to_string(l),
             l == 0 ? config.input_dim() : dh);

  if (config.use_latent_fusion) {
    params.create("fusion.w_proj", uniform_matrix(gen, dh, 1, bound));
    params.create("fusion.b_proj", uniform_matrix(gen, dh, 1, bound));
  }
  if (config.use_attention) {
    const std::size_t z = config.fused_dim();
    params.create("fusion.w_att", uniform_matrix(gen, z, z, bound));
    params.create("fusion.b_att", uniform_matrix(gen, z, 1, bound));
  }
  if (config.latent_dim > 0) {
    params.create("bottleneck.w",
                  uniform_matrix(gen, config.latent_dim, config.fused_dim(),
                                 bound));
    params.create("bottleneck.b",
                  uniform_matrix(gen, config.latent_dim, 1, bound));
  }

  const std::size_t zo = config.latent_out_dim();
  params.create("dec.w_h0", uniform_matrix(gen, dh, zo, bound));
  params.create("dec.b_h0", uniform_matrix(gen, dh, 1, bound));
  params.create("dec.w_c0", uniform_matrix(gen, dh, zo, bound));
  params.create("dec.b_c0", uniform_matrix(gen, dh, 1, bound));
  add_cell("dec", config.channels);
  params.create("out.w", uniform_matrix(gen, config.channels, dh, bound));
  params.create("out.b", uniform_matrix(gen, config.channels, 1, bound));
  return params;
}

// --- graph emission --------------------------------------------------------------
// All recurrent math is emitted here, once; the training loss, reconstruction
// scoring, and the standalone ops below all run this same code.

namespace {

struct CellRefs {
  Ref w_fx, w_fh, b_f;
  Ref w_ix, w_ih, b_i;
  Ref w_cx, w_ch, b_c;
  Ref w_ox, w_oh, b_o;
};

CellRefs cell_from_params(Tape& tape, const std::string& prefix) {
  CellRefs r;
  r.w_fx = tape.param(prefix + ".w_fx");
  r.w_fh = tape.param(prefix + ".w_fh");
  r.b_f = tape.param(prefix + ".b_f");
  r.w_ix = tape.param(prefix + ".w_ix");
  r.w_ih = tape.param(prefix + ".w_ih");
  r.b_i = tape.param(prefix + ".b_i");
  r.w_cx = tape.param(prefix + ".w_cx");
  r.w_ch = tape.param(prefix + ".w_ch");
  r.b_c = tape.param(prefix + ".b_c");
  r.w_ox = tape.param(prefix + ".w_ox");
  r.w_oh = tape.param(prefix + ".w_oh");
  r.b_o = tape.param(prefix + ".b_o");
  return r;
}

CellRefs cell_from_values(Tape& tape, const LstmWeights& w) {
  CellRefs r;
  r.w_fx = tape.constant(w.w_fx);
  r.w_fh = tape.constant(w.w_fh);
  r.b_f = tape.constant(w.b_f);
  r.w_ix = tape.constant(w.w_ix);
  r.w_ih = tape.constant(w.w_ih);
  r.b_i = tape.constant(w.b_i);
  r.w_cx = tape.constant(w.w_cx);
  r.w_ch = tape.constant(w.w_ch);
  r.b_c = tape.constant(w.b_c);
  r.w_ox = tape.constant(w.w_ox);
  r.w_oh = tape.constant(w.w_oh);
  r.b_o = tape.constant(w.b_o);
  return r;
}

struct StepRefs {
  Ref h, c;
};

StepRefs emit_lstm_step(Tape& tape, const CellRefs& w, Ref x, Ref h, Ref c) {
  auto gate = [&](Ref wx, Ref wh, Ref b, Activation act) {
    const Ref from_x = tape.matvec(wx, x);
    const Ref from_h = tape.affine(wh, h, b);
    return tape.activation(tape.add(from_x, from_h), act);
  };
  const Ref f = gate(w.w_fx, w.w_fh, w.b_f, Activation::kSigmoid);
  const Ref i = gate(w.w_ix, w.w_ih, w.b_i, Activation::kSigmoid);
  const Ref ct = gate(w.w_cx, w.w_ch, w.b_c, Activation::kTanh);
  const Ref o = gate(w.w_ox, w.w_oh, w.b_o, Activation::kSigmoid);
  const Ref c_new = tape.add(tape.hadamard(f, c), tape.hadamard(i, ct));
  const Ref h_new =
      tape.hadamard(o, tape.activation(c_new, Activation::kTanh));
  return {h_new, c_new};
}

// Stacked encoder; layer l consumes layer l-1's hidden sequence.  Returns the
// top layer's final hidden state.
Ref emit_encoder(Tape& tape, const std::vector<CellRefs>& layers,
                 const std::vector<Ref>& inputs) {
  std::vector<Ref> seq = inputs;
  Ref h_last{};
  for (const CellRefs& cell : layers) {
    const std::size_t dh = tape.value(cell.w_fh).rows();
    Ref h = tape.constant(Matrix(dh, 1));
    Ref c = tape.constant(Matrix(dh, 1));
    std::vector<Ref> next;
    next.reserve(seq.size());
    for (Ref x : seq) {
      const StepRefs s = emit_lstm_step(tape, cell, x, h, c);
      h = s.h;
      c = s.c;
      next.push_back(h);
    }
    seq = std::move(next);
    h_last = h;
  }
  return h_last;
}

struct FusionRefs {
  bool has_proj = false;
  bool has_att = false;
  Ref w_proj, b_proj, w_att, b_att;
  Ref mileage;  // 1x1 constant, used only when has_proj
};

Ref emit_latent(Tape& tape, Ref h_last, const FusionRefs& f) {
  Ref z = h_last;
  if (f.has_proj) {
    const Ref v = tape.activation(tape.affine(f.w_proj, f.mileage, f.b_proj),
                                  Activation::kRelu);
    z = tape.concat(z, v);
  }
  if (f.has_att) {
    const Ref gate = tape.activation(tape.affine(f.w_att, z, f.b_att),
                                     Activation::kSigmoid);
    z = tape.hadamard(z, gate);
  }
  return z;
}

struct DecoderRefs {
  Ref w_h0, b_h0, w_c0, b_c0;
  CellRefs cell;
  Ref w_out, b_out;
};

std::vector<Ref> emit_decoder(Tape& tape, const DecoderRefs& d, Ref z,
                              std::size_t steps, std::size_t channels) {
  Ref h = tape.activation(tape.affine(d.w_h0, z, d.b_h0), Activation::kTanh);
  Ref c = tape.affine(d.w_c0, z, d.b_c0);
  const Ref zero_in = tape.constant(Matrix(channels, 1));
  std::vector<Ref> rows;
  rows.reserve(steps);
  for (std::size_t t = 0; t < steps; ++t) {
    const StepRefs s = emit_lstm_step(tape, d.cell, zero_in, h, c);
    h = s.h;
    c = s.c;
    rows.push_back(tape.affine(d.w_out, s.h, d.b_out));
  }
  return rows;
}

}  // namespace

// --- standalone forward ops --------------------------------------------------------

LstmWeights lstm_weights_from(const numerics::ParameterStore& params,
                              const std::string& prefix) {
  LstmWeights w;
  w.w_fx = params.get(prefix + ".w_fx");
  w.w_fh = params.get(prefix + ".w_fh");
  w.b_f = params.get(prefix + ".b_f");
  w.w_ix = params.get(prefix + ".w_ix");
  w.w_ih = params.get(prefix + ".w_ih");
  w.b_i = params.get(prefix + ".b_i");
  w.w_cx = params.get(prefix + ".w_cx");
  w.w_ch = params.get(prefix + ".w_ch");
  w.b_c = params.get(prefix + ".b_c");
  w.w_ox = params.get(prefix + ".w_ox");
  w.w_oh = params.get(prefix + ".w_oh");
  w.b_o = params.get(prefix + ".b_o");
  return w;
}

LstmState lstm_step(const Matrix& x, const LstmState& prev,
                    const LstmWeights& w) {
  Tape tape;
  const CellRefs cell = cell_from_values(tape, w);
  const StepRefs s = emit_lstm_step(tape, cell, tape.constant(x),
                                    tape.constant(prev.h),
                                    tape.constant(prev.c));
  return {tape.value(s.h), tape.value(s.c)};
}

Matrix encode(const Matrix& window, const std::vector<LstmWeights>& layers) {
  if (layers.empty())
    throw std::invalid_argument("encode needs at least one layer");
  if (window.rows() == 0)
    throw DimensionError("encode needs at least one step");
  Tape tape;
  std::vector<CellRefs> cells;
  cells.reserve(layers.size());
  for (const LstmWeights& w : layers) cells.push_back(cell_from_values(tape, w));
  std::vector<Ref> xs;
  xs.reserve(window.rows());
  for (std::size_t t = 0; t < window.rows(); ++t)
    xs.push_back(tape.constant(window.row_as_column(t)));
  return tape.value(emit_encoder(tape, cells, xs));
}

Matrix project_mileage(double mileage_norm, const Matrix& w_proj,
                       const Matrix& b_proj) {
  const Matrix m(1, 1, {mileage_norm});
  return numerics::activate(numerics::affine(w_proj, m, b_proj),
                            Activation::kRelu);
}

Matrix apply_attention(const Matrix& z_raw, const Matrix& w_att,
                       const Matrix& b_att) {
  const Matrix gate = numerics::activate(
      numerics::affine(w_att, z_raw, b_att), Activation::kSigmoid);
  return numerics::hadamard(z_raw, gate);
}

Matrix fuse_latent_no_attention(const Matrix& h_last, const Matrix& v_phy) {
  return numerics::concat_columns(h_last, v_phy);
}

Matrix fuse_latent(const Matrix& h_last, const Matrix& v_phy,
                   const Matrix& w_att, const Matrix& b_att) {
  return apply_attention(fuse_latent_no_attention(h_last, v_phy), w_att,
                         b_att);
}

DecoderWeights decoder_weights_from(const numerics::ParameterStore& params) {
  DecoderWeights w;
  w.w_h0 = params.get("dec.w_h0");
  w.b_h0 = params.get("dec.b_h0");
  w.w_c0 = params.get("dec.w_c0");
  w.b_c0 = params.get("dec.b_c0");
  w.cell = lstm_weights_from(params, "dec");
  w.w_out = params.get("out.w");
  w.b_out = params.get("out.b");
  return w;
}

Matrix decode(const Matrix& z_final, std::size_t steps,
              const DecoderWeights& w) {
  if (steps == 0) throw DimensionError("decode needs at least one step");
  Tape tape;
  DecoderRefs refs;
  refs.w_h0 = tape.constant(w.w_h0);
  refs.b_h0 = tape.constant(w.b_h0);
  refs.w_c0 = tape.constant(w.w_c0);
  refs.b_c0 = tape.constant(w.b_c0);
  refs.cell = cell_from_values(tape, w.cell);
  refs.w_out = tape.constant(w.w_out);
  refs.b_out = tape.constant(w.b_out);
  const std::vector<Ref> rows =
      emit_decoder(tape, refs, tape.constant(z_final), steps, w.w_out.rows());
  Matrix out(steps, w.w_out.rows());
  for (std::size_t t = 0; t < steps; ++t) {
    const Matrix& row = tape.value(rows[t]);
    for (std::size_t c = 0; c < out.cols(); ++c) out(t, c) = row[c];
  }
  return out;
}

// --- full pipeline ------------------------------------------------------------------

ModelInput prepare_input(const data::WindowedSample& sample,
                         const ModelConfig& config,
                         const features::ChannelStats& stats,
                         const features::PhysicalFeatureSpec& spec) {
  if (sample.values.rows() != config.window)
    throw DimensionError("window has " + std::to_string(sample.values.rows()) +
                         " steps but the model expects " +
                         std::to_string(config.window));
  ModelInput input;
  input.target = features::normalize_window(sample, stats);
  if (config.use_physics_features) {
    if (spec.selected.size() != config.selected_features)
      throw DimensionError("feature spec selects " +
                           std::to_string(spec.selected.size()) +
                           " channels but the model expects " +
                           std::to_string(config.selected_features));
    input.values = features::augment_window(sample, stats, spec);
  } else {
    input.values = input.target;
  }
  input.mileage_norm = features::normalized_mileage(sample.mileage, stats);
  return input;
}

ReconstructionGraph build_reconstruction_graph(Tape& tape,
                                               const ModelConfig& config,
                                               const ModelInput& input) {
  config.validate();
  if (input.values.rows() != config.window ||
      input.values.cols() != config.input_dim())
    throw DimensionError("model input is " + input.values.shape_string() +
                         ", expected " + std::to_string(config.window) + "x" +
                         std::to_string(config.input_dim()));
  if (input.target.rows() != config.window ||
      input.target.cols() != config.channels)
    throw DimensionError("reconstruction target is " +
                         input.target.shape_string() + ", expected " +
                         std::to_string(config.window) + "x" +
                         std::to_string(config.channels));

  std::vector<Ref> xs;
  xs.reserve(config.window);
  for (std::size_t t = 0; t < config.window; ++t)
    xs.push_back(tape.constant(input.values.row_as_column(t)));

  std::vector<CellRefs> enc;
  enc.reserve(config.layers);
  for (std::size_t l = 0; l < config.layers; ++l)
    enc.push_back(cell_from_params(tape, "enc" + std::to_string(l)));
  const Ref h_last = emit_encoder(tape, enc, xs);

  FusionRefs fusion;
  if (config.use_latent_fusion) {
    fusion.has_proj = true;
    fusion.w_proj = tape.param("fusion.w_proj");
    fusion.b_proj = tape.param("fusion.b_proj");
    fusion.mileage = tape.constant(Matrix(1, 1, {input.mileage_norm}));
  }
  if (config.use_attention) {
    fusion.has_att = true;
    fusion.w_att = tape.param("fusion.w_att");
    fusion.b_att = tape.param("fusion.b_att");
  }
  Ref latent = emit_latent(tape, h_last, fusion);
  if (config.latent_dim > 0)
    latent = tape.affine(tape.param("bottleneck.w"), latent,
                         tape.param("bottleneck.b"));

  DecoderRefs dec;
  dec.w_h0 = tape.param("dec.w_h0");
  dec.b_h0 = tape.param("dec.b_h0");
  dec.w_c0 = tape.param("dec.w_c0");
  dec.b_c0 = tape.param("dec.b_c0");
  dec.cell = cell_from_params(tape, "dec");
  dec.w_out = tape.param("out.w");
  dec.b_out = tape.param("out.b");
  const std::vector<Ref> rows =
      emit_decoder(tape, dec, latent, config.window, config.channels);

  std::vector<Ref> terms;
  terms.reserve(config.window);
  for (std::size_t t = 0; t < config.window; ++t)
    terms.push_back(tape.sq_err(rows[t], input.target.row_as_column(t)));
  const double denom =
      static_cast<double>(config.window) * static_cast<double>(config.channels);
  const Ref loss = tape.scale(tape.sum(terms), 1.0 / denom);

  ReconstructionGraph graph;
  graph.loss = loss;
  graph.x_hat_rows = rows;
  graph.h_last = h_last;
  graph.latent = latent;
  return graph;
}

Reconstruction reconstruct(const data::WindowedSample& sample,
                           const numerics::ParameterStore& params,
                           const ModelConfig& config,
                           const features::ChannelStats& stats,
                           const features::PhysicalFeatureSpec& spec) {
  const ModelInput input = prepare_input(sample, config, stats, spec);
  Tape tape(&params);
  const ReconstructionGraph graph =
      build_reconstruction_graph(tape, config, input);
  Reconstruction out;
  out.score = tape.scalar(graph.loss);
  out.x_hat = Matrix(config.window, config.channels);
  for (std::size_t t = 0; t < config.window; ++t) {
    const Matrix& row = tape.value(graph.x_hat_rows[t]);
    for (std::size_t c = 0; c < config.channels; ++c) out.x_hat(t, c) = row[c];
  }
  return out;
}

}  // namespace voltwatch::model
