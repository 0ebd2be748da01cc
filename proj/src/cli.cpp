#include "voltwatch/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "text_util.hpp"
#include "voltwatch/data.hpp"
#include "voltwatch/evaluation.hpp"
#include "voltwatch/features.hpp"
#include "voltwatch/kernels.hpp"
#include "voltwatch/model.hpp"
#include "voltwatch/model_io.hpp"
#include "voltwatch/rng.hpp"
#include "voltwatch/training.hpp"

namespace voltwatch::cli {
namespace {

using textio::format_double;

// Writes to stdout when path is "-" (or empty), else atomically to the file.
void write_text(const std::string& path, const std::string& content,
                std::ostream& out) {
  if (path.empty() || path == "-") {
    out << content;
  } else {
    textio::atomic_write_file(path, content);
  }
}

std::string default_labels_path(const std::string& data_path) {
  const std::string suffix = ".csv";
  if (data_path.size() > suffix.size() &&
      data_path.compare(data_path.size() - suffix.size(), suffix.size(),
                        suffix) == 0)
    return data_path.substr(0, data_path.size() - suffix.size()) +
           ".labels.csv";
  return data_path + ".labels.csv";
}

// --- shared option bundles ---------------------------------------------------

struct ModelOpts {
  std::size_t window = 256;
  std::size_t hidden = 64;
  std::size_t layers = 1;
  std::size_t k = 2;
  std::size_t latent = 0;
  double epsilon = 1e-6;
  bool no_physics = false;
  bool no_fusion = false;
  bool no_attention = false;

  model::ModelConfig to_config() const {
    model::ModelConfig config;
    config.window = window;
    config.channels = data::kChannelCount;
    config.hidden = hidden;
    config.layers = layers;
    config.selected_features = k;
    config.latent_dim = latent;
    config.feature_epsilon = epsilon;
    config.use_physics_features = !no_physics;
    config.use_latent_fusion = !no_physics && !no_fusion;
    config.use_attention = !no_physics && !no_attention;
    return config;
  }
};

void add_model_options(CLI::App* cmd, ModelOpts& o) {
  cmd->add_option("--window", o.window, "steps per window (T)")
      ->capture_default_str();
  cmd->add_option("--hidden", o.hidden, "LSTM hidden size")
      ->capture_default_str();
  cmd->add_option("--layers", o.layers, "encoder LSTM layers")
      ->capture_default_str();
  cmd->add_option("--k", o.k, "channels selected for interaction features")
      ->capture_default_str();
  cmd->add_option("--latent", o.latent,
                  "optional linear bottleneck width (0 = off)")
      ->capture_default_str();
  cmd->add_option("--epsilon", o.epsilon, "guard for the rate feature")
      ->capture_default_str();
  cmd->add_flag("--no-physics", o.no_physics,
                "plain autoencoder: no feature augmentation, fusion, or "
                "attention");
  cmd->add_flag("--no-fusion", o.no_fusion,
                "keep augmented inputs but drop the mileage latent");
  cmd->add_flag("--no-attention", o.no_attention,
                "keep the fused latent but drop the attention gate");
}

struct TrainOpts {
  std::size_t epochs = 100;
  std::size_t batch = 32;
  double lr = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_eps = 1e-8;
  double clip = 5.0;
  double quantile = 0.95;
  std::uint64_t seed = 42;

  training::TrainConfig to_config() const {
    training::TrainConfig config;
    config.epochs = epochs;
    config.batch_size = batch;
    config.learning_rate = lr;
    config.beta1 = beta1;
    config.beta2 = beta2;
    config.adam_eps = adam_eps;
    config.clip_norm = clip;
    config.quantile = quantile;
    config.seed = seed;
    return config;
  }
};

void add_train_options(CLI::App* cmd, TrainOpts& o) {
  cmd->add_option("--epochs", o.epochs, "training epochs")
      ->capture_default_str();
  cmd->add_option("--batch", o.batch, "mini-batch size")
      ->capture_default_str();
  cmd->add_option("--lr", o.lr, "Adam learning rate")->capture_default_str();
  cmd->add_option("--beta1", o.beta1, "Adam beta1")->capture_default_str();
  cmd->add_option("--beta2", o.beta2, "Adam beta2")->capture_default_str();
  cmd->add_option("--adam-eps", o.adam_eps, "Adam epsilon")
      ->capture_default_str();
  cmd->add_option("--clip", o.clip, "global gradient-norm ceiling")
      ->capture_default_str();
  cmd->add_option("--quantile", o.quantile, "threshold quantile q")
      ->capture_default_str();
  cmd->add_option("--seed", o.seed, "run seed")->capture_default_str();
}

// --- data loading helpers ------------------------------------------------------

std::vector<data::VehicleStream> load_streams(const std::string& data_path,
                                              const std::string& labels_path,
                                              std::ostream& err) {
  auto streams = data::read_telemetry_file(data_path, &err);
  if (!labels_path.empty()) data::apply_labels_file(labels_path, streams);
  return streams;
}

std::vector<data::WindowedSample> window_streams(
    const std::vector<data::VehicleStream>& streams, std::size_t window,
    std::size_t stride) {
  auto samples = data::make_windows(streams, window, stride);
  if (samples.empty())
    throw data::CsvError(
        "no windows: every stream is shorter than the window length " +
        std::to_string(window));
  return samples;
}

// --- subcommand payloads ---------------------------------------------------------

struct GenDataArgs {
  std::string out_path;
  std::string labels_path;
  data::FleetConfig fleet;
  std::uint64_t seed = 42;
  std::size_t fault_vehicles = 2;
  std::string fault_kind = "stuck_voltage";
  double fault_magnitude = 3.0;
  std::size_t fault_duration = 1024;
};

int run_gen_data(const GenDataArgs& a, std::ostream& out) {
  if (a.fault_vehicles > a.fleet.vehicles)
    throw std::invalid_argument("--fault-vehicles exceeds --vehicles");

  auto fleet = data::generate_fleet(a.fleet, a.seed);

  if (a.fault_vehicles > 0) {
    const data::FaultKind kind = data::fault_kind_from_name(a.fault_kind);
    const std::size_t len = a.fleet.samples_per_vehicle;
    if (a.fault_duration == 0 || a.fault_duration > len / 2)
      throw std::invalid_argument(
          "--fault-duration must lie in [1, samples/2]");
    // Faults land on the highest-index vehicles; onset is drawn from the
    // middle half of the stream so windows before and after stay clean.
    for (std::size_t j = 0; j < a.fault_vehicles; ++j) {
      const std::size_t v = a.fleet.vehicles - 1 - j;
      rng::Rng gen(rng::substream(a.seed, "fault-onset", v));
      const std::size_t lo = len / 4;
      const std::size_t span = len / 2 - a.fault_duration + 1;
      data::FaultSpec spec;
      spec.kind = kind;
      spec.onset = lo + static_cast<std::size_t>(gen.below(span));
      spec.duration = a.fault_duration;
      spec.magnitude = a.fault_magnitude;
      data::inject_fault(fleet[v], spec, a.seed);
    }
  }

  const std::string labels_path =
      a.labels_path.empty() ? default_labels_path(a.out_path) : a.labels_path;
  data::write_telemetry_file(a.out_path, fleet);
  data::write_labels_file(labels_path, fleet);

  std::size_t faulted = 0;
  for (const auto& s : fleet)
    for (const auto& r : s.records) faulted += r.label;
  out << "wrote " << fleet.size() << " vehicles x "
      << a.fleet.samples_per_vehicle << " samples to " << a.out_path << " ("
      << faulted << " faulted records; labels in " << labels_path << ")\n";
  return kExitOk;
}

struct CorrelationArgs {
  std::string data_path;
  std::size_t window = 256;
  std::size_t stride = 0;  // 0 -> window
  std::string out_path = "-";
};

int run_correlation(const CorrelationArgs& a, std::ostream& out,
                    std::ostream& err) {
  const std::size_t stride = a.stride == 0 ? a.window : a.stride;
  const auto streams = load_streams(a.data_path, "", err);
  const auto samples = window_streams(streams, a.window, stride);
  const auto report = features::correlate_with_mileage(samples);

  std::string csv = "channel,rho\n";
  for (std::size_t c = 0; c < data::kChannelCount; ++c) {
    csv += data::kChannelNames[c];
    csv += ',';
    csv += format_double(report.rho[c]);
    csv += '\n';
  }
  write_text(a.out_path, csv, out);
  return kExitOk;
}

struct TrainArgs {
  std::string data_path;
  std::string labels_path;
  std::string model_path;
  std::string history_path;
  std::size_t stride = 0;  // 0 -> window
  ModelOpts model;
  TrainOpts train;
};

int run_train(const TrainArgs& a, std::ostream& out, std::ostream& err) {
  const std::size_t stride = a.stride == 0 ? a.model.window : a.stride;
  const auto streams = load_streams(a.data_path, a.labels_path, err);
  const auto samples = window_streams(streams, a.model.window, stride);

  std::vector<data::WindowedSample> normal;
  std::size_t faulted = 0;
  for (const auto& s : samples) {
    if (s.label == 0)
      normal.push_back(s);
    else
      ++faulted;
  }
  if (normal.empty())
    throw data::CsvError("no fault-free windows available for training");
  if (faulted > 0)
    err << "note: excluding " << faulted
        << " faulted windows from the training set\n";

  const auto model = training::fit(normal, a.model.to_config(),
                                   a.train.to_config());
  model_io::save_model_file(a.model_path, model);

  if (!a.history_path.empty()) {
    std::string csv = "epoch,loss\n";
    for (std::size_t e = 0; e < model.loss_history.size(); ++e) {
      csv += std::to_string(e + 1);
      csv += ',';
      csv += format_double(model.loss_history[e]);
      csv += '\n';
    }
    write_text(a.history_path, csv, out);
  }

  out << "trained on " << normal.size() << " windows for "
      << model.loss_history.size() << " epochs; final loss "
      << format_double(model.loss_history.empty() ? 0.0
                                                  : model.loss_history.back())
      << "; threshold " << format_double(model.threshold.lambda) << " (q="
      << format_double(model.threshold.quantile) << "); model saved to "
      << a.model_path << "\n";
  return kExitOk;
}

struct EvalArgs {
  std::string data_path;
  std::string labels_path;
  std::string report_path = "-";
  std::string roc_path;
  std::size_t stride = 0;
  std::size_t folds = 5;
  ModelOpts model;
  TrainOpts train;
};

void append_metric_row(std::string& csv, const std::string& tag,
                       const evaluation::FoldResult& r) {
  csv += tag;
  csv += ',' + format_double(r.accuracy);
  csv += ',' + format_double(r.normal.precision);
  csv += ',' + format_double(r.normal.recall);
  csv += ',' + format_double(r.normal.f1);
  csv += ',' + format_double(r.fault.precision);
  csv += ',' + format_double(r.fault.recall);
  csv += ',' + format_double(r.fault.f1);
  csv += ',' + format_double(r.auc);
  csv += ',' + format_double(r.lambda);
  csv += '\n';
}

int run_eval(const EvalArgs& a, std::ostream& out, std::ostream& err) {
  const std::size_t stride = a.stride == 0 ? a.model.window : a.stride;
  const auto streams = load_streams(a.data_path, a.labels_path, err);
  const auto samples = window_streams(streams, a.model.window, stride);

  std::vector<data::WindowedSample> normals, faults;
  for (const auto& s : samples)
    (s.label == 0 ? normals : faults).push_back(s);
  if (faults.empty())
    throw data::CsvError(
        "evaluation needs fault windows; none were labeled in " + a.data_path);

  const auto report =
      evaluation::cross_validate(normals, faults, a.model.to_config(),
                                 a.train.to_config(), a.folds);

  std::string csv =
      "fold,accuracy,precision_0,recall_0,f1_0,precision_1,recall_1,f1_1,auc,"
      "lambda\n";
  for (const auto& fold : report.folds)
    append_metric_row(csv, std::to_string(fold.fold), fold);
  auto agg_row = [&](const std::string& tag, auto pick) {
    csv += tag;
    csv += ',' + format_double(pick(report.accuracy));
    csv += ',' + format_double(pick(report.precision0));
    csv += ',' + format_double(pick(report.recall0));
    csv += ',' + format_double(pick(report.f10));
    csv += ',' + format_double(pick(report.precision1));
    csv += ',' + format_double(pick(report.recall1));
    csv += ',' + format_double(pick(report.f11));
    csv += ',' + format_double(pick(report.auc));
    csv += ',' + format_double(pick(report.lambda));
    csv += '\n';
  };
  agg_row("mean", [](const evaluation::Aggregate& a) { return a.mean; });
  agg_row("std", [](const evaluation::Aggregate& a) { return a.stddev; });
  write_text(a.report_path, csv, out);

  if (!a.roc_path.empty()) {
    // Pooled ROC across folds.
    std::vector<double> scores;
    std::vector<int> labels;
    for (const auto& fold : report.folds) {
      scores.insert(scores.end(), fold.scores.begin(), fold.scores.end());
      labels.insert(labels.end(), fold.labels.begin(), fold.labels.end());
    }
    const auto curve = evaluation::roc_curve(scores, labels);
    std::string roc = "fpr,tpr\n";
    for (const auto& p : curve)
      roc += format_double(p.fpr) + ',' + format_double(p.tpr) + '\n';
    write_text(a.roc_path, roc, out);
  }
  return kExitOk;
}

struct GridArgs {
  std::string data_path;
  std::string labels_path;
  std::string out_path = "-";
  std::size_t stride = 0;
  std::size_t folds = 5;
  std::vector<std::size_t> layer_axis = {1, 2, 3, 4};
  std::vector<std::size_t> hidden_axis = {32, 64, 128, 256};
  ModelOpts model;
  TrainOpts train;
};

int run_grid(const GridArgs& a, std::ostream& out, std::ostream& err) {
  const std::size_t stride = a.stride == 0 ? a.model.window : a.stride;
  const auto streams = load_streams(a.data_path, a.labels_path, err);
  const auto samples = window_streams(streams, a.model.window, stride);

  std::vector<data::WindowedSample> normals, faults;
  for (const auto& s : samples)
    (s.label == 0 ? normals : faults).push_back(s);
  if (faults.empty())
    throw data::CsvError("grid search needs fault windows; none were labeled");

  const auto cells =
      evaluation::grid_search(normals, faults, a.model.to_config(),
                              a.train.to_config(), a.layer_axis, a.hidden_axis,
                              a.folds);

  std::string csv = "layers,neurons,mean_auc\n";
  for (const auto& cell : cells) {
    csv += std::to_string(cell.layers);
    csv += ',' + std::to_string(cell.hidden);
    csv += ',' + format_double(cell.mean_auc);
    csv += '\n';
  }
  write_text(a.out_path, csv, out);
  return kExitOk;
}

struct DiagnoseArgs {
  std::string model_path;
  std::string data_path;
  std::string out_path = "-";
  std::size_t stride = 0;  // 0 -> model window (non-overlapping)
};

int run_diagnose(const DiagnoseArgs& a, std::ostream& out, std::ostream& err) {
  const auto model = model_io::load_model_file(a.model_path);
  const std::size_t stride = a.stride == 0 ? model.config.window : a.stride;
  const auto streams = load_streams(a.data_path, "", err);
  const auto samples = window_streams(streams, model.config.window, stride);

  std::string csv = "vehicle_id,start_timestamp,end_timestamp,score,flag\n";
  std::size_t flagged = 0;
  for (const auto& s : samples) {
    const double score = model.score(s);
    const bool flag = score > model.threshold.lambda;
    flagged += flag ? 1 : 0;
    csv += s.vehicle_id;
    csv += ',' + format_double(s.start_timestamp);
    csv += ',' + format_double(s.end_timestamp);
    csv += ',' + format_double(score);
    csv += ',';
    csv += flag ? '1' : '0';
    csv += '\n';
  }
  write_text(a.out_path, csv, out);
  err << "flagged " << flagged << " of " << samples.size() << " windows\n";
  return kExitOk;
}

struct ExportReconArgs {
  std::string model_path;
  std::string data_path;
  std::string out_path = "-";
  std::string vehicle;  // empty -> first
  std::size_t index = 0;
  std::size_t stride = 0;
};

int run_export_recon(const ExportReconArgs& a, std::ostream& out,
                     std::ostream& err) {
  const auto model = model_io::load_model_file(a.model_path);
  const std::size_t stride = a.stride == 0 ? model.config.window : a.stride;
  const auto streams = load_streams(a.data_path, "", err);

  const data::VehicleStream* stream = nullptr;
  if (a.vehicle.empty()) {
    stream = &streams.front();
  } else {
    for (const auto& s : streams)
      if (s.vehicle_id == a.vehicle) stream = &s;
    if (stream == nullptr)
      throw data::CsvError("vehicle '" + a.vehicle + "' not found in " +
                           a.data_path);
  }

  const auto samples =
      data::make_windows(*stream, model.config.window, stride);
  if (a.index >= samples.size())
    throw std::invalid_argument(
        "--index " + std::to_string(a.index) + " out of range: vehicle " +
        stream->vehicle_id + " has " + std::to_string(samples.size()) +
        " windows");
  const auto& sample = samples[a.index];

  const auto recon = model::reconstruct(sample, model.params, model.config,
                                        model.stats, model.feature_spec);
  std::string csv = "step,voltage,voltage_hat\n";
  for (std::size_t t = 0; t < model.config.window; ++t) {
    csv += std::to_string(t);
    csv += ',' + format_double(sample.values(t, 0));
    csv += ',' +
           format_double(features::denormalize(recon.x_hat(t, 0), 0,
                                               model.stats));
    csv += '\n';
  }
  write_text(a.out_path, csv, out);
  err << "window score " << format_double(recon.score) << " (threshold "
      << format_double(model.threshold.lambda) << ")\n";
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err) {
  CLI::App app{
      "voltwatch: early battery-fault detection for vehicle fleets.\n"
      "Physics-aware LSTM autoencoder over telemetry windows: train on\n"
      "fault-free data, flag windows whose reconstruction error exceeds a\n"
      "quantile threshold."};
  app.require_subcommand(1);
  app.set_config("--config", "",
                 "key=value config file ([section] = subcommand)");
  std::string kernel_backend = "auto";
  app.add_option("--kernels", kernel_backend,
                 "numeric backend: scalar, avx2, or auto")
      ->capture_default_str();

  GenDataArgs gen;
  CLI::App* gen_cmd =
      app.add_subcommand("gen-data", "generate synthetic fleet telemetry");
  gen_cmd->add_option("--out", gen.out_path, "telemetry CSV path")->required();
  gen_cmd->add_option("--labels", gen.labels_path,
                      "labels CSV path (default: <out>.labels.csv)");
  gen_cmd->add_option("--vehicles", gen.fleet.vehicles, "fleet size")
      ->capture_default_str();
  gen_cmd->add_option("--samples", gen.fleet.samples_per_vehicle,
                      "samples per vehicle")
      ->capture_default_str();
  gen_cmd->add_option("--interval", gen.fleet.sample_interval_s,
                      "sample interval, seconds")
      ->capture_default_str();
  gen_cmd->add_option("--aging", gen.fleet.aging_gamma,
                      "fractional resistance growth across the mileage span")
      ->capture_default_str();
  gen_cmd->add_option("--mileage-span", gen.fleet.mileage_span_km,
                      "fleet start-mileage spread, km")
      ->capture_default_str();
  gen_cmd->add_option("--noise-voltage", gen.fleet.noise_voltage,
                      "voltage noise std, V")
      ->capture_default_str();
  gen_cmd->add_option("--seed", gen.seed, "run seed")->capture_default_str();
  gen_cmd->add_option("--fault-vehicles", gen.fault_vehicles,
                      "how many vehicles receive an injected fault")
      ->capture_default_str();
  gen_cmd->add_option("--fault-kind", gen.fault_kind,
                      "stuck_voltage, offset_drop, or noise_burst")
      ->capture_default_str();
  gen_cmd->add_option("--fault-magnitude", gen.fault_magnitude,
                      "fault magnitude, V")
      ->capture_default_str();
  gen_cmd->add_option("--fault-duration", gen.fault_duration,
                      "fault span, samples")
      ->capture_default_str();

  CorrelationArgs corr;
  CLI::App* corr_cmd = app.add_subcommand(
      "analyze-correlation", "rank channels by mileage correlation");
  corr_cmd->add_option("--data", corr.data_path, "telemetry CSV")->required();
  corr_cmd->add_option("--window", corr.window, "steps per window")
      ->capture_default_str();
  corr_cmd->add_option("--stride", corr.stride,
                       "window stride (default: window length)");
  corr_cmd->add_option("--out", corr.out_path, "output CSV ('-' = stdout)")
      ->capture_default_str();

  TrainArgs train;
  CLI::App* train_cmd =
      app.add_subcommand("train", "fit the detector on fault-free windows");
  train_cmd->add_option("--data", train.data_path, "telemetry CSV")
      ->required();
  train_cmd->add_option("--labels", train.labels_path,
                        "labels CSV (faulted windows are excluded)");
  train_cmd->add_option("--model", train.model_path, "output model path")
      ->required();
  train_cmd->add_option("--loss-history", train.history_path,
                        "write per-epoch loss CSV here");
  train_cmd->add_option("--stride", train.stride,
                        "window stride (default: window length)");
  add_model_options(train_cmd, train.model);
  add_train_options(train_cmd, train.train);

  EvalArgs eval;
  CLI::App* eval_cmd = app.add_subcommand(
      "eval", "cross-validated detection metrics on labeled telemetry");
  eval_cmd->add_option("--data", eval.data_path, "telemetry CSV")->required();
  eval_cmd->add_option("--labels", eval.labels_path, "labels CSV")->required();
  eval_cmd->add_option("--report", eval.report_path,
                       "metrics CSV ('-' = stdout)")
      ->capture_default_str();
  eval_cmd->add_option("--roc", eval.roc_path, "pooled ROC curve CSV");
  eval_cmd->add_option("--stride", eval.stride,
                       "window stride (default: window length)");
  eval_cmd->add_option("--folds", eval.folds, "cross-validation folds")
      ->capture_default_str();
  add_model_options(eval_cmd, eval.model);
  add_train_options(eval_cmd, eval.train);

  GridArgs grid;
  CLI::App* grid_cmd = app.add_subcommand(
      "grid-search", "cross-validate every (layers, neurons) combination");
  grid_cmd->add_option("--data", grid.data_path, "telemetry CSV")->required();
  grid_cmd->add_option("--labels", grid.labels_path, "labels CSV")->required();
  grid_cmd->add_option("--out", grid.out_path, "grid CSV ('-' = stdout)")
      ->capture_default_str();
  grid_cmd->add_option("--stride", grid.stride,
                       "window stride (default: window length)");
  grid_cmd->add_option("--folds", grid.folds, "cross-validation folds")
      ->capture_default_str();
  grid_cmd
      ->add_option("--grid-layers", grid.layer_axis,
                   "layer counts to sweep (comma-separated)")
      ->delimiter(',')
      ->capture_default_str();
  grid_cmd
      ->add_option("--grid-neurons", grid.hidden_axis,
                   "hidden sizes to sweep (comma-separated)")
      ->delimiter(',')
      ->capture_default_str();
  add_model_options(grid_cmd, grid.model);
  add_train_options(grid_cmd, grid.train);

  DiagnoseArgs diag;
  CLI::App* diag_cmd = app.add_subcommand(
      "diagnose", "score telemetry windows with a trained model");
  diag_cmd->add_option("--model", diag.model_path, "model file")->required();
  diag_cmd->add_option("--data", diag.data_path, "telemetry CSV")->required();
  diag_cmd->add_option("--out", diag.out_path, "scores CSV ('-' = stdout)")
      ->capture_default_str();
  diag_cmd->add_option(
      "--stride", diag.stride,
      "window stride (default: window length; 1 = streaming)");

  ExportReconArgs recon;
  CLI::App* recon_cmd = app.add_subcommand(
      "export-recon", "dump one window's voltage reconstruction");
  recon_cmd->add_option("--model", recon.model_path, "model file")->required();
  recon_cmd->add_option("--data", recon.data_path, "telemetry CSV")
      ->required();
  recon_cmd->add_option("--out", recon.out_path, "output CSV ('-' = stdout)")
      ->capture_default_str();
  recon_cmd->add_option("--vehicle", recon.vehicle,
                        "vehicle id (default: first in file)");
  recon_cmd->add_option("--index", recon.index, "window index")
      ->capture_default_str();
  recon_cmd->add_option("--stride", recon.stride,
                        "window stride (default: window length)");

  std::vector<const char*> argv;
  argv.reserve(args.size() + 1);
  argv.push_back("voltwatch");
  for (const auto& a : args) argv.push_back(a.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    err << "run 'voltwatch --help' for usage\n";
    return kExitUsage;
  }

  try {
    kernels::select_backend(kernel_backend);
    if (gen_cmd->parsed()) return run_gen_data(gen, out);
    if (corr_cmd->parsed()) return run_correlation(corr, out, err);
    if (train_cmd->parsed()) return run_train(train, out, err);
    if (eval_cmd->parsed()) return run_eval(eval, out, err);
    if (grid_cmd->parsed()) return run_grid(grid, out, err);
    if (diag_cmd->parsed()) return run_diagnose(diag, out, err);
    if (recon_cmd->parsed()) return run_export_recon(recon, out, err);
    err << "error: no subcommand given\n";
    return kExitUsage;
  } catch (const data::CsvError& e) {
    err << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const model_io::ModelFileError& e) {
    err << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const numerics::NumericError& e) {
    err << "numeric error: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }
}

}  // namespace voltwatch::cli
