#include "voltwatch/model_io.hpp"

#include <bit>
#include <cstdint>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "text_util.hpp"

namespace voltwatch::model_io {

namespace {

constexpr char kMagic[4] = {'V', 'W', 'M', 'B'};
constexpr std::uint32_t kVersion = 1;

// All integers and double bit patterns are little-endian on disk.

void put_u8(std::string& out, std::uint8_t v) {
  out += static_cast<char>(v);
}

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out += static_cast<char>((v >> (8 * i)) & 0xff);
}

void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out += static_cast<char>((v >> (8 * i)) & 0xff);
}

void put_f64(std::string& out, double v) {
  put_u64(out, std::bit_cast<std::uint64_t>(v));
}

void put_doubles(std::string& out, const std::vector<double>& values) {
  put_u64(out, values.size());
  for (double v : values) put_f64(out, v);
}

struct Reader {
  const std::string& buf;
  std::size_t pos = 0;

  void need(std::size_t n) const {
    if (pos + n > buf.size())
      throw ModelFileError("model file truncated (needed " +
                           std::to_string(n) + " bytes at offset " +
                           std::to_string(pos) + ")");
  }
  std::uint8_t u8() {
    need(1);
    return static_cast<std::uint8_t>(buf[pos++]);
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i)
      v |= static_cast<std::uint32_t>(static_cast<std::uint8_t>(buf[pos++]))
           << (8 * i);
    return v;
  }
  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i)
      v |= static_cast<std::uint64_t>(static_cast<std::uint8_t>(buf[pos++]))
           << (8 * i);
    return v;
  }
  double f64() { return std::bit_cast<double>(u64()); }
  std::vector<double> doubles() {
    const std::uint64_t n = u64();
    need(n * 8);
    std::vector<double> out(n);
    for (std::uint64_t i = 0; i < n; ++i) out[i] = f64();
    return out;
  }
  std::string str(std::size_t n) {
    need(n);
    std::string s = buf.substr(pos, n);
    pos += n;
    return s;
  }
};

}  // namespace

void save_model(std::ostream& out, const training::TrainedModel& model) {
  std::string buf;
  buf.append(kMagic, sizeof kMagic);
  put_u32(buf, kVersion);

  const model::ModelConfig& c = model.config;
  put_u64(buf, c.window);
  put_u64(buf, c.channels);
  put_u64(buf, c.hidden);
  put_u64(buf, c.layers);
  put_u64(buf, c.selected_features);
  put_u64(buf, c.latent_dim);
  put_u8(buf, c.use_physics_features ? 1 : 0);
  put_u8(buf, c.use_latent_fusion ? 1 : 0);
  put_u8(buf, c.use_attention ? 1 : 0);

  put_doubles(buf, model.stats.mean);
  put_doubles(buf, model.stats.scale);
  put_f64(buf, model.stats.mileage_max);

  put_u64(buf, model.feature_spec.selected.size());
  for (std::size_t s : model.feature_spec.selected) put_u64(buf, s);
  put_f64(buf, model.feature_spec.epsilon);
  put_doubles(buf, model.feature_spec.extra_mean);
  put_doubles(buf, model.feature_spec.extra_scale);

  put_f64(buf, model.threshold.lambda);
  put_f64(buf, model.threshold.quantile);
  put_doubles(buf, model.threshold.training_scores);

  put_doubles(buf, model.loss_history);

  put_u64(buf, model.params.count());
  for (const auto& [name, m] : model.params) {
    put_u32(buf, static_cast<std::uint32_t>(name.size()));
    buf += name;
    put_u64(buf, m.rows());
    put_u64(buf, m.cols());
    for (std::size_t i = 0; i < m.size(); ++i) put_f64(buf, m[i]);
  }

  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (!out) throw ModelFileError("model write failed");
}

training::TrainedModel load_model(std::istream& in) {
  std::ostringstream collect;
  collect << in.rdbuf();
  const std::string buf = collect.str();
  Reader r{buf};

  if (r.str(4) != std::string(kMagic, sizeof kMagic))
    throw ModelFileError("not a model file (bad magic)");
  const std::uint32_t version = r.u32();
  if (version != kVersion)
    throw ModelFileError("unsupported model file version " +
                         std::to_string(version));

  training::TrainedModel model;
  model::ModelConfig& c = model.config;
  c.window = r.u64();
  c.channels = r.u64();
  c.hidden = r.u64();
  c.layers = r.u64();
  c.selected_features = r.u64();
  c.latent_dim = r.u64();
  c.use_physics_features = r.u8() != 0;
  c.use_latent_fusion = r.u8() != 0;
  c.use_attention = r.u8() != 0;
  try {
    c.validate();
  } catch (const std::invalid_argument& e) {
    throw ModelFileError(std::string("model file holds an invalid config: ") +
                         e.what());
  }

  model.stats.mean = r.doubles();
  model.stats.scale = r.doubles();
  model.stats.mileage_max = r.f64();
  if (model.stats.mean.size() != c.channels ||
      model.stats.scale.size() != c.channels)
    throw ModelFileError("model file statistics do not match the channel count");

  const std::uint64_t k = r.u64();
  for (std::uint64_t i = 0; i < k; ++i)
    model.feature_spec.selected.push_back(r.u64());
  model.feature_spec.epsilon = r.f64();
  if (model.feature_spec.epsilon <= 0.0)
    throw ModelFileError("model file holds a non-positive feature epsilon");
  model.feature_spec.extra_mean = r.doubles();
  model.feature_spec.extra_scale = r.doubles();
  c.feature_epsilon = model.feature_spec.epsilon;

  model.threshold.lambda = r.f64();
  model.threshold.quantile = r.f64();
  model.threshold.training_scores = r.doubles();

  model.loss_history = r.doubles();

  const std::uint64_t count = r.u64();
  for (std::uint64_t i = 0; i < count; ++i) {
    const std::uint32_t name_len = r.u32();
    const std::string name = r.str(name_len);
    const std::uint64_t rows = r.u64();
    const std::uint64_t cols = r.u64();
    r.need(rows * cols * 8);
    numerics::Matrix m(rows, cols);
    for (std::size_t j = 0; j < m.size(); ++j) m[j] = r.f64();
    model.params.create(name, std::move(m));
  }
  if (r.pos != buf.size())
    throw ModelFileError("model file has " +
                         std::to_string(buf.size() - r.pos) +
                         " trailing bytes");

  // Structural check: the parameter set must be exactly what this config
  // defines (same names, same shapes).
  const numerics::ParameterStore expected = model::init_parameters(c, 0);
  if (expected.count() != model.params.count())
    throw ModelFileError("model file holds " +
                         std::to_string(model.params.count()) +
                         " parameters, config defines " +
                         std::to_string(expected.count()));
  for (const auto& [name, m] : expected) {
    if (!model.params.contains(name))
      throw ModelFileError("model file is missing parameter '" + name + "'");
    if (!model.params.get(name).same_shape(m))
      throw ModelFileError("parameter '" + name + "' has shape " +
                           model.params.get(name).shape_string() +
                           ", config defines " + m.shape_string());
  }
  return model;
}

void save_model_file(const std::string& path,
                     const training::TrainedModel& model) {
  std::ostringstream buf;
  save_model(buf, model);
  textio::atomic_write_file(path, buf.str());
}

training::TrainedModel load_model_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ModelFileError("cannot open model file '" + path + "'");
  return load_model(in);
}

}  // namespace voltwatch::model_io
