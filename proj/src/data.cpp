#include "voltwatch/data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <ostream>
#include <sstream>

#include "text_util.hpp"
#include "voltwatch/rng.hpp"

namespace voltwatch::data {

const char* const kChannelNames[kChannelCount] = {"voltage", "current", "soc",
                                                  "temperature"};

const char* const kTelemetryHeader =
    "vehicle_id,timestamp,voltage,current,soc,temperature,mileage";
const char* const kLabelsHeader = "vehicle_id,timestamp,label";

// --- synthetic fleet ---------------------------------------------------------

namespace {

std::string vehicle_name(std::size_t v) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "v%03zu", v);
  return buf;
}

}  // namespace

std::vector<VehicleStream> generate_fleet(const FleetConfig& config,
                                          std::uint64_t seed) {
  if (config.vehicles == 0 || config.samples_per_vehicle == 0)
    throw std::invalid_argument("fleet needs at least one vehicle and sample");
  if (config.sample_interval_s <= 0.0 || config.battery_capacity_ah <= 0.0)
    throw std::invalid_argument("sample interval and capacity must be positive");

  std::vector<VehicleStream> fleet;
  fleet.reserve(config.vehicles);

  const double dt = config.sample_interval_s;
  // % SOC consumed per (A * sample): capacity in A*s covers 100%.
  const double soc_per_amp = 100.0 * dt / (config.battery_capacity_ah * 3600.0);

  for (std::size_t v = 0; v < config.vehicles; ++v) {
    rng::Rng gen(rng::substream(seed, "fleet", v));

    VehicleStream stream;
    stream.vehicle_id = vehicle_name(v);
    stream.records.reserve(config.samples_per_vehicle);

    // Start mileage depends only on (seed, v): vehicles keep their identity
    // when the fleet grows or shrinks.
    const double start_mileage = config.mileage_span_km * gen.uniform();
    double soc = gen.uniform(55.0, 90.0);
    const double drive_phase = gen.uniform(0.0, 2.0 * std::numbers::pi);
    const double temp_phase = gen.uniform(0.0, 2.0 * std::numbers::pi);
    double mileage_acc = 0.0;
    bool driving = true;

    for (std::size_t step = 0; step < config.samples_per_vehicle; ++step) {
      const double t = static_cast<double>(step) * dt;

      double current;
      if (driving) {
        const double cycle =
            std::sin(2.0 * std::numbers::pi * t / config.drive_period_s +
                     drive_phase);
        current = config.drive_current_amp * (0.55 + 0.45 * cycle) +
                  gen.normal(0.0, config.noise_current);
        soc -= current * soc_per_amp;
        const double speed_kmh =
            config.speed_kmh_per_amp * std::max(current, 0.0);
        mileage_acc += speed_kmh * dt / 3600.0;
        if (soc <= 20.0) {
          soc = 20.0;
          driving = false;
        }
      } else {
        current = config.charge_current +
                  gen.normal(0.0, 0.3 * config.noise_current);
        soc -= current * soc_per_amp;  // negative current raises SOC
        if (soc >= 88.0) {
          soc = 88.0;
          driving = true;
        }
      }

      const double mileage = start_mileage + mileage_acc;
      const double r_eff =
          config.internal_resistance *
          (1.0 + config.aging_gamma * mileage / config.mileage_span_km);

      Record rec;
      rec.timestamp = t;
      rec.current = current;
      rec.soc = soc + gen.normal(0.0, config.noise_soc);
      rec.voltage = config.base_voltage + config.soc_voltage_slope * soc -
                    current * r_eff + gen.normal(0.0, config.noise_voltage);
      rec.temperature = 25.0 +
                        6.0 * std::sin(2.0 * std::numbers::pi * t / 86400.0 +
                                       temp_phase) +
                        0.04 * std::max(current, 0.0) +
                        gen.normal(0.0, config.noise_temperature);
      rec.mileage = mileage;
      rec.label = 0;
      stream.records.push_back(rec);
    }
    fleet.push_back(std::move(stream));
  }
  return fleet;
}

// --- fault injection ----------------------------------------------------------

FaultKind fault_kind_from_name(const std::string& name) {
  if (name == "stuck_voltage") return FaultKind::kStuckVoltage;
  if (name == "offset_drop") return FaultKind::kOffsetDrop;
  if (name == "noise_burst") return FaultKind::kNoiseBurst;
  throw std::invalid_argument(
      "unknown fault kind '" + name +
      "' (expected stuck_voltage, offset_drop, or noise_burst)");
}

std::string fault_kind_name(FaultKind kind) {
  switch (kind) {
    case FaultKind::kStuckVoltage:
      return "stuck_voltage";
    case FaultKind::kOffsetDrop:
      return "offset_drop";
    case FaultKind::kNoiseBurst:
      return "noise_burst";
  }
  throw std::invalid_argument("unknown fault kind value");
}

void inject_fault(VehicleStream& stream, const FaultSpec& spec,
                  std::uint64_t seed) {
  const std::size_t len = stream.records.size();
  if (spec.duration == 0)
    throw std::invalid_argument("fault duration must be at least one sample");
  if (spec.onset >= len || spec.onset + spec.duration > len)
    throw std::invalid_argument(
        "fault span [" + std::to_string(spec.onset) + ", " +
        std::to_string(spec.onset + spec.duration) + ") leaves the stream of " +
        std::to_string(len) + " samples");
  if (spec.magnitude < 0.0)
    throw std::invalid_argument("fault magnitude must be non-negative");

  rng::Rng gen(rng::substream(rng::substream(seed, stream.vehicle_id), "fault",
                              spec.onset));
  const double frozen = stream.records[spec.onset].voltage;
  for (std::size_t i = spec.onset; i < spec.onset + spec.duration; ++i) {
    Record& rec = stream.records[i];
    switch (spec.kind) {
      case FaultKind::kStuckVoltage:
        rec.voltage = frozen;
        break;
      case FaultKind::kOffsetDrop:
        rec.voltage -= spec.magnitude;
        break;
      case FaultKind::kNoiseBurst:
        rec.voltage += gen.normal(0.0, spec.magnitude);
        break;
    }
    rec.label = 1;
  }
}

// --- windowing -----------------------------------------------------------------

std::size_t window_count(std::size_t stream_len, std::size_t window,
                         std::size_t stride) {
  if (window == 0 || stride == 0)
    throw std::invalid_argument("window and stride must be positive");
  if (stream_len < window) return 0;
  return (stream_len - window) / stride + 1;
}

std::vector<WindowedSample> make_windows(const VehicleStream& stream,
                                         std::size_t window,
                                         std::size_t stride) {
  const std::size_t n = window_count(stream.records.size(), window, stride);
  std::vector<WindowedSample> out;
  out.reserve(n);
  for (std::size_t w = 0; w < n; ++w) {
    const std::size_t start = w * stride;
    WindowedSample s;
    s.vehicle_id = stream.vehicle_id;
    s.start_timestamp = stream.records[start].timestamp;
    s.end_timestamp = stream.records[start + window - 1].timestamp;
    s.values = numerics::Matrix(window, kChannelCount);
    s.label = 0;
    for (std::size_t t = 0; t < window; ++t) {
      const Record& rec = stream.records[start + t];
      s.values(t, 0) = rec.voltage;
      s.values(t, 1) = rec.current;
      s.values(t, 2) = rec.soc;
      s.values(t, 3) = rec.temperature;
      if (rec.label != 0) s.label = 1;
    }
    s.mileage = stream.records[start + window - 1].mileage;
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<WindowedSample> make_windows(
    const std::vector<VehicleStream>& streams, std::size_t window,
    std::size_t stride) {
  std::vector<WindowedSample> out;
  for (const auto& stream : streams) {
    auto part = make_windows(stream, window, stride);
    out.insert(out.end(), std::make_move_iterator(part.begin()),
               std::make_move_iterator(part.end()));
  }
  return out;
}

// --- CSV -------------------------------------------------------------------------

namespace {

using textio::format_double;
using textio::parse_double;
using textio::split;

void write_record_row(std::string& out, const std::string& vehicle_id,
                      const Record& rec) {
  out += vehicle_id;
  out += ',';
  out += format_double(rec.timestamp);
  out += ',';
  out += format_double(rec.voltage);
  out += ',';
  out += format_double(rec.current);
  out += ',';
  out += format_double(rec.soc);
  out += ',';
  out += format_double(rec.temperature);
  out += ',';
  out += format_double(rec.mileage);
  out += '\n';
}

[[noreturn]] void bad_cell(std::size_t line_no, std::string_view token,
                           const char* column) {
  throw CsvError("line " + std::to_string(line_no) + ": value '" +
                 std::string(token) + "' in column '" + column +
                 "' is not numeric");
}

double parse_cell(std::string_view token, std::size_t line_no,
                  const char* column) {
  double v = 0.0;
  if (!parse_double(token, v)) bad_cell(line_no, token, column);
  return v;
}

void check_header(std::string_view got, std::string_view want,
                  const char* what) {
  if (got == want) return;
  // Point at the first missing expected column if there is one.
  const auto expected = split(want, ',');
  const auto actual = split(got, ',');
  for (const auto& col : expected) {
    if (std::find(actual.begin(), actual.end(), col) == actual.end())
      throw CsvError(std::string(what) + " header is missing column '" +
                     std::string(col) + "' (expected \"" + std::string(want) +
                     "\")");
  }
  throw CsvError(std::string(what) + " header mismatch: got \"" +
                 std::string(got) + "\", expected \"" + std::string(want) +
                 "\"");
}

// Strips one trailing \r (files written on other platforms).
std::string_view chomp(std::string_view line) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  return line;
}

}  // namespace

void write_telemetry_csv(std::ostream& out,
                         const std::vector<VehicleStream>& streams) {
  std::string buf(kTelemetryHeader);
  buf += '\n';
  for (const auto& stream : streams)
    for (const Record& rec : stream.records)
      write_record_row(buf, stream.vehicle_id, rec);
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
}

void write_labels_csv(std::ostream& out,
                      const std::vector<VehicleStream>& streams) {
  std::string buf(kLabelsHeader);
  buf += '\n';
  for (const auto& stream : streams)
    for (const Record& rec : stream.records) {
      buf += stream.vehicle_id;
      buf += ',';
      buf += format_double(rec.timestamp);
      buf += ',';
      buf += rec.label != 0 ? '1' : '0';
      buf += '\n';
    }
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
}

std::vector<VehicleStream> read_telemetry_csv(std::istream& in,
                                              std::ostream* warnings) {
  std::string line;
  if (!std::getline(in, line))
    throw CsvError("telemetry file is empty (missing header)");
  check_header(chomp(line), kTelemetryHeader, "telemetry");

  std::vector<VehicleStream> streams;
  std::map<std::string, std::size_t> index;  // vehicle_id -> slot

  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view row = chomp(line);
    if (row.empty()) continue;
    const auto cells = split(row, ',');
    if (cells.size() != 7)
      throw CsvError("line " + std::to_string(line_no) + ": expected 7 fields, got " +
                     std::to_string(cells.size()));

    Record rec;
    rec.timestamp = parse_cell(cells[1], line_no, "timestamp");
    rec.voltage = parse_cell(cells[2], line_no, "voltage");
    rec.current = parse_cell(cells[3], line_no, "current");
    rec.soc = parse_cell(cells[4], line_no, "soc");
    rec.temperature = parse_cell(cells[5], line_no, "temperature");
    rec.mileage = parse_cell(cells[6], line_no, "mileage");
    rec.label = 0;

    const std::string id(cells[0]);
    if (id.empty())
      throw CsvError("line " + std::to_string(line_no) + ": empty vehicle_id");
    auto [it, inserted] = index.emplace(id, streams.size());
    if (inserted) {
      VehicleStream s;
      s.vehicle_id = id;
      streams.push_back(std::move(s));
    }
    streams[it->second].records.push_back(rec);
  }

  for (auto& stream : streams) {
    std::stable_sort(stream.records.begin(), stream.records.end(),
                     [](const Record& a, const Record& b) {
                       return a.timestamp < b.timestamp;
                     });
    if (warnings != nullptr) {
      for (std::size_t i = 1; i < stream.records.size(); ++i) {
        if (stream.records[i].mileage < stream.records[i - 1].mileage) {
          *warnings << "warning: vehicle " << stream.vehicle_id
                    << " has non-monotone mileage at timestamp "
                    << format_double(stream.records[i].timestamp) << "\n";
          break;  // one warning per vehicle
        }
      }
    }
  }
  return streams;
}

void apply_labels_csv(std::istream& in, std::vector<VehicleStream>& streams) {
  std::string line;
  if (!std::getline(in, line))
    throw CsvError("labels file is empty (missing header)");
  check_header(chomp(line), kLabelsHeader, "labels");

  std::map<std::string, std::map<double, Record*>> lookup;
  for (auto& stream : streams) {
    auto& by_time = lookup[stream.vehicle_id];
    for (Record& rec : stream.records) by_time[rec.timestamp] = &rec;
  }

  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view row = chomp(line);
    if (row.empty()) continue;
    const auto cells = split(row, ',');
    if (cells.size() != 3)
      throw CsvError("line " + std::to_string(line_no) + ": expected 3 fields, got " +
                     std::to_string(cells.size()));
    const std::string id(cells[0]);
    const double ts = parse_cell(cells[1], line_no, "timestamp");
    double label = 0.0;
    if (!parse_double(cells[2], label) || (label != 0.0 && label != 1.0))
      throw CsvError("line " + std::to_string(line_no) + ": label must be 0 or 1, got '" +
                     std::string(cells[2]) + "'");

    auto vit = lookup.find(id);
    if (vit == lookup.end())
      throw CsvError("line " + std::to_string(line_no) + ": unknown vehicle '" + id +
                     "' in labels file");
    auto rit = vit->second.find(ts);
    if (rit == vit->second.end())
      throw CsvError("line " + std::to_string(line_no) + ": no telemetry record for vehicle '" +
                     id + "' at timestamp " + std::string(cells[1]));
    rit->second->label = label != 0.0 ? 1 : 0;
  }
}

void write_telemetry_file(const std::string& path,
                          const std::vector<VehicleStream>& streams) {
  std::ostringstream buf;
  write_telemetry_csv(buf, streams);
  textio::atomic_write_file(path, buf.str());
}

void write_labels_file(const std::string& path,
                       const std::vector<VehicleStream>& streams) {
  std::ostringstream buf;
  write_labels_csv(buf, streams);
  textio::atomic_write_file(path, buf.str());
}

std::vector<VehicleStream> read_telemetry_file(const std::string& path,
                                               std::ostream* warnings) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CsvError("cannot open telemetry file '" + path + "'");
  return read_telemetry_csv(in, warnings);
}

void apply_labels_file(const std::string& path,
                       std::vector<VehicleStream>& streams) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CsvError("cannot open labels file '" + path + "'");
  apply_labels_csv(in, streams);
}

}  // namespace voltwatch::data
