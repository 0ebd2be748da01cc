#pragma once

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "voltwatch/matrix.hpp"

namespace voltwatch::data {

// Malformed files, schema mismatches, unparseable values.
struct CsvError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Telemetry model: per-vehicle streams of fixed-rate samples over four sensor
// channels (voltage, current, state of charge, temperature) plus an odometer
// reading.  Labels mark records overwritten by an injected fault.
// ---------------------------------------------------------------------------

struct Record {
  double timestamp = 0;    // seconds since stream start
  double voltage = 0;      // pack voltage, V
  double current = 0;      // A, discharge positive
  double soc = 0;          // state of charge, %
  double temperature = 0;  // deg C
  double mileage = 0;      // odometer, km
  int label = 0;           // 0 normal, 1 fault
};

inline constexpr std::size_t kChannelCount = 4;
extern const char* const kChannelNames[kChannelCount];

struct VehicleStream {
  std::string vehicle_id;
  std::vector<Record> records;
};

// ---------------------------------------------------------------------------
// Synthetic fleet generator.
//
// Each vehicle alternates drive and charge phases.  Pack voltage follows
// open-circuit voltage (affine in SOC) minus the IR drop across an internal
// resistance that grows with mileage: R = R0 * (1 + gamma * m / m_span).
// That aging term is the physical signal the detector is meant to exploit.
// Every vehicle's stream is drawn from its own named substream, so it depends
// only on (seed, vehicle index) — never on fleet size or generation order.
// ---------------------------------------------------------------------------

struct FleetConfig {
  std::size_t vehicles = 8;
  std::size_t samples_per_vehicle = 4096;
  double sample_interval_s = 10.0;
  double base_voltage = 340.0;        // OCV extrapolated to 0% SOC
  double soc_voltage_slope = 0.6;     // V per % SOC
  double internal_resistance = 0.08;  // ohm when new
  double aging_gamma = 0.3;           // fractional R growth across mileage_span_km
  double mileage_span_km = 150000.0;  // fleet start-mileage spread / aging scale
  double battery_capacity_ah = 150.0;
  double drive_current_amp = 60.0;    // drive-cycle current amplitude, A
  double drive_period_s = 600.0;
  double charge_current = -45.0;      // A (negative = charging)
  double speed_kmh_per_amp = 0.9;
  double noise_voltage = 0.25;
  double noise_current = 1.5;
  double noise_soc = 0.05;
  double noise_temperature = 0.3;
};

std::vector<VehicleStream> generate_fleet(const FleetConfig& config,
                                          std::uint64_t seed);

// --- fault injection --------------------------------------------------------

enum class FaultKind : std::uint8_t {
  kStuckVoltage,  // voltage freezes at its onset value
  kOffsetDrop,    // constant offset subtracted from voltage
  kNoiseBurst,    // zero-mean noise of the given std added to voltage
};

FaultKind fault_kind_from_name(const std::string& name);
std::string fault_kind_name(FaultKind kind);

struct FaultSpec {
  FaultKind kind = FaultKind::kStuckVoltage;
  std::size_t onset = 0;     // sample index
  std::size_t duration = 0;  // samples
  double magnitude = 0.0;    // V (unused for kStuckVoltage)
};

// Overwrites the voltage channel over [onset, onset+duration) and sets the
// affected records' labels to 1.  Throws std::invalid_argument if the span
// leaves the stream or the magnitude is negative.
void inject_fault(VehicleStream& stream, const FaultSpec& spec,
                  std::uint64_t seed);

// --- windowing ---------------------------------------------------------------

// Fixed-length slice of one vehicle's stream; the unit every downstream
// module consumes.
struct WindowedSample {
  std::string vehicle_id;
  double start_timestamp = 0;
  double end_timestamp = 0;
  numerics::Matrix values;  // T x kChannelCount, row per step
  double mileage = 0;       // odometer at the window's last record
  int label = 0;            // 1 if any member record is faulted
};

// Number of windows of length `window` at the given stride:
// 0 if the stream is shorter than `window`, else (len - window) / stride + 1.
std::size_t window_count(std::size_t stream_len, std::size_t window,
                         std::size_t stride);

std::vector<WindowedSample> make_windows(const VehicleStream& stream,
                                         std::size_t window,
                                         std::size_t stride);
std::vector<WindowedSample> make_windows(
    const std::vector<VehicleStream>& streams, std::size_t window,
    std::size_t stride);

// --- CSV ---------------------------------------------------------------------
//
// Telemetry schema (header must match byte for byte):
//   vehicle_id,timestamp,voltage,current,soc,temperature,mileage
// Labels travel in a sidecar file so the telemetry schema stays fixed:
//   vehicle_id,timestamp,label
// Doubles are written in shortest round-trip form, so write -> read -> write
// reproduces files byte-identically.

extern const char* const kTelemetryHeader;
extern const char* const kLabelsHeader;

void write_telemetry_csv(std::ostream& out,
                         const std::vector<VehicleStream>& streams);
void write_labels_csv(std::ostream& out,
                      const std::vector<VehicleStream>& streams);

// Reads streams grouped by vehicle (order of first appearance), records
// sorted by timestamp.  Non-monotone mileage within a vehicle produces a
// warning on `warnings` (if given) but keeps the record.
std::vector<VehicleStream> read_telemetry_csv(std::istream& in,
                                              std::ostream* warnings = nullptr);

// Applies a labels sidecar to already-loaded streams (matching on
// vehicle_id + timestamp; unknown keys are errors).
void apply_labels_csv(std::istream& in, std::vector<VehicleStream>& streams);

// File variants.  Writers are atomic (temp file + rename).
void write_telemetry_file(const std::string& path,
                          const std::vector<VehicleStream>& streams);
void write_labels_file(const std::string& path,
                       const std::vector<VehicleStream>& streams);
std::vector<VehicleStream> read_telemetry_file(const std::string& path,
                                               std::ostream* warnings = nullptr);
void apply_labels_file(const std::string& path,
                       std::vector<VehicleStream>& streams);

}  // namespace voltwatch::data
