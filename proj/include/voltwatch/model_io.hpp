#pragma once

#include <iosfwd>
#include <stdexcept>
#include <string>

#include "voltwatch/training.hpp"

namespace voltwatch::model_io {

// Corrupt, truncated, or incompatible model files.
struct ModelFileError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Binary model container ("VWMB"): config, normalization statistics, feature
// spec, threshold (with the sorted training scores), loss history, and every
// parameter tensor.  Doubles are stored as little-endian IEEE bit patterns,
// so save -> load -> save round-trips bit-exactly.

void save_model(std::ostream& out, const training::TrainedModel& model);
training::TrainedModel load_model(std::istream& in);

// File variants; the writer is atomic (temp file + rename).
void save_model_file(const std::string& path,
                     const training::TrainedModel& model);
training::TrainedModel load_model_file(const std::string& path);

}  // namespace voltwatch::model_io
