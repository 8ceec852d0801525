#pragma once

#include <filesystem>

#include "phonopulse/synth.hpp"

namespace phonopulse {

// Binary trace container, little-endian:
//   offset  size  field
//   0       8     magic "PHPULSE\0"
//   8       4     u32 version (currently 1)
//   12      4     u32 reserved (0)
//   16      8     u64 n_reps
//   24      8     u64 n_samples
//   32      8     f64 dt (seconds)
//   40      8     u64 base_seed
//   48      8     u64 config_hash
//   56      ...   float32 samples, row-major (n_reps x n_samples), volts
// A human-readable sidecar (<path>.meta) carries the pulse settings and,
// for synthetic data, the ground truth.

/// Write container plus sidecar, atomically (temp + rename).
void write_traceset(const TraceSet& set, const std::filesystem::path& path);

/// Read a container; header problems throw FormatError naming the field.
TraceSet read_traceset(const std::filesystem::path& path);

}  // namespace phonopulse
