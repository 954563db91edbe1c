#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>

#include <Eigen/Core>

#include "sdoa/geometry.hpp"
#include "sdoa/snapshots.hpp"

namespace sdoa {

// Raw layout: 32-byte header ("SDOARAW1", u32 channels, u32 sample format (1 = float32),
// f64 fs, u64 frames), then frames x channels interleaved float32, all little-endian.
inline constexpr char kRawMagic[8] = {'S', 'D', 'O', 'A', 'R', 'A', 'W', '1'};
inline constexpr std::uint32_t kRawFloat32 = 1;

struct RawRecording {
    Eigen::MatrixXd samples; // channels x frames
    double fs = 0.0;
};

void write_raw_recording(const std::filesystem::path& path, const Eigen::MatrixXd& samples, double fs);
// 32-bit IEEE-float WAV (WAVE_FORMAT_EXTENSIBLE when more than two channels).
void write_wav(const std::filesystem::path& path, const Eigen::MatrixXd& samples, double fs);

// Detects the container from the first bytes; WAV may be IEEE float32 or 16/24/32-bit PCM.
RawRecording read_recording(const std::filesystem::path& path);

// Loads a recording and attaches `map`. A file with one channel per grid cell is masked down to
// `map` (or kept whole with `keep_full_grid`, e.g. to calibrate before masking); otherwise the
// channel count must equal |map|. A given `fs` must match the file.
RealSnapshots ingest_recording(const std::filesystem::path& path, const SensorSet& map,
                               std::optional<double> fs = std::nullopt, bool keep_full_grid = false);

} // namespace sdoa
