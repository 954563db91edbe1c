#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "sdoa/geometry.hpp"
#include "sdoa/snapshots.hpp"

namespace sdoa {

inline constexpr double kSpeedOfSound = 343.2;  // m/s
inline constexpr double kDefaultSampleRate = 48000.0;
inline constexpr double kReferencePressure = 20e-6; // Pa

// Azimuth in [0, 360), elevation in [0, 90] degrees; elevation 0 is array broadside.
struct Direction {
    double azimuth = 0.0;
    double elevation = 0.0;

    void validate() const;
    bool operator==(const Direction&) const = default;
};

// Folds any (azimuth, elevation) into the canonical ranges. Elevations below the array
// plane are mirrored, which a planar array cannot distinguish anyway.
Direction normalized(double azimuth_deg, double elevation_deg);

// Direction from the in-plane direction cosines (ux, uy); |u| is clamped to 1.
Direction direction_from_cosines(double ux, double uy);

Eigen::Vector3d unit_vector(const Direction& dir);

double max_frequency(double spacing, double c = kSpeedOfSound);

// a_k = exp(+j 2 pi f/c <r_k, u(dir)>). The same sign is used by synthesis and all estimators.
Eigen::VectorXcd steering_vector(const SensorSet& s, const Direction& dir, double f,
                                 double c = kSpeedOfSound);
Eigen::MatrixXcd steering_matrix(const SensorSet& s, std::span<const Direction> dirs, double f,
                                 double c = kSpeedOfSound);

// Sylvester-ordered +/-1 Hadamard matrix.
Eigen::MatrixXi hadamard_codes(int order);

// A real waveform that is a finite sum of cosines, so it can be evaluated exactly at any
// (fractionally delayed) time instant.
class PeriodicWaveform {
public:
    struct Harmonic {
        double frequency; // Hz
        double amplitude;
        double phase;     // rad
    };

    PeriodicWaveform() = default;
    explicit PeriodicWaveform(std::vector<Harmonic> h) : harmonics_(std::move(h)) {}

    static PeriodicWaveform tone(double frequency, double rms = 1.0, double phase = 0.0);
    // +/-1 code at chip rate `chip_rate`, root-raised-cosine shaped (roll-off `rolloff`),
    // cyclically repeated, mixed onto `carrier`, unit RMS.
    static PeriodicWaveform coded(std::span<const int> code, double chip_rate, double carrier,
                                  double rolloff = 0.5);

    double operator()(double t) const;
    double rms() const;
    double max_frequency() const;
    const std::vector<Harmonic>& harmonics() const { return harmonics_; }
    PeriodicWaveform scaled(double gain) const;

private:
    std::vector<Harmonic> harmonics_;
};

// Samples the coded waveform at fs for `samples` samples (t = n / fs).
std::vector<double> bandlimit_and_mix(std::span<const int> code, double chip_rate, double carrier,
                                      double fs, std::size_t samples);

struct Waveform {
    enum class Kind { Tone, Hadamard };
    Kind kind = Kind::Tone;
    int code_order = 8; // Hadamard only
    int code_row = 1;
    double bandwidth = 200.0; // chip rate B, Hz
};

struct NarrowbandSource {
    Direction direction;
    double frequency = 20000.0; // tone frequency or carrier, Hz
    double level_db = 60.0;     // dB SPL at the array (or relative level in SNR mode)
    Waveform waveform;
    double phase = 0.0;         // initial phase of tones, rad
};

struct NoiseSpec {
    enum class Mode { None, Snr, Spl };
    Mode mode = Mode::None;
    double value_db = 0.0;
    // SNR mode: the white noise variance is chosen so that the noise power falling into a
    // band of `in_band_hz` equals (loudest source power) / 10^(snr/10). Zero means the whole
    // band [0, fs/2]. SPL mode: broadband noise RMS at `value_db` dB SPL.
    double in_band_hz = 0.0;
};

struct SceneSpec {
    std::vector<NarrowbandSource> sources;
    double fs = kDefaultSampleRate;
    std::size_t samples = 0;
    NoiseSpec noise;
    std::uint64_t seed = 0;
    double c = kSpeedOfSound;
};

PeriodicWaveform source_waveform(const NarrowbandSource& src);

RealSnapshots synthesize_scene(const SceneSpec& scene, const SensorSet& s);

} // namespace sdoa
