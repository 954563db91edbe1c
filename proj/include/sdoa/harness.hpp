#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "sdoa/angular_grid.hpp"
#include "sdoa/covariance.hpp"
#include "sdoa/dsp.hpp"
#include "sdoa/estimators.hpp"
#include "sdoa/geometry.hpp"
#include "sdoa/metrics.hpp"
#include "sdoa/wavefield.hpp"

namespace sdoa {

struct SourceConfig {
    bool random_direction = false; // drawn per trial, area-uniform over the allowed cap
    Direction direction;
    double frequency = 20000.0;
    double level_db = 60.0;
    Waveform waveform;
};

enum class EstimatorKind { Music, Esprit, SrpPhat };
// Baseband: complex array snapshots y = A s + n drawn directly (stochastic source model).
// Passband: real microphone signals through band-pass, analytic conversion and calibration.
enum class ChainMode { Baseband, Passband };

struct EstimatorConfig {
    EstimatorKind kind = EstimatorKind::Music;
    int sources = 0; // 0: number of configured sources
    double az_step = 1.0;
    double el_step = 1.0;
    InvarianceSolver solver = InvarianceSolver::TotalLeastSquares;
    double min_separation = 5.0;
    double min_peak_ratio = 10.0;
    bool refine = true;
};

struct SmoothingConfig {
    bool enabled = false;
    int wx = 0; // 0: Mx + 1
    int wy = 0;
    RedundancyRule redundancy = RedundancyRule::Average;
};

struct NoiseConfig {
    NoiseSpec::Mode mode = NoiseSpec::Mode::None;
    std::vector<double> values; // one sweep cell per value
    double in_band_hz = 0.0;
};

struct ScenarioConfig {
    std::string id = "scenario";
    std::vector<GeometryKind> geometries{{GeometryFamily::URA}};
    GridSpec grid{8.255e-3, 8, 8};
    double c = kSpeedOfSound;
    double fs = kDefaultSampleRate;
    std::size_t samples = 1000;
    std::size_t chunk = 0; // recordings: estimate per chunk of this many samples (0: whole file)
    ChainMode chain = ChainMode::Baseband;
    double settle_s = 0.02; // passband: leading filter transient dropped before the covariance
    FilterSpec filter;
    std::vector<SourceConfig> sources;
    double truth_max_elevation = 90.0;
    double truth_min_separation = 0.0;
    NoiseConfig noise;
    EstimatorConfig estimator;
    SmoothingConfig smoothing;
    std::optional<double> summary_max_elevation;
    std::uint64_t seed = 1;
    int trials = 1;
    int threads = 1;

    int source_count() const { return estimator.sources > 0 ? estimator.sources : static_cast<int>(sources.size()); }
    std::size_t cell_count() const { return noise.values.empty() ? 1 : noise.values.size(); }
    // Validates every parameter against the module preconditions; throws ConfigError.
    void validate() const;
};

ScenarioConfig parse_config(std::string_view json_text);
ScenarioConfig load_config(const std::filesystem::path& path);
std::string serialize_config(const ScenarioConfig& cfg);

// Optimal assignment (Hungarian method). cost is rows x cols with rows <= cols; returns the
// column chosen for each row.
std::vector<int> hungarian(const Eigen::MatrixXd& cost);

struct TrialRecord {
    std::size_t cell = 0;
    std::string geometry;
    int trial = 0;
    std::uint64_t seed = 0;
    std::vector<Direction> truths;
    std::vector<Direction> estimates; // matched to truths, same order
    std::vector<double> errors;
    std::string status = "ok";
    double error() const; // mean over sources
};

struct CellSummary {
    std::size_t cell = 0;
    std::string geometry;
    std::optional<double> noise_db;
    std::size_t trials = 0;
    std::size_t failures = 0;
    std::optional<ErrorSummary> summary;
};

struct ResultRecord {
    std::string scenario;
    std::vector<TrialRecord> trials;   // ordered by (cell, geometry, trial)
    std::vector<CellSummary> cells;    // ordered by (cell, geometry)
    double wall_seconds = 0.0;
};

// One trial's processed observation for one geometry.
struct Observation {
    SensorSet sensors;
    CovarianceMatrix covariance;
    std::optional<RealSnapshots> passband; // filtered real data (SRP-PHAT)
};

// Runs the configured estimator on one observation.
std::vector<Direction> estimate_directions(const ScenarioConfig& cfg, const Observation& obs,
                                           Pseudospectrum* spectrum = nullptr);

ResultRecord run_montecarlo(const ScenarioConfig& cfg);

// Deterministic text forms (no timing).
void write_trials_csv(std::ostream& os, const ResultRecord& r);
void write_summary_csv(std::ostream& os, const ResultRecord& r, const ScenarioConfig& cfg);
// trials.csv, summary.csv and manifest.json (config hash, seed, versions, wall time).
void write_results(const std::filesystem::path& dir, const ResultRecord& r, const ScenarioConfig& cfg);

struct BeamSuiteOptions {
    AngularGrid grid = AngularGrid::with_counts(360, 200);
    double frequency = 20000.0;
    double c = kSpeedOfSound;
    GridSpec array{8.255e-3, 8, 8};
    std::uint64_t random_seed = 1;
    int norm_count = 64;
};

struct BeamRow {
    GeometryKind kind;
    std::size_t sensors = 0;
    BeamMetrics metrics;
};

std::vector<BeamRow> run_beampattern_suite(const BeamSuiteOptions& opt);
void write_beam_table(std::ostream& os, const std::vector<BeamRow>& rows);

struct TagError {
    std::size_t tag = 0;
    Direction truth;
    Direction estimate;
    double error = 0.0;
};

struct DemoResult {
    Pseudospectrum spectrum;
    std::vector<TagError> tags;
    std::uint64_t seed = 0;
};

// Three Hadamard-coded tags on the Nested selection, SNR mode, passband chain, MUSIC.
ScenarioConfig default_demo_config();
DemoResult run_multisource_demo(const ScenarioConfig& cfg, int trial = 0);

// Simulated observation of trial `trial` in sweep cell `cell`, for every configured geometry.
struct TrialScene {
    std::vector<Direction> truths;
    std::uint64_t seed = 0;
    std::vector<Observation> observations; // one per cfg.geometries entry
    std::optional<RealSnapshots> recording; // passband chain: raw full-grid microphone signals
};
TrialScene simulate_trial(const ScenarioConfig& cfg, std::size_t cell, int trial);

// Covariance (and raw channel data) from a recording for the sensors of `s`. The calibration,
// if any, covers the recording's channels and is applied before masking.
Observation observe_recording(const ScenarioConfig& cfg, const RealSnapshots& x, const SensorSet& s,
                              const std::optional<CalibrationMatrix>& calibration = std::nullopt);

} // namespace sdoa
