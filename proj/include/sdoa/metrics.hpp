#pragma once

#include <optional>
#include <span>
#include <vector>

#include "sdoa/wavefield.hpp"

namespace sdoa {

struct Pseudospectrum;

// Great-circle angle between the two unit vectors, degrees in [0, 180].
double spherical_error(const Direction& est, const Direction& truth);

struct CutWidth {
    double azimuth;    // cut orientation (deg); the cut continues through the peak at azimuth + 180
    double full_width; // deg
};

struct BeamMetrics {
    Direction peak;
    double mlm = 0.0; // dB
    double mlw = 0.0; // deg, narrowest -3 dB full width over the cuts through the peak
    std::optional<double> mslr; // dB
    std::optional<double> msls; // deg
    std::optional<Direction> sidelobe;
    std::vector<CutWidth> cuts;
};

// `p` must be in dB and cover the hemisphere. A cut's half-width on each side is the angular
// distance from the peak to the first grid sample below peak - 3 dB.
BeamMetrics beam_metrics(const Pseudospectrum& p);

struct ErrorSummary {
    std::vector<double> errors; // kept poses, input order
    double mean = 0.0;
    double p50 = 0.0;
    double p95 = 0.0;
    std::size_t excluded = 0;
};

// Linear interpolation between order statistics (type 7); q in [0, 1].
double percentile(std::span<const double> values, double q);

ErrorSummary error_summary(std::span<const double> errors, std::span<const Direction> truths = {},
                           std::optional<double> max_elevation = std::nullopt);

// Solid angle of the cone elevation <= theta_max, normalised by the hemisphere.
double fov_fraction(double theta_max_deg);

} // namespace sdoa
