#pragma once

#include <complex>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "sdoa/snapshots.hpp"

namespace sdoa {

// Butterworth band-pass around `center` with pass band [center - B/2, center + B/2].
// `order` is the low-pass prototype order; the digital filter has 2*order poles.
struct FilterSpec {
    double center = 20000.0;
    double bandwidth = 200.0;
    int order = 10;

    void validate(double fs) const;
};

struct Biquad {
    double b0, b1, b2, a1, a2; // a0 == 1
};

class ButterworthBandpass {
public:
    ButterworthBandpass(const FilterSpec& spec, double fs);

    const std::vector<Biquad>& sections() const { return sections_; }
    std::complex<double> response(double f) const;
    // Causal filtering from zero initial state.
    void apply(std::span<const double> in, std::span<double> out) const;

private:
    std::vector<Biquad> sections_;
    double fs_;
};

RealSnapshots bandpass(const RealSnapshots& x, const FilterSpec& spec);

// Analytic signal x + j H{x} per channel, computed with a one-sided spectrum over the block.
ComplexSnapshots analytic(const RealSnapshots& x);

// Entries A e^{-j Psi}; either K x 1 (broadcast over samples) or K x N.
class CalibrationMatrix {
public:
    explicit CalibrationMatrix(Eigen::MatrixXcd c);

    static CalibrationMatrix identity(Eigen::Index channels);
    static CalibrationMatrix from_factors(std::span<const double> amplitude, std::span<const double> phase);
    // Log-normal amplitudes (standard deviation in dB) and Gaussian phases (rad), seeded.
    static CalibrationMatrix synthetic_miscalibration(Eigen::Index channels, double amplitude_sigma_db,
                                                      double phase_sigma_rad, std::uint64_t seed);

    const Eigen::MatrixXcd& values() const { return c_; }
    Eigen::Index channels() const { return c_.rows(); }
    bool broadcast() const { return c_.cols() == 1; }
    CalibrationMatrix inverse() const;

private:
    Eigen::MatrixXcd c_;
};

ComplexSnapshots apply_calibration(const CalibrationMatrix& c, const ComplexSnapshots& x);

// Text table, one "channel amplitude phase_rad" line per channel (broadcast matrices only).
void write_calibration(std::ostream& os, const CalibrationMatrix& c);
CalibrationMatrix read_calibration(std::istream& is);

template <typename Scalar>
std::vector<SnapshotBlock<Scalar>> chunk(const SnapshotBlock<Scalar>& x, Eigen::Index n)
{
    require(n >= 1, "chunk size must be at least one sample");
    std::vector<SnapshotBlock<Scalar>> out;
    for (Eigen::Index start = 0; start + n <= x.sample_count(); start += n)
        out.emplace_back(x.samples.middleCols(start, n), x.fs, x.channels);
    return out;
}

double spl(std::span<const double> x);

// Columns kept for covariance accumulation after analytic conversion: the first and last
// `edge_fraction` of the block are dropped.
struct ColumnRange {
    Eigen::Index start = 0;
    Eigen::Index count = 0;
};
ColumnRange interior_columns(Eigen::Index n, double edge_fraction = 0.01);

// Fixed preprocessing order: band-pass, analytic signal, calibration.
ComplexSnapshots process_chain(const RealSnapshots& x, const FilterSpec& spec,
                               const std::optional<CalibrationMatrix>& calibration = std::nullopt);

} // namespace sdoa
