#pragma once

#include <vector>

#include <Eigen/Core>

#include "sdoa/angular_grid.hpp"
#include "sdoa/covariance.hpp"
#include "sdoa/geometry.hpp"
#include "sdoa/snapshots.hpp"
#include "sdoa/wavefield.hpp"

namespace sdoa {

struct EigenPair {
    Eigen::VectorXd values;   // ascending
    Eigen::MatrixXcd vectors; // columns, orthonormal
};

EigenPair eig_hermitian(const Eigen::MatrixXcd& r, double tolerance = 1e-9);

// Integer element positions (grid units) plus pitch; either the physical sensors or a
// virtual Wx x Wy URA laid out row-major like a smoothed covariance.
class ArrayManifold {
public:
    static ArrayManifold physical(const SensorSet& s);
    static ArrayManifold virtual_ura(int wx, int wy, double spacing);

    const std::vector<GridPos>& positions() const { return pos_; }
    double spacing() const { return spacing_; }
    Eigen::Index size() const { return static_cast<Eigen::Index>(pos_.size()); }
    int extent_x() const { return nx_; }
    int extent_y() const { return ny_; }
    // Steering for in-plane direction cosines (ux, uy).
    Eigen::VectorXcd steering(double ux, double uy, double f, double c) const;

private:
    ArrayManifold(std::vector<GridPos> p, double spacing);
    std::vector<GridPos> pos_;
    double spacing_;
    int nx_ = 1;
    int ny_ = 1;
};

struct MusicOptions {
    int sources = 1;
    AngularGrid grid{};
    double frequency = 20000.0;
    double c = kSpeedOfSound;
    double min_separation_deg = 5.0;
    // A peak counts only if it exceeds this multiple of the spectrum median (0 disables).
    double min_peak_ratio = 10.0;
    bool refine = true;
};

struct MusicResult {
    Pseudospectrum spectrum;
    std::vector<Direction> directions; // strongest peak first
};

MusicResult music(const Eigen::MatrixXcd& r, const ArrayManifold& array, const MusicOptions& opt);
MusicResult music(const CovarianceMatrix& r, const SensorSet& s, const MusicOptions& opt);
MusicResult music(const SmoothedCovariance& r, double spacing, const MusicOptions& opt);

enum class InvarianceSolver { LeastSquares, TotalLeastSquares };

struct EspritOptions {
    int sources = 1;
    double frequency = 20000.0;
    double c = kSpeedOfSound;
    double spacing = 8.255e-3;
    InvarianceSolver solver = InvarianceSolver::TotalLeastSquares;
};

// Left Pi-real unitary matrix of size n (sparse structure, 1/sqrt(2) scaling).
Eigen::MatrixXcd unitary_q(int n);
// Q^H R Q for a Wx x Wy row-major virtual URA; real for centro-Hermitian R.
Eigen::MatrixXcd unitary_transform(const Eigen::MatrixXcd& r, int wx, int wy);

std::vector<Direction> unitary_esprit_2d(const Eigen::MatrixXcd& r, int wx, int wy,
                                         const EspritOptions& opt);
std::vector<Direction> unitary_esprit_2d(const SmoothedCovariance& r, const EspritOptions& opt);

struct SrpOptions {
    AngularGrid grid{};
    double c = kSpeedOfSound;
    double f_lo = 0.0; // analysed band; f_hi <= 0 means fs / 2
    double f_hi = 0.0;
    // Hann-windowed, non-overlapping frames whose steered powers are summed (0: one frame).
    Eigen::Index frame = 1024;
    bool refine = true;
};

struct SrpResult {
    Pseudospectrum spectrum;
    Direction direction;
};

// Steered response power with PHAT weighting; per frame the value equals the sum over all
// ordered channel pairs (including i == j) of the GCC-PHAT at the pair delay.
SrpResult srp_phat(const RealSnapshots& x, const SrpOptions& opt);

Pseudospectrum das_beampattern(const SensorSet& s, const Direction& steer, double f, double c,
                               const AngularGrid& grid, int norm_count = 64);

} // namespace sdoa
