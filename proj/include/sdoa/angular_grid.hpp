#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "sdoa/wavefield.hpp"

namespace sdoa {

// Regular (azimuth, elevation) grid covering [0, 360) x [0, 90]. Node (i, j) sits at azimuth
// i * az_step and elevation j * el_step; the j == 0 row is the single broadside point.
class AngularGrid {
public:
    explicit AngularGrid(double az_step = 1.0, double el_step = 1.0);
    static AngularGrid with_counts(int az_count, int el_count);

    int az_count() const { return az_count_; }
    int el_count() const { return el_count_; }
    double az_step() const { return 360.0 / az_count_; }
    double el_step() const { return 90.0 / (el_count_ - 1); }
    double azimuth(int i) const { return i * az_step(); }
    double elevation(int j) const { return j * el_step(); }
    Direction node(int i, int j) const { return {azimuth(i), elevation(j)}; }
    std::size_t size() const { return static_cast<std::size_t>(az_count_) * el_count_; }

private:
    AngularGrid(int az_count, int el_count, bool);
    int az_count_;
    int el_count_;
};

struct GridPeak {
    Direction direction;
    double value = 0.0;
    int az_index = 0;
    int el_index = 0;
};

// Values indexed (elevation row j, azimuth column i).
struct Pseudospectrum {
    enum class Scale { Linear, Decibel };

    AngularGrid grid;
    Eigen::MatrixXd values;
    Scale scale = Scale::Linear;
    std::string tag;

    double at(int i, int j) const { return values(j, i); }
    GridPeak argmax() const;
};

// Grid local maxima (8-neighbourhood, azimuth wraps, the broadside row is one node), strongest
// first, with non-maximum suppression by spherical distance. `excluded` (same shape as values,
// non-zero = skip) removes nodes from consideration as candidates.
std::vector<GridPeak> find_peaks(const Pseudospectrum& p, std::size_t max_count,
                                 double min_separation_deg,
                                 const Eigen::MatrixXi* excluded = nullptr);

// "azimuth elevation value" rows (dB when the spectrum is linear: 10 log10 of the value).
void write_pseudospectrum(std::ostream& os, const Pseudospectrum& p);

} // namespace sdoa
