#pragma once

#include <iosfwd>
#include <optional>

#include <Eigen/Core>

#include "sdoa/dsp.hpp"
#include "sdoa/geometry.hpp"
#include "sdoa/snapshots.hpp"

namespace sdoa {

struct CovarianceMatrix {
    Eigen::MatrixXcd R;
    Eigen::Index snapshots = 0;
};

// R = (1/N) sum_n y[n] y[n]^H over the selected columns (all columns by default).
CovarianceMatrix sample_covariance(const ComplexSnapshots& y,
                                   std::optional<ColumnRange> columns = std::nullopt);

enum class RedundancyRule {
    Average,   // mean over every covariance entry mapping to the same offset
    KeepFirst, // first entry in vec(R) (column-major) order
};

// Virtual-array samples z1(m) = E[y_i y_j^*] for m = kappa_i - kappa_j inside the coherent segment,
// laid out row-major over the segment.
struct CoArrayObservation {
    Eigen::VectorXcd z1;
    CoherentSegment segment;

    cdouble at(int mx, int my) const { return z1(segment.index(mx, my)); }
};

CoArrayObservation coarray_observation(const CovarianceMatrix& r, const SensorSet& s,
                                       RedundancyRule rule = RedundancyRule::Average);

struct SmoothedCovariance {
    Eigen::MatrixXcd R;
    int wx = 1;
    int wy = 1;
    int subarrays = 1;
};

// Unit-step sliding Wx x Wy window over the segment; elements ordered row-major in the window.
SmoothedCovariance spatial_smoothing(const CoArrayObservation& z, int wx, int wy);

// Default window: (Mx + 1, My + 1).
SmoothedCovariance spatial_smoothing(const CoArrayObservation& z);

// Khatri-Rao product conj(A) (.) A; column m is conj(a_m) kron a_m, matching column-major vec(R).
Eigen::MatrixXcd effective_manifold(const Eigen::MatrixXcd& a);

// Row-major text dump: first line "rows cols", then one row per line of "re im" pairs.
void write_matrix(std::ostream& os, const Eigen::MatrixXcd& m);
Eigen::MatrixXcd read_matrix(std::istream& is);

} // namespace sdoa
