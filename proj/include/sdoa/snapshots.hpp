#pragma once

#include <algorithm>
#include <complex>
#include <string>

#include <Eigen/Core>

#include "sdoa/error.hpp"
#include "sdoa/geometry.hpp"

namespace sdoa {

using cdouble = std::complex<double>;

// K channels x N samples, one row per sensor of `channels` in row-major grid order.
template <typename Scalar>
struct SnapshotBlock {
    using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

    Matrix samples;
    double fs = 48000.0;
    SensorSet channels;

    SnapshotBlock(Matrix s, double sample_rate, SensorSet map)
        : samples(std::move(s)), fs(sample_rate), channels(std::move(map))
    {
        require(fs > 0.0, "sample rate must be positive");
        require(samples.rows() == static_cast<Eigen::Index>(channels.size()),
                "snapshot rows must match the channel map");
    }

    Eigen::Index channel_count() const { return samples.rows(); }
    Eigen::Index sample_count() const { return samples.cols(); }
};

using RealSnapshots = SnapshotBlock<double>;
using ComplexSnapshots = SnapshotBlock<cdouble>;

// Restrict data to the sensors of `s`. Full-grid input uses channel = iy*nx + ix; an already
// masked block may be masked again by any subset of its channels.
template <typename Scalar>
SnapshotBlock<Scalar> mask_channels(const SnapshotBlock<Scalar>& data, const SensorSet& s)
{
    require(data.channels.grid() == s.grid(), "mask grid differs from the data grid");
    if (data.channel_count() < static_cast<Eigen::Index>(s.size()))
        throw PreconditionError("mask_channels: data has " + std::to_string(data.channel_count()) +
                                " channels, mask selects " + std::to_string(s.size()));
    const auto& have = data.channels.positions();
    typename SnapshotBlock<Scalar>::Matrix out(static_cast<Eigen::Index>(s.size()), data.sample_count());
    Eigen::Index row = 0;
    auto it = have.begin();
    for (const auto& p : s.positions()) {
        it = std::lower_bound(it, have.end(), p);
        if (it == have.end() || *it != p)
            throw PreconditionError("mask_channels: sensor (" + std::to_string(p.ix) + "," +
                                    std::to_string(p.iy) + ") is not a channel of the data");
        out.row(row++) = data.samples.row(it - have.begin());
    }
    return SnapshotBlock<Scalar>(std::move(out), data.fs, s);
}

} // namespace sdoa
