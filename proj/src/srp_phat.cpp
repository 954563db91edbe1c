#include "sdoa/estimators.hpp"

#include <cmath>
#include <numbers>

#include "sdoa/error.hpp"
#include "sdoa/fft.hpp"
#include "sdoa/log.hpp"
#include "refine.hpp"

namespace sdoa {

namespace {
constexpr double kPi = std::numbers::pi;
constexpr double kDeg = kPi / 180.0;
} // namespace

SrpResult srp_phat(const RealSnapshots& x, const SrpOptions& opt)
{
    const Eigen::Index k = x.channel_count();
    require(k >= 2, "srp_phat needs at least two channels");
    const Eigen::Index n = opt.frame > 0 ? std::min(opt.frame, x.sample_count()) : x.sample_count();
    require(n >= 2, "srp_phat needs at least two samples per frame");
    const Eigen::Index frames = x.sample_count() / n;
    const double f_hi = opt.f_hi > 0.0 ? opt.f_hi : x.fs / 2.0;
    require(opt.f_lo >= 0.0 && opt.f_lo < f_hi, "srp_phat: empty analysis band");

    std::vector<Eigen::Index> bins;
    for (Eigen::Index b = 1; 2 * b < n; ++b) {
        const double f = static_cast<double>(b) * x.fs / static_cast<double>(n);
        if (f >= opt.f_lo && f <= f_hi)
            bins.push_back(b);
    }
    require(!bins.empty(), "srp_phat: no FFT bins inside the analysis band");

    std::vector<double> window(static_cast<std::size_t>(n), 1.0);
    if (frames > 1 || opt.frame > 0)
        for (Eigen::Index i = 0; i < n; ++i)
            window[static_cast<std::size_t>(i)] = 0.5 - 0.5 * std::cos(2.0 * kPi * static_cast<double>(i) / n);

    // PHAT-whitened spectra: per bin a K x frames block.
    std::vector<Eigen::MatrixXcd> w(bins.size(), Eigen::MatrixXcd(k, frames));
    std::vector<cdouble> buf(static_cast<std::size_t>(n));
    for (Eigen::Index fr = 0; fr < frames; ++fr)
        for (Eigen::Index c = 0; c < k; ++c) {
            for (Eigen::Index i = 0; i < n; ++i)
                buf[static_cast<std::size_t>(i)] = x.samples(c, fr * n + i) * window[static_cast<std::size_t>(i)];
            fft_inplace(buf);
            for (std::size_t b = 0; b < bins.size(); ++b) {
                const cdouble v = buf[static_cast<std::size_t>(bins[b])];
                const double mag = std::abs(v);
                w[b](c, fr) = mag > 1e-300 ? v / mag : cdouble(0.0);
            }
        }

    const auto& pos = x.channels.positions();
    const double d = x.channels.grid().spacing;
    int ext_x = 1;
    int ext_y = 1;
    for (const auto& p : pos) {
        ext_x = std::max(ext_x, p.ix + 1);
        ext_y = std::max(ext_y, p.iy + 1);
    }
    std::vector<cdouble> ex(static_cast<std::size_t>(ext_x));
    std::vector<cdouble> ey(static_cast<std::size_t>(ext_y));
    Eigen::RowVectorXcd steer(k);
    const auto powers = [](std::vector<cdouble>& v, double phase) {
        const cdouble step = std::polar(1.0, phase);
        cdouble p = 1.0;
        for (auto& e : v) {
            e = p;
            p *= step;
        }
    };
    const auto power = [&](double ux, double uy) {
        double acc = 0.0;
        for (std::size_t b = 0; b < bins.size(); ++b) {
            const double f = static_cast<double>(bins[b]) * x.fs / static_cast<double>(n);
            // Undo the channel lead exp(+j 2 pi f tau_k).
            const double phase = -2.0 * kPi * f * d / opt.c;
            powers(ex, phase * ux);
            powers(ey, phase * uy);
            for (Eigen::Index c = 0; c < k; ++c) {
                const auto& p = pos[static_cast<std::size_t>(c)];
                steer(c) = ex[static_cast<std::size_t>(p.ix)] * ey[static_cast<std::size_t>(p.iy)];
            }
            acc += (steer * w[b]).squaredNorm();
        }
        return acc;
    };

    const AngularGrid& grid = opt.grid;
    Pseudospectrum ps{grid, Eigen::MatrixXd(grid.el_count(), grid.az_count()),
                      Pseudospectrum::Scale::Linear, "srp-phat"};
    for (int j = 0; j < grid.el_count(); ++j) {
        const double st = std::sin(grid.elevation(j) * kDeg);
        for (int i = 0; i < grid.az_count(); ++i)
            ps.values(j, i) = power(st * std::cos(grid.azimuth(i) * kDeg), st * std::sin(grid.azimuth(i) * kDeg));
    }
    const GridPeak best = ps.argmax();
    Direction dir = best.direction;
    if (opt.refine) {
        const Eigen::Vector3d u = unit_vector(dir);
        const auto [ux, uy] = detail::refine_minimum([&](double a, double b) { return -power(a, b); }, u.x(),
                                                     u.y(), 0.5 * grid.el_step() * kDeg);
        dir = direction_from_cosines(ux, uy);
    }
    return {std::move(ps), dir};
}

Pseudospectrum das_beampattern(const SensorSet& s, const Direction& steer, double f, double c,
                               const AngularGrid& grid, int norm_count)
{
    require(norm_count >= static_cast<int>(s.size()), "das_beampattern: norm_count below sensor count");
    steer.validate();
    require(f > 0.0 && c > 0.0, "das_beampattern: frequency and c must be positive");
    if (f > max_frequency(s.grid().spacing, c) * (1.0 + 1e-12))
        warn("das_beampattern: frequency above the spatial Nyquist limit");
    const ArrayManifold array = ArrayManifold::physical(s);
    const Eigen::Vector3d us = unit_vector(steer);
    const Eigen::VectorXcd as = array.steering(us.x(), us.y(), f, c);
    Pseudospectrum ps{grid, Eigen::MatrixXd(grid.el_count(), grid.az_count()),
                      Pseudospectrum::Scale::Decibel, "das"};
    for (int j = 0; j < grid.el_count(); ++j)
        for (int i = 0; i < grid.az_count(); ++i) {
            const Eigen::Vector3d u = unit_vector(grid.node(i, j));
            const double mag = std::abs(as.dot(array.steering(u.x(), u.y(), f, c))) / norm_count;
            ps.values(j, i) = 20.0 * std::log10(std::max(mag, 1e-15));
        }
    return ps;
}

} // namespace sdoa
