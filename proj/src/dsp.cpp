#include "sdoa/dsp.hpp"

#include <cmath>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>
#include <string>

#include "sdoa/error.hpp"
#include "sdoa/fft.hpp"
#include "sdoa/random.hpp"

namespace sdoa {

namespace {
constexpr double kPi = std::numbers::pi;
using cd = std::complex<double>;
} // namespace

void FilterSpec::validate(double fs) const
{
    require(fs > 0.0, "sample rate must be positive");
    require(order >= 1, "filter order must be at least 1");
    require(bandwidth > 0.0, "filter bandwidth must be positive");
    require(center - bandwidth / 2.0 > 0.0, "filter pass band must start above 0 Hz");
    require(center + bandwidth / 2.0 < fs / 2.0, "filter pass band must end below fs/2");
}

ButterworthBandpass::ButterworthBandpass(const FilterSpec& spec, double fs) : fs_(fs)
{
    spec.validate(fs);
    const double k2 = 2.0 * fs;
    const double w1 = k2 * std::tan(kPi * (spec.center - spec.bandwidth / 2.0) / fs);
    const double w2 = k2 * std::tan(kPi * (spec.center + spec.bandwidth / 2.0) / fs);
    const double w0sq = w1 * w2;
    const double bw = w2 - w1;

    std::vector<cd> poles; // z-plane, one per conjugate pair
    const int n = spec.order;
    for (int k = 0; k < n; ++k) {
        const cd p = std::polar(1.0, kPi * (2.0 * k + n + 1) / (2.0 * n));
        if (p.imag() < -1e-12)
            continue; // its conjugate partner yields the same sections
        // s^2 - p bw s + w0^2 = 0
        const cd disc = std::sqrt(p * p * bw * bw - 4.0 * w0sq);
        cd s1 = 0.5 * (p * bw + disc);
        cd s2 = 0.5 * (p * bw - disc);
        const auto to_z = [&](cd s) { return (k2 + s) / (k2 - s); };
        if (std::abs(p.imag()) <= 1e-12) {
            // Real prototype pole: the two band-pass poles are already a conjugate pair.
            poles.push_back(to_z(s1.imag() >= 0.0 ? s1 : s2));
        } else {
            poles.push_back(to_z(s1));
            poles.push_back(to_z(s2));
        }
    }

    const double w0 = 2.0 * std::atan(std::sqrt(w0sq) / k2); // digital center, rad/sample
    const cd z0 = std::polar(1.0, w0);
    for (const cd& zp : poles) {
        Biquad q{1.0, 0.0, -1.0, -2.0 * zp.real(), std::norm(zp)};
        const cd num = q.b0 + q.b1 / z0 + q.b2 / (z0 * z0);
        const cd den = 1.0 + q.a1 / z0 + q.a2 / (z0 * z0);
        const double g = std::abs(num / den);
        q.b0 /= g;
        q.b1 /= g;
        q.b2 /= g;
        sections_.push_back(q);
    }
}

cd ButterworthBandpass::response(double f) const
{
    const cd z = std::polar(1.0, 2.0 * kPi * f / fs_);
    cd h = 1.0;
    for (const auto& q : sections_)
        h *= (q.b0 + q.b1 / z + q.b2 / (z * z)) / (1.0 + q.a1 / z + q.a2 / (z * z));
    return h;
}

void ButterworthBandpass::apply(std::span<const double> in, std::span<double> out) const
{
    require(in.size() == out.size(), "filter input and output lengths differ");
    std::copy(in.begin(), in.end(), out.begin());
    for (const auto& q : sections_) {
        double s1 = 0.0;
        double s2 = 0.0;
        for (double& v : out) {
            const double x = v;
            const double y = q.b0 * x + s1;
            s1 = q.b1 * x - q.a1 * y + s2;
            s2 = q.b2 * x - q.a2 * y;
            v = y;
        }
    }
}

RealSnapshots bandpass(const RealSnapshots& x, const FilterSpec& spec)
{
    const ButterworthBandpass filter(spec, x.fs);
    const Eigen::Index n = x.sample_count();
    Eigen::MatrixXd y(x.channel_count(), n);
    std::vector<double> in(static_cast<std::size_t>(n));
    std::vector<double> out(static_cast<std::size_t>(n));
    for (Eigen::Index k = 0; k < x.channel_count(); ++k) {
        for (Eigen::Index i = 0; i < n; ++i)
            in[static_cast<std::size_t>(i)] = x.samples(k, i);
        filter.apply(in, out);
        for (Eigen::Index i = 0; i < n; ++i)
            y(k, i) = out[static_cast<std::size_t>(i)];
    }
    return RealSnapshots(std::move(y), x.fs, x.channels);
}

ComplexSnapshots analytic(const RealSnapshots& x)
{
    const Eigen::Index n = x.sample_count();
    require(n >= 16, "analytic signal needs at least 16 samples");
    Eigen::MatrixXcd y(x.channel_count(), n);
    std::vector<cd> buf(static_cast<std::size_t>(n));
    const Eigen::Index half = n / 2;
    for (Eigen::Index k = 0; k < x.channel_count(); ++k) {
        for (Eigen::Index i = 0; i < n; ++i)
            buf[static_cast<std::size_t>(i)] = x.samples(k, i);
        fft_inplace(buf);
        // Keep DC (and Nyquist for even n) once, double positive bins, clear negative bins.
        for (Eigen::Index i = 1; i < n; ++i) {
            auto& b = buf[static_cast<std::size_t>(i)];
            if (i < (n + 1) / 2)
                b *= 2.0;
            else if (!(n % 2 == 0 && i == half))
                b = 0.0;
        }
        fft_inplace(buf, true);
        for (Eigen::Index i = 0; i < n; ++i)
            y(k, i) = buf[static_cast<std::size_t>(i)] / static_cast<double>(n);
        y.row(k).real() = x.samples.row(k);
    }
    return ComplexSnapshots(std::move(y), x.fs, x.channels);
}

CalibrationMatrix::CalibrationMatrix(Eigen::MatrixXcd c) : c_(std::move(c))
{
    require(c_.rows() >= 1 && c_.cols() >= 1, "calibration matrix must not be empty");
    require(c_.allFinite(), "calibration entries must be finite");
}

CalibrationMatrix CalibrationMatrix::identity(Eigen::Index channels)
{
    return CalibrationMatrix(Eigen::MatrixXcd::Ones(channels, 1));
}

CalibrationMatrix CalibrationMatrix::from_factors(std::span<const double> amplitude,
                                                  std::span<const double> phase)
{
    require(amplitude.size() == phase.size() && !amplitude.empty(),
            "amplitude and phase factor counts differ");
    Eigen::MatrixXcd c(static_cast<Eigen::Index>(amplitude.size()), 1);
    for (std::size_t i = 0; i < amplitude.size(); ++i) {
        require(amplitude[i] > 0.0, "amplitude calibration factors must be positive");
        c(static_cast<Eigen::Index>(i), 0) = std::polar(amplitude[i], -phase[i]);
    }
    return CalibrationMatrix(std::move(c));
}

CalibrationMatrix CalibrationMatrix::synthetic_miscalibration(Eigen::Index channels,
                                                              double amplitude_sigma_db,
                                                              double phase_sigma_rad,
                                                              std::uint64_t seed)
{
    require(channels >= 1, "calibration needs at least one channel");
    Rng rng(seed);
    std::vector<double> amp(static_cast<std::size_t>(channels));
    std::vector<double> ph(static_cast<std::size_t>(channels));
    for (Eigen::Index i = 0; i < channels; ++i) {
        amp[static_cast<std::size_t>(i)] = std::pow(10.0, amplitude_sigma_db * rng.normal() / 20.0);
        ph[static_cast<std::size_t>(i)] = phase_sigma_rad * rng.normal();
    }
    return from_factors(amp, ph);
}

CalibrationMatrix CalibrationMatrix::inverse() const
{
    require((c_.array().abs() > 0.0).all(), "calibration matrix has zero entries");
    return CalibrationMatrix(c_.cwiseInverse());
}

ComplexSnapshots apply_calibration(const CalibrationMatrix& c, const ComplexSnapshots& x)
{
    if (c.channels() != x.channel_count() || (!c.broadcast() && c.values().cols() != x.sample_count()))
        throw PreconditionError("calibration matrix shape does not match the snapshot block");
    Eigen::MatrixXcd y(x.samples.rows(), x.samples.cols());
    if (c.broadcast())
        y = c.values().col(0).asDiagonal() * x.samples;
    else
        y = c.values().cwiseProduct(x.samples);
    return ComplexSnapshots(std::move(y), x.fs, x.channels);
}

void write_calibration(std::ostream& os, const CalibrationMatrix& c)
{
    require(c.broadcast(), "only K x 1 calibration matrices have a table form");
    std::ostringstream line;
    line.precision(17);
    for (Eigen::Index i = 0; i < c.channels(); ++i) {
        const cd v = c.values()(i, 0);
        line.str("");
        line << i << ' ' << std::abs(v) << ' ' << -std::arg(v) << '\n';
        os << line.str();
    }
}

CalibrationMatrix read_calibration(std::istream& is)
{
    std::vector<double> amp;
    std::vector<double> ph;
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#')
            continue;
        std::istringstream ls(line);
        long ch = 0;
        double a = 0.0;
        double p = 0.0;
        if (!(ls >> ch >> a >> p))
            throw DataError("calibration table: malformed line " + std::to_string(lineno));
        if (ch != static_cast<long>(amp.size()))
            throw DataError("calibration table: channels must be listed in order starting at 0");
        if (!(a > 0.0) || !std::isfinite(p))
            throw DataError("calibration table: invalid factors on line " + std::to_string(lineno));
        amp.push_back(a);
        ph.push_back(p);
    }
    if (amp.empty())
        throw DataError("calibration table is empty");
    return CalibrationMatrix::from_factors(amp, ph);
}

double spl(std::span<const double> x)
{
    require(!x.empty(), "spl needs a non-empty signal");
    double acc = 0.0;
    for (double v : x)
        acc += v * v;
    const double rms = std::sqrt(acc / static_cast<double>(x.size()));
    if (rms == 0.0)
        throw PreconditionError("spl of an all-zero signal is -infinity");
    return 20.0 * std::log10(rms / 20e-6);
}

ColumnRange interior_columns(Eigen::Index n, double edge_fraction)
{
    require(edge_fraction >= 0.0 && edge_fraction < 0.5, "edge fraction must lie in [0, 0.5)");
    const auto edge = static_cast<Eigen::Index>(std::ceil(edge_fraction * static_cast<double>(n)));
    return {edge, std::max<Eigen::Index>(0, n - 2 * edge)};
}

ComplexSnapshots process_chain(const RealSnapshots& x, const FilterSpec& spec,
                               const std::optional<CalibrationMatrix>& calibration)
{
    auto y = analytic(bandpass(x, spec));
    if (calibration)
        return apply_calibration(*calibration, y);
    return y;
}

} // namespace sdoa
