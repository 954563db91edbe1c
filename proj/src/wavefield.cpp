#include "sdoa/wavefield.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <string>

#include "sdoa/error.hpp"
#include "sdoa/log.hpp"
#include "sdoa/random.hpp"

namespace sdoa {

namespace {
constexpr double kPi = std::numbers::pi;
constexpr double kDeg = kPi / 180.0;
} // namespace

void Direction::validate() const
{
    require(std::isfinite(azimuth) && azimuth >= 0.0 && azimuth < 360.0,
            "azimuth must lie in [0, 360)");
    require(std::isfinite(elevation) && elevation >= 0.0 && elevation <= 90.0,
            "elevation must lie in [0, 90]");
}

Direction normalized(double azimuth_deg, double elevation_deg)
{
    double el = std::fmod(elevation_deg, 360.0);
    if (el < 0.0)
        el += 360.0;
    double az = azimuth_deg;
    // Reflect through the pole and the array plane back into [0, 90].
    if (el > 180.0) {
        el = 360.0 - el;
        az += 180.0;
    }
    if (el > 90.0)
        el = 180.0 - el;
    az = std::fmod(az, 360.0);
    if (az < 0.0)
        az += 360.0;
    if (az >= 360.0)
        az = 0.0;
    return {az, std::clamp(el, 0.0, 90.0)};
}

Direction direction_from_cosines(double ux, double uy)
{
    const double r = std::min(1.0, std::hypot(ux, uy));
    const double el = std::asin(r) / kDeg;
    const double az = r > 0.0 ? std::atan2(uy, ux) / kDeg : 0.0;
    return normalized(az, el);
}

Eigen::Vector3d unit_vector(const Direction& dir)
{
    const double az = dir.azimuth * kDeg;
    const double el = dir.elevation * kDeg;
    return {std::sin(el) * std::cos(az), std::sin(el) * std::sin(az), std::cos(el)};
}

double max_frequency(double spacing, double c)
{
    require(spacing > 0.0 && c > 0.0, "spacing and speed of sound must be positive");
    return c / (2.0 * spacing);
}

Eigen::VectorXcd steering_vector(const SensorSet& s, const Direction& dir, double f, double c)
{
    dir.validate();
    require(f > 0.0 && c > 0.0, "frequency and speed of sound must be positive");
    if (f > max_frequency(s.grid().spacing, c) * (1.0 + 1e-12))
        warn("steering frequency " + std::to_string(f) + " Hz exceeds the spatial Nyquist limit");
    const Eigen::Vector3d u = unit_vector(dir);
    const double k = 2.0 * kPi * f / c;
    Eigen::VectorXcd a(static_cast<Eigen::Index>(s.size()));
    const double d = s.grid().spacing;
    Eigen::Index i = 0;
    for (const auto& p : s.positions()) {
        const double phase = k * d * (p.ix * u.x() + p.iy * u.y());
        a(i++) = std::polar(1.0, phase);
    }
    return a;
}

Eigen::MatrixXcd steering_matrix(const SensorSet& s, std::span<const Direction> dirs, double f,
                                 double c)
{
    require(!dirs.empty(), "steering_matrix needs at least one direction");
    Eigen::MatrixXcd A(static_cast<Eigen::Index>(s.size()), static_cast<Eigen::Index>(dirs.size()));
    for (std::size_t m = 0; m < dirs.size(); ++m)
        A.col(static_cast<Eigen::Index>(m)) = steering_vector(s, dirs[m], f, c);
    return A;
}

Eigen::MatrixXi hadamard_codes(int order)
{
    require(order >= 2 && (order & (order - 1)) == 0, "Hadamard order must be a power of two >= 2");
    Eigen::MatrixXi H(1, 1);
    H(0, 0) = 1;
    while (H.rows() < order) {
        const auto n = H.rows();
        Eigen::MatrixXi next(2 * n, 2 * n);
        next << H, H, H, -H;
        H = std::move(next);
    }
    return H;
}

PeriodicWaveform PeriodicWaveform::tone(double frequency, double rms, double phase)
{
    return PeriodicWaveform({{frequency, rms * std::numbers::sqrt2, phase}});
}

PeriodicWaveform PeriodicWaveform::coded(std::span<const int> code, double chip_rate,
                                         double carrier, double rolloff)
{
    require(!code.empty(), "code must not be empty");
    require(chip_rate > 0.0 && carrier > 0.0, "chip rate and carrier must be positive");
    require(rolloff > 0.0 && rolloff < 1.0, "roll-off must lie in (0, 1)");
    const auto L = static_cast<int>(code.size());
    const double chip = 1.0 / chip_rate;
    const double period = L * chip;

    // Raised-cosine spectrum; the RRC pulse spectrum is its square root.
    const auto raised_cosine = [&](double f) {
        const double af = std::abs(f);
        const double f1 = (1.0 - rolloff) / (2.0 * chip);
        const double f2 = (1.0 + rolloff) / (2.0 * chip);
        if (af <= f1)
            return chip;
        if (af >= f2)
            return 0.0;
        return 0.5 * chip * (1.0 + std::cos(kPi * chip / rolloff * (af - f1)));
    };

    // Fourier series of the periodic baseband sum_n c_n p(t - n T), shifted to the carrier.
    const int kmax = static_cast<int>(std::ceil((1.0 + rolloff) / (2.0 * chip) * period));
    std::vector<Harmonic> h;
    for (int k = -kmax; k <= kmax; ++k) {
        const double fk = k / period;
        const double shape = std::sqrt(raised_cosine(fk));
        if (shape == 0.0)
            continue;
        std::complex<double> ck = 0.0;
        for (int n = 0; n < L; ++n)
            ck += static_cast<double>(code[static_cast<std::size_t>(n)]) *
                  std::polar(1.0, -2.0 * kPi * k * n / L);
        const std::complex<double> beta = ck * shape / period;
        if (std::abs(beta) < 1e-14 * L / period)
            continue;
        require(carrier + fk > 0.0, "carrier too low for the code bandwidth");
        h.push_back({carrier + fk, std::abs(beta), std::arg(beta)});
    }
    PeriodicWaveform w(std::move(h));
    const double r = w.rms();
    require(r > 0.0, "coded waveform has no power");
    return w.scaled(1.0 / r);
}

double PeriodicWaveform::operator()(double t) const
{
    double v = 0.0;
    for (const auto& h : harmonics_)
        v += h.amplitude * std::cos(2.0 * kPi * h.frequency * t + h.phase);
    return v;
}

double PeriodicWaveform::rms() const
{
    // Distinct frequencies are orthogonal; equal frequencies add coherently.
    std::vector<std::pair<double, std::complex<double>>> acc;
    for (const auto& h : harmonics_) {
        auto it = std::find_if(acc.begin(), acc.end(),
                               [&](const auto& e) { return e.first == h.frequency; });
        const auto z = std::polar(h.amplitude, h.phase);
        if (it == acc.end())
            acc.emplace_back(h.frequency, z);
        else
            it->second += z;
    }
    double p = 0.0;
    for (const auto& [f, z] : acc)
        p += f == 0.0 ? std::norm(z.real()) : 0.5 * std::norm(z);
    return std::sqrt(p);
}

double PeriodicWaveform::max_frequency() const
{
    double f = 0.0;
    for (const auto& h : harmonics_)
        f = std::max(f, h.frequency);
    return f;
}

PeriodicWaveform PeriodicWaveform::scaled(double gain) const
{
    auto h = harmonics_;
    for (auto& x : h)
        x.amplitude *= gain;
    return PeriodicWaveform(std::move(h));
}

std::vector<double> bandlimit_and_mix(std::span<const int> code, double chip_rate, double carrier,
                                      double fs, std::size_t samples)
{
    require(fs > 0.0, "sample rate must be positive");
    require(chip_rate > 0.0 && carrier - chip_rate / 2.0 > 0.0 && carrier + chip_rate / 2.0 < fs / 2.0,
            "coded waveform band must lie inside (0, fs/2)");
    const auto w = PeriodicWaveform::coded(code, chip_rate, carrier);
    std::vector<double> out(samples);
    for (std::size_t n = 0; n < samples; ++n)
        out[n] = w(static_cast<double>(n) / fs);
    return out;
}

PeriodicWaveform source_waveform(const NarrowbandSource& src)
{
    require(std::isfinite(src.level_db), "source level must be finite");
    require(src.frequency > 0.0, "source frequency must be positive");
    const double rms = kReferencePressure * std::pow(10.0, src.level_db / 20.0);
    if (src.waveform.kind == Waveform::Kind::Tone)
        return PeriodicWaveform::tone(src.frequency, rms, src.phase);
    require(src.waveform.bandwidth > 0.0, "code bandwidth must be positive");
    const Eigen::MatrixXi H = hadamard_codes(src.waveform.code_order);
    require(src.waveform.code_row >= 0 && src.waveform.code_row < H.rows(), "code row out of range");
    std::vector<int> row(static_cast<std::size_t>(H.cols()));
    for (Eigen::Index j = 0; j < H.cols(); ++j)
        row[static_cast<std::size_t>(j)] = H(src.waveform.code_row, j);
    return PeriodicWaveform::coded(row, src.waveform.bandwidth, src.frequency).scaled(rms);
}

namespace {

// Adds sum_h A_h cos(w_h (t_n + tau) + phi_h) for t_n = n / fs using a rotating phasor that is
// re-anchored every block to keep the recurrence error negligible.
void accumulate_delayed(Eigen::Ref<Eigen::RowVectorXd, 0, Eigen::InnerStride<>> out, const PeriodicWaveform& w, double tau,
                        double fs)
{
    constexpr Eigen::Index kBlock = 512;
    const Eigen::Index n = out.size();
    for (const auto& h : w.harmonics()) {
        const double omega = 2.0 * kPi * h.frequency;
        const std::complex<double> step = std::polar(1.0, omega / fs);
        for (Eigen::Index start = 0; start < n; start += kBlock) {
            std::complex<double> z =
                std::polar(h.amplitude, omega * (static_cast<double>(start) / fs + tau) + h.phase);
            const Eigen::Index stop = std::min(n, start + kBlock);
            for (Eigen::Index i = start; i < stop; ++i) {
                out(i) += z.real();
                z *= step;
            }
        }
    }
}

} // namespace

RealSnapshots synthesize_scene(const SceneSpec& scene, const SensorSet& s)
{
    require(scene.fs > 0.0, "sample rate must be positive");
    require(scene.samples >= 1, "scene needs at least one sample");
    require(scene.c > 0.0, "speed of sound must be positive");

    std::vector<PeriodicWaveform> waves;
    double loudest = 0.0;
    for (const auto& src : scene.sources) {
        src.direction.validate();
        waves.push_back(source_waveform(src));
        if (waves.back().max_frequency() >= scene.fs / 2.0)
            throw PreconditionError("source frequency content reaches above Nyquist (" +
                                    std::to_string(scene.fs / 2.0) + " Hz)");
        loudest = std::max(loudest, waves.back().rms());
    }

    const auto K = static_cast<Eigen::Index>(s.size());
    const auto N = static_cast<Eigen::Index>(scene.samples);
    Eigen::MatrixXd x = Eigen::MatrixXd::Zero(K, N);
    const Eigen::MatrixX2d pos = s.coordinates();
    for (std::size_t q = 0; q < scene.sources.size(); ++q) {
        const Eigen::Vector3d u = unit_vector(scene.sources[q].direction);
        for (Eigen::Index k = 0; k < K; ++k) {
            const double tau = (pos(k, 0) * u.x() + pos(k, 1) * u.y()) / scene.c;
            accumulate_delayed(x.row(k), waves[q], tau, scene.fs);
        }
    }

    double sigma = 0.0;
    switch (scene.noise.mode) {
    case NoiseSpec::Mode::None:
        break;
    case NoiseSpec::Mode::Snr: {
        if (scene.sources.empty())
            throw PreconditionError("SNR-mode noise needs at least one source as reference");
        const double band = scene.noise.in_band_hz;
        require(band >= 0.0 && band <= scene.fs / 2.0, "noise reference band must lie in [0, fs/2]");
        const double inband = loudest * loudest / std::pow(10.0, scene.noise.value_db / 10.0);
        sigma = std::sqrt(band > 0.0 ? inband * (scene.fs / 2.0) / band : inband);
        break;
    }
    case NoiseSpec::Mode::Spl:
        sigma = kReferencePressure * std::pow(10.0, scene.noise.value_db / 20.0);
        break;
    }
    if (sigma > 0.0) {
        Rng rng(scene.seed);
        for (Eigen::Index k = 0; k < K; ++k)
            for (Eigen::Index n = 0; n < N; ++n)
                x(k, n) += sigma * rng.normal();
    }
    return RealSnapshots(std::move(x), scene.fs, s);
}

} // namespace sdoa
