#include "sdoa/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/Eigenvalues>

#include "sdoa/error.hpp"
#include "sdoa/log.hpp"
#include "sdoa/metrics.hpp"
#include "refine.hpp"

namespace sdoa {

namespace {
constexpr double kPi = std::numbers::pi;
constexpr double kDeg = kPi / 180.0;
} // namespace

EigenPair eig_hermitian(const Eigen::MatrixXcd& r, double tolerance)
{
    require(r.rows() == r.cols() && r.rows() > 0, "eig_hermitian needs a non-empty square matrix");
    const double scale = std::max(r.norm(), 1e-300);
    if ((r - r.adjoint()).norm() > tolerance * scale)
        throw PreconditionError("eig_hermitian: matrix is not Hermitian");
    const Eigen::MatrixXcd h = 0.5 * (r + r.adjoint());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h);
    if (es.info() != Eigen::Success)
        throw EstimationError("eig_hermitian: eigendecomposition did not converge");
    return {es.eigenvalues(), es.eigenvectors()};
}

ArrayManifold::ArrayManifold(std::vector<GridPos> p, double spacing)
    : pos_(std::move(p)), spacing_(spacing)
{
    require(!pos_.empty(), "array manifold needs at least one element");
    require(spacing_ > 0.0, "array manifold spacing must be positive");
    for (const auto& q : pos_) {
        require(q.ix >= 0 && q.iy >= 0, "array manifold positions must be non-negative");
        nx_ = std::max(nx_, q.ix + 1);
        ny_ = std::max(ny_, q.iy + 1);
    }
}

ArrayManifold ArrayManifold::physical(const SensorSet& s)
{
    return ArrayManifold(s.positions(), s.grid().spacing);
}

ArrayManifold ArrayManifold::virtual_ura(int wx, int wy, double spacing)
{
    require(wx >= 1 && wy >= 1, "virtual URA dimensions must be positive");
    std::vector<GridPos> p;
    for (int y = 0; y < wy; ++y)
        for (int x = 0; x < wx; ++x)
            p.push_back({x, y});
    return ArrayManifold(std::move(p), spacing);
}

Eigen::VectorXcd ArrayManifold::steering(double ux, double uy, double f, double c) const
{
    const double k = 2.0 * kPi * f / c * spacing_;
    Eigen::VectorXcd a(size());
    for (Eigen::Index i = 0; i < size(); ++i) {
        const auto& q = pos_[static_cast<std::size_t>(i)];
        a(i) = std::polar(1.0, k * (q.ix * ux + q.iy * uy));
    }
    return a;
}

namespace {

// Evaluates a^H P a for the projector onto `basis`; used as K - |Es^H a|^2 or |En^H a|^2.
struct MusicDenominator {
    const ArrayManifold& array;
    Eigen::MatrixXcd basis;
    bool complement; // basis spans the signal subspace
    double f;
    double c;

    double operator()(double ux, double uy) const
    {
        const Eigen::VectorXcd a = array.steering(ux, uy, f, c);
        const double proj = (basis.adjoint() * a).squaredNorm();
        return complement ? static_cast<double>(array.size()) - proj : proj;
    }
};

double floor_denominator(double den, Eigen::Index k)
{
    return std::max(den, 1e-13 * static_cast<double>(k));
}

} // namespace

MusicResult music(const Eigen::MatrixXcd& r, const ArrayManifold& array, const MusicOptions& opt)
{
    const Eigen::Index k = array.size();
    require(r.rows() == k && r.cols() == k, "music: covariance does not match the manifold size");
    if (opt.sources < 1 || opt.sources >= k)
        throw PreconditionError("music: source count must satisfy 1 <= m < " + std::to_string(k));
    require(opt.frequency > 0.0 && opt.c > 0.0, "music: frequency and c must be positive");
    if (opt.frequency > max_frequency(array.spacing(), opt.c))
        warn("music: frequency above the spatial Nyquist limit, expect grating lobes");

    const EigenPair ep = eig_hermitian(r);
    const int m = opt.sources;
    const bool use_signal = m <= k - m;
    MusicDenominator den{array,
                         use_signal ? Eigen::MatrixXcd(ep.vectors.rightCols(m))
                                    : Eigen::MatrixXcd(ep.vectors.leftCols(k - m)),
                         use_signal, opt.frequency, opt.c};

    const AngularGrid& grid = opt.grid;
    Pseudospectrum ps{grid, Eigen::MatrixXd(grid.el_count(), grid.az_count()),
                      Pseudospectrum::Scale::Linear, "music"};
    const double kd = 2.0 * kPi * opt.frequency / opt.c * array.spacing();
    std::vector<double> caz(static_cast<std::size_t>(grid.az_count()));
    std::vector<double> saz(caz.size());
    for (int i = 0; i < grid.az_count(); ++i) {
        caz[static_cast<std::size_t>(i)] = std::cos(grid.azimuth(i) * kDeg);
        saz[static_cast<std::size_t>(i)] = std::sin(grid.azimuth(i) * kDeg);
    }
    Eigen::MatrixXcd a(k, grid.az_count());
    std::vector<cdouble> ex(static_cast<std::size_t>(array.extent_x()));
    std::vector<cdouble> ey(static_cast<std::size_t>(array.extent_y()));
    const auto powers = [](std::vector<cdouble>& v, double phase) {
        const cdouble step = std::polar(1.0, phase);
        cdouble p = 1.0;
        for (auto& e : v) {
            e = p;
            p *= step;
        }
    };
    for (int j = 0; j < grid.el_count(); ++j) {
        const double st = std::sin(grid.elevation(j) * kDeg);
        for (int i = 0; i < grid.az_count(); ++i) {
            powers(ex, kd * st * caz[static_cast<std::size_t>(i)]);
            powers(ey, kd * st * saz[static_cast<std::size_t>(i)]);
            for (Eigen::Index q = 0; q < k; ++q) {
                const auto& p = array.positions()[static_cast<std::size_t>(q)];
                a(q, i) = ex[static_cast<std::size_t>(p.ix)] * ey[static_cast<std::size_t>(p.iy)];
            }
        }
        const Eigen::RowVectorXd proj = (den.basis.adjoint() * a).colwise().squaredNorm();
        for (int i = 0; i < grid.az_count(); ++i) {
            const double d = use_signal ? static_cast<double>(k) - proj(i) : proj(i);
            ps.values(j, i) = 1.0 / floor_denominator(d, k);
        }
    }

    auto peaks = find_peaks(ps, static_cast<std::size_t>(m), opt.min_separation_deg);
    if (opt.min_peak_ratio > 0.0) {
        std::vector<double> flat(ps.values.data(), ps.values.data() + ps.values.size());
        auto mid = flat.begin() + static_cast<std::ptrdiff_t>(flat.size() / 2);
        std::nth_element(flat.begin(), mid, flat.end());
        const double floor_level = opt.min_peak_ratio * *mid;
        std::erase_if(peaks, [&](const GridPeak& p) { return p.value < floor_level; });
    }
    if (static_cast<int>(peaks.size()) < m)
        throw EstimationError("music: found " + std::to_string(peaks.size()) +
                              " distinct pseudospectrum peaks, " + std::to_string(m) + " requested");

    MusicResult out{std::move(ps), {}};
    const double h0 = 0.5 * grid.el_step() * kDeg;
    for (const auto& p : peaks) {
        if (!opt.refine) {
            out.directions.push_back(p.direction);
            continue;
        }
        const Eigen::Vector3d u = unit_vector(p.direction);
        const auto [ux, uy] = detail::refine_minimum(den, u.x(), u.y(), h0);
        out.directions.push_back(direction_from_cosines(ux, uy));
    }
    return out;
}

MusicResult music(const CovarianceMatrix& r, const SensorSet& s, const MusicOptions& opt)
{
    return music(r.R, ArrayManifold::physical(s), opt);
}

MusicResult music(const SmoothedCovariance& r, double spacing, const MusicOptions& opt)
{
    return music(r.R, ArrayManifold::virtual_ura(r.wx, r.wy, spacing), opt);
}

} // namespace sdoa
