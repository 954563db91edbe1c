#include "sdoa/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numbers>
#include <numeric>

#include <Eigen/Geometry>

#include "sdoa/angular_grid.hpp"
#include "sdoa/error.hpp"

namespace sdoa {

namespace {
constexpr double kDeg = std::numbers::pi / 180.0;
} // namespace

double spherical_error(const Direction& est, const Direction& truth)
{
    // atan2 form keeps full precision for tiny angles, where acos of the dot product does not.
    const Eigen::Vector3d a = unit_vector(est);
    const Eigen::Vector3d b = unit_vector(truth);
    return std::atan2(a.cross(b).norm(), a.dot(b)) / kDeg;
}

namespace {

// Walks away from the peak along one side of a cut, returning the angle to the first node
// below the threshold (or to the last node if none drops below).
template <typename Next>
double walk(const Pseudospectrum& p, const Direction& peak, int i, int j, double threshold, Next next)
{
    int ci = i;
    int cj = j;
    for (;;) {
        if (!next(ci, cj))
            return spherical_error(peak, p.grid.node(ci, cj));
        if (p.at(ci, cj) < threshold)
            return spherical_error(peak, p.grid.node(ci, cj));
    }
}

} // namespace

BeamMetrics beam_metrics(const Pseudospectrum& p)
{
    require(p.scale == Pseudospectrum::Scale::Decibel, "beam_metrics expects a dB pattern");
    const auto& g = p.grid;
    const GridPeak top = p.argmax();
    BeamMetrics out;
    out.peak = top.direction;
    out.mlm = top.value;
    const double threshold = top.value - 3.0;
    const int na = g.az_count();
    const int ne = g.el_count();

    // Elevation cut along azimuth column a, continuing over the pole into column a + 180.
    const auto elevation_cut = [&](int a, int start_j) {
        const int opposite = (a + na / 2) % na;
        if (na % 2 != 0)
            throw PreconditionError("beam_metrics needs an even azimuth count");
        const auto down = [&](int&, int& cj) {
            // towards the horizon on column a
            if (cj + 1 >= ne)
                return false;
            ++cj;
            return true;
        };
        bool crossed = false;
        const auto up = [&](int& ci, int& cj) {
            if (!crossed) {
                if (cj > 0) {
                    --cj;
                    return true;
                }
                crossed = true;
                ci = opposite;
            }
            if (cj + 1 >= ne)
                return false;
            ++cj;
            return true;
        };
        return walk(p, top.direction, a, start_j, threshold, down) +
               walk(p, top.direction, a, start_j, threshold, up);
    };

    if (top.el_index == 0) {
        for (int a = 0; a < na / 2 + (na % 2); ++a)
            out.cuts.push_back({g.azimuth(a), elevation_cut(a, 0)});
    } else {
        out.cuts.push_back({g.azimuth(top.az_index), elevation_cut(top.az_index, top.el_index)});
        const auto left = [&](int& ci, int&) {
            ci = (ci + na - 1) % na;
            return ci != top.az_index;
        };
        const auto right = [&](int& ci, int&) {
            ci = (ci + 1) % na;
            return ci != top.az_index;
        };
        const double w = walk(p, top.direction, top.az_index, top.el_index, threshold, left) +
                         walk(p, top.direction, top.az_index, top.el_index, threshold, right);
        out.cuts.push_back({std::fmod(g.azimuth(top.az_index) + 90.0, 360.0), w});
    }
    out.mlw = std::min_element(out.cuts.begin(), out.cuts.end(), [](const auto& a, const auto& b) {
                  return a.full_width < b.full_width;
              })->full_width;

    // Mainlobe region: nodes connected to the peak above the threshold, dilated by one node.
    Eigen::MatrixXi region = Eigen::MatrixXi::Zero(ne, na);
    const auto neighbours = [&](int i, int j, auto&& visit) {
        if (j == 0) {
            for (int k = 0; k < na; ++k)
                visit(k, 1);
            return;
        }
        for (int dj = -1; dj <= 1; ++dj) {
            const int jj = j + dj;
            if (jj < 0 || jj >= ne)
                continue;
            if (jj == 0) {
                visit(0, 0);
                continue;
            }
            for (int di = -1; di <= 1; ++di)
                if (di != 0 || dj != 0)
                    visit((i + di + na) % na, jj);
        }
    };
    std::deque<std::pair<int, int>> queue;
    const int pi0 = top.el_index == 0 ? 0 : top.az_index;
    region(top.el_index, pi0) = 1;
    queue.emplace_back(pi0, top.el_index);
    while (!queue.empty()) {
        const auto [i, j] = queue.front();
        queue.pop_front();
        neighbours(i, j, [&](int ii, int jj) {
            if (region(jj, ii) == 0 && p.at(ii, jj) >= threshold) {
                region(jj, ii) = 1;
                queue.emplace_back(ii, jj);
            }
        });
    }
    Eigen::MatrixXi dilated = region;
    for (int j = 0; j < ne; ++j)
        for (int i = 0; i < (j == 0 ? 1 : na); ++i)
            if (region(j, i))
                neighbours(i, j, [&](int ii, int jj) { dilated(jj, ii) = 1; });
    if (dilated(0, 0))
        dilated.row(0).setOnes();

    const auto side = find_peaks(p, 1, 0.0, &dilated);
    if (!side.empty()) {
        out.sidelobe = side.front().direction;
        out.mslr = top.value - side.front().value;
        out.msls = spherical_error(top.direction, side.front().direction);
    }
    return out;
}

double percentile(std::span<const double> values, double q)
{
    require(!values.empty(), "percentile of an empty set");
    require(q >= 0.0 && q <= 1.0, "percentile rank must lie in [0, 1]");
    std::vector<double> v(values.begin(), values.end());
    std::sort(v.begin(), v.end());
    const double h = q * static_cast<double>(v.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const auto hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (h - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

ErrorSummary error_summary(std::span<const double> errors, std::span<const Direction> truths,
                           std::optional<double> max_elevation)
{
    if (max_elevation)
        require(truths.size() == errors.size(), "error_summary: errors and ground truths differ in length");
    ErrorSummary s;
    for (std::size_t i = 0; i < errors.size(); ++i) {
        if (max_elevation && truths[i].elevation > *max_elevation) {
            ++s.excluded;
            continue;
        }
        require(errors[i] >= 0.0 && errors[i] <= 180.0, "error_summary: errors must lie in [0, 180]");
        s.errors.push_back(errors[i]);
    }
    if (s.errors.empty())
        throw PreconditionError("error_summary: no poses left after filtering");
    s.mean = std::accumulate(s.errors.begin(), s.errors.end(), 0.0) / static_cast<double>(s.errors.size());
    s.p50 = percentile(s.errors, 0.5);
    s.p95 = percentile(s.errors, 0.95);
    return s;
}

double fov_fraction(double theta_max_deg)
{
    require(theta_max_deg > 0.0 && theta_max_deg <= 90.0, "fov_fraction: theta_max must lie in (0, 90]");
    return 1.0 - std::cos(theta_max_deg * kDeg);
}

} // namespace sdoa
