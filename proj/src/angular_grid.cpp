#include "sdoa/angular_grid.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <sstream>

#include "sdoa/error.hpp"
#include "sdoa/metrics.hpp"

namespace sdoa {

AngularGrid::AngularGrid(double az_step, double el_step) : az_count_(0), el_count_(0)
{
    require(az_step > 0.0 && az_step <= 360.0 && el_step > 0.0 && el_step <= 90.0,
            "angular grid steps must be positive");
    az_count_ = std::max(1, static_cast<int>(std::lround(360.0 / az_step)));
    el_count_ = std::max(2, static_cast<int>(std::lround(90.0 / el_step)) + 1);
}

AngularGrid::AngularGrid(int az_count, int el_count, bool) : az_count_(az_count), el_count_(el_count) {}

AngularGrid AngularGrid::with_counts(int az_count, int el_count)
{
    require(az_count >= 1 && el_count >= 2, "angular grid needs >= 1 azimuth and >= 2 elevation nodes");
    return AngularGrid(az_count, el_count, true);
}

GridPeak Pseudospectrum::argmax() const
{
    Eigen::Index j = 0;
    Eigen::Index i = 0;
    const double v = values.maxCoeff(&j, &i);
    const int ii = static_cast<int>(i);
    const int jj = static_cast<int>(j);
    return {grid.node(ii, jj), v, ii, jj};
}

namespace {

bool is_local_max(const Pseudospectrum& p, int i, int j)
{
    const auto& g = p.grid;
    const double v = p.at(i, j);
    if (j == 0) {
        for (int k = 0; k < g.az_count(); ++k)
            if (p.at(k, 1) > v)
                return false;
        return true;
    }
    for (int dj = -1; dj <= 1; ++dj) {
        const int jj = j + dj;
        if (jj < 0 || jj >= g.el_count())
            continue;
        for (int di = -1; di <= 1; ++di) {
            if (di == 0 && dj == 0)
                continue;
            const int ii = jj == 0 ? 0 : (i + di + g.az_count()) % g.az_count();
            if (p.at(ii, jj) > v)
                return false;
        }
    }
    return true;
}

} // namespace

std::vector<GridPeak> find_peaks(const Pseudospectrum& p, std::size_t max_count,
                                 double min_separation_deg, const Eigen::MatrixXi* excluded)
{
    const auto& g = p.grid;
    std::vector<GridPeak> cand;
    for (int j = 0; j < g.el_count(); ++j) {
        const int az_nodes = j == 0 ? 1 : g.az_count();
        for (int i = 0; i < az_nodes; ++i) {
            if (excluded && (*excluded)(j, i) != 0)
                continue;
            if (is_local_max(p, i, j))
                cand.push_back({g.node(i, j), p.at(i, j), i, j});
        }
    }
    std::stable_sort(cand.begin(), cand.end(),
                     [](const GridPeak& a, const GridPeak& b) { return a.value > b.value; });
    std::vector<GridPeak> out;
    for (const auto& c : cand) {
        if (out.size() >= max_count)
            break;
        const bool far = std::all_of(out.begin(), out.end(), [&](const GridPeak& o) {
            return spherical_error(o.direction, c.direction) >= min_separation_deg;
        });
        if (far)
            out.push_back(c);
    }
    return out;
}

void write_pseudospectrum(std::ostream& os, const Pseudospectrum& p)
{
    std::ostringstream buf;
    buf.setf(std::ios::fixed);
    buf << "# azimuth_deg elevation_deg value_db tag=" << p.tag << '\n';
    for (int j = 0; j < p.grid.el_count(); ++j)
        for (int i = 0; i < p.grid.az_count(); ++i) {
            double v = p.at(i, j);
            if (p.scale == Pseudospectrum::Scale::Linear)
                v = 10.0 * std::log10(std::max(v, std::numeric_limits<double>::min()));
            buf.precision(6);
            buf << p.grid.azimuth(i) << ' ' << p.grid.elevation(j) << ' ';
            buf.precision(4);
            buf << v << '\n';
        }
    os << buf.str();
}

} // namespace sdoa
