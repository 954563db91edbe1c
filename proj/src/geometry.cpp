#include "sdoa/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <random>
#include <set>
#include <sstream>
#include <tuple>

#include "sdoa/error.hpp"

namespace sdoa {

void GridSpec::validate() const
{
    require(spacing > 0.0 && std::isfinite(spacing), "grid spacing must be positive");
    require(nx >= 1 && ny >= 1, "grid extents must be positive");
}

SensorSet::SensorSet(std::vector<GridPos> positions, GridSpec grid)
    : positions_(std::move(positions)), grid_(grid)
{
    grid_.validate();
    require(!positions_.empty(), "sensor set must not be empty");
    std::sort(positions_.begin(), positions_.end());
    require(std::adjacent_find(positions_.begin(), positions_.end()) == positions_.end(),
            "sensor set contains duplicate positions");
    for (const auto& p : positions_)
        require(p.ix >= 0 && p.ix < grid_.nx && p.iy >= 0 && p.iy < grid_.ny,
                "sensor position outside the grid");
}

bool SensorSet::contains(GridPos p) const
{
    return std::binary_search(positions_.begin(), positions_.end(), p);
}

Eigen::MatrixX2d SensorSet::coordinates() const
{
    Eigen::MatrixX2d r(static_cast<Eigen::Index>(positions_.size()), 2);
    for (std::size_t k = 0; k < positions_.size(); ++k) {
        r(static_cast<Eigen::Index>(k), 0) = positions_[k].ix * grid_.spacing;
        r(static_cast<Eigen::Index>(k), 1) = positions_[k].iy * grid_.spacing;
    }
    return r;
}

std::string to_string(GeometryKind kind)
{
    switch (kind.family) {
    case GeometryFamily::URA: return "ura";
    case GeometryFamily::Nested: return "nested";
    case GeometryFamily::Coprime: return "coprime";
    case GeometryFamily::Billboard: return "billboard";
    case GeometryFamily::OpenBox: return "openbox";
    case GeometryFamily::Random: return "random:" + std::to_string(kind.seed);
    }
    return "unknown";
}

GeometryKind parse_geometry_kind(std::string_view text)
{
    std::string t(text);
    std::transform(t.begin(), t.end(), t.begin(), [](unsigned char ch) { return std::tolower(ch); });
    if (t == "ura") return {GeometryFamily::URA};
    if (t == "nested") return {GeometryFamily::Nested};
    if (t == "coprime") return {GeometryFamily::Coprime};
    if (t == "billboard") return {GeometryFamily::Billboard};
    if (t == "openbox" || t == "open-box") return {GeometryFamily::OpenBox};
    if (t == "random") return {GeometryFamily::Random, 1};
    if (t.rfind("random:", 0) == 0) {
        const auto digits = t.substr(7);
        if (!digits.empty() && std::all_of(digits.begin(), digits.end(), ::isdigit))
            return {GeometryFamily::Random, std::stoull(digits)};
    }
    throw PreconditionError("unknown geometry kind '" + std::string(text) + "'");
}

std::vector<GeometryKind> geometry_catalog(std::uint64_t random_seed)
{
    return {{GeometryFamily::URA},     {GeometryFamily::Billboard},
            {GeometryFamily::Coprime}, {GeometryFamily::Nested},
            {GeometryFamily::OpenBox}, {GeometryFamily::Random, random_seed}};
}

namespace {

// Two-level nested ruler spanning [0, n-1]: dense run {0..a-1}, sparse marks every a
// cells after it, closed by a mark at n-1. Its difference set covers 0..n-1 without holes.
std::vector<int> nested_ruler(int n)
{
    const int a = std::max(1, static_cast<int>(std::ceil(std::sqrt(static_cast<double>(n)))));
    std::vector<int> marks;
    for (int i = 0; i < std::min(a, n); ++i)
        marks.push_back(i);
    for (int p = 2 * a - 1; p < n - 1; p += a)
        marks.push_back(p);
    if (marks.back() != n - 1)
        marks.push_back(n - 1);
    return marks;
}

// Unbiased draw in [0, bound) from the raw 64-bit engine (stdlib distributions are not portable).
std::uint64_t draw_below(std::mt19937_64& rng, std::uint64_t bound)
{
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % bound;
    std::uint64_t v = rng();
    while (v >= limit)
        v = rng();
    return v % bound;
}

} // namespace

SensorSet build_geometry(GeometryKind kind, const GridSpec& grid)
{
    grid.validate();
    const int nx = grid.nx;
    const int ny = grid.ny;
    std::set<GridPos> cells;

    switch (kind.family) {
    case GeometryFamily::URA:
        for (int y = 0; y < ny; ++y)
            for (int x = 0; x < nx; ++x)
                cells.insert({x, y});
        break;

    case GeometryFamily::Nested: {
        const auto xs = nested_ruler(nx);
        const auto ys = nested_ruler(ny);
        for (int y : ys)
            for (int x : xs)
                cells.insert({x, y});
        break;
    }

    case GeometryFamily::Coprime: {
        // Sub-URAs at pitches 2d and 3d over the largest common aperture (a multiple of 6).
        if (nx < 7 || ny < 7)
            throw PreconditionError("coprime geometry needs a grid of at least 7x7");
        const int lx = ((nx - 1) / 6) * 6;
        const int ly = ((ny - 1) / 6) * 6;
        for (int pitch : {2, 3})
            for (int y = 0; y <= ly; y += pitch)
                for (int x = 0; x <= lx; x += pitch)
                    cells.insert({x, y});
        break;
    }

    case GeometryFamily::Billboard:
        if (nx != ny || nx < 2)
            throw PreconditionError("billboard geometry needs a square grid of at least 2x2");
        for (int i = 0; i < nx; ++i) {
            cells.insert({i, 0});
            cells.insert({0, i});
            cells.insert({i, i});
        }
        break;

    case GeometryFamily::OpenBox:
        if (nx < 2 || ny < 2)
            throw PreconditionError("open-box geometry needs a grid of at least 2x2");
        for (int x = 0; x < nx; ++x)
            cells.insert({x, 0});
        for (int y = 0; y < ny; ++y) {
            cells.insert({0, y});
            cells.insert({nx - 1, y});
        }
        break;

    case GeometryFamily::Random: {
        if (nx < 2 || ny < 2 || grid.cells() < kRandomSensorCount)
            throw PreconditionError("random geometry needs at least " +
                                    std::to_string(kRandomSensorCount) + " cells on a 2x2+ grid");
        cells = {{0, 0}, {nx - 1, 0}, {0, ny - 1}, {nx - 1, ny - 1}};
        std::vector<GridPos> pool;
        for (int y = 0; y < ny; ++y)
            for (int x = 0; x < nx; ++x)
                if (!cells.count({x, y}))
                    pool.push_back({x, y});
        std::mt19937_64 rng(kind.seed);
        const std::size_t wanted = kRandomSensorCount - cells.size();
        for (std::size_t i = 0; i < wanted; ++i) {
            const auto j = i + draw_below(rng, pool.size() - i);
            std::swap(pool[i], pool[j]);
            cells.insert(pool[i]);
        }
        break;
    }
    }

    return SensorSet(std::vector<GridPos>(cells.begin(), cells.end()), grid);
}

int CoArray::multiplicity(Offset m) const
{
    const auto it = offsets_.find(m);
    return it == offsets_.end() ? 0 : it->second;
}

CoArray difference_coarray(const SensorSet& s)
{
    std::map<Offset, int> counts;
    for (const auto& a : s.positions())
        for (const auto& b : s.positions())
            ++counts[{a.ix - b.ix, a.iy - b.iy}];
    return CoArray(std::move(counts));
}

CoherentSegment coherent_segment(const CoArray& c)
{
    int max_x = 0;
    int max_y = 0;
    for (const auto& [m, n] : c.offsets()) {
        max_x = std::max(max_x, std::abs(m.ix));
        max_y = std::max(max_y, std::abs(m.iy));
    }

    // For each half-width mx, the tallest hole-free centered rectangle; heights shrink with mx.
    CoherentSegment best{0, 0};
    int height_limit = max_y;
    for (int mx = 0; mx <= max_x; ++mx) {
        int my = -1;
        for (int cand = 0; cand <= height_limit; ++cand) {
            bool full = true;
            for (int x = -mx; x <= mx && full; ++x)
                full = c.contains({x, cand}) && c.contains({x, -cand});
            if (!full)
                break;
            my = cand;
        }
        if (my < 0)
            break;
        height_limit = my;
        const CoherentSegment seg{mx, my};
        const auto key = [](const CoherentSegment& s) {
            return std::tuple(s.count(), std::min(s.mx, s.my), s.mx);
        };
        if (key(seg) > key(best))
            best = seg;
    }
    return best;
}

void write_geometry(std::ostream& os, const SensorSet& s)
{
    std::ostringstream d;
    d.precision(17);
    d << s.grid().spacing;
    os << "# sdoa-geometry\n";
    os << "d " << d.str() << " nx " << s.grid().nx << " ny " << s.grid().ny << "\n";
    for (const auto& p : s.positions())
        os << p.ix << ' ' << p.iy << '\n';
}

SensorSet read_geometry(std::istream& is)
{
    std::string line;
    if (!std::getline(is, line) || line.rfind("# sdoa-geometry", 0) != 0)
        throw DataError("geometry file: missing '# sdoa-geometry' header");
    GridSpec grid;
    {
        if (!std::getline(is, line))
            throw DataError("geometry file: missing grid line");
        std::istringstream ls(line);
        std::string kd, kx, ky;
        if (!(ls >> kd >> grid.spacing >> kx >> grid.nx >> ky >> grid.ny) || kd != "d" || kx != "nx" ||
            ky != "ny")
            throw DataError("geometry file: malformed grid line '" + line + "'");
    }
    std::vector<GridPos> pos;
    int lineno = 2;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#')
            continue;
        std::istringstream ls(line);
        GridPos p;
        if (!(ls >> p.ix >> p.iy))
            throw DataError("geometry file: malformed sensor on line " + std::to_string(lineno));
        pos.push_back(p);
    }
    try {
        return SensorSet(std::move(pos), grid);
    } catch (const PreconditionError& e) {
        throw DataError(std::string("geometry file: ") + e.what());
    }
}

} // namespace sdoa
