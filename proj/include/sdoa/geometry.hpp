#pragma once

#include <compare>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

namespace sdoa {

// Physical sampling grid of the array. Default is the 8x8 board at 8.255 mm pitch.
struct GridSpec {
    double spacing = 8.255e-3; // meters
    int nx = 8;
    int ny = 8;

    void validate() const;
    int cells() const { return nx * ny; }
    bool operator==(const GridSpec&) const = default;
};

struct GridPos {
    int ix = 0;
    int iy = 0;

    // Row-major ordering (iy major, ix minor) matches the channel map.
    auto operator<=>(const GridPos& o) const
    {
        if (auto c = iy <=> o.iy; c != 0)
            return c;
        return ix <=> o.ix;
    }
    bool operator==(const GridPos&) const = default;
};

// Integer co-array offset (mx, my), ordered row-major like GridPos.
using Offset = GridPos;

// A set of occupied grid cells. Positions are kept sorted by row-major channel index.
class SensorSet {
public:
    SensorSet(std::vector<GridPos> positions, GridSpec grid);

    const std::vector<GridPos>& positions() const { return positions_; }
    const GridSpec& grid() const { return grid_; }
    std::size_t size() const { return positions_.size(); }

    bool contains(GridPos p) const;
    int channel_index(GridPos p) const { return p.iy * grid_.nx + p.ix; }

    // Physical coordinates (x, y) in meters relative to the grid origin, one row per sensor.
    Eigen::MatrixX2d coordinates() const;

    bool operator==(const SensorSet&) const = default;

private:
    std::vector<GridPos> positions_;
    GridSpec grid_;
};

enum class GeometryFamily { URA, Nested, Coprime, Billboard, OpenBox, Random };

struct GeometryKind {
    GeometryFamily family = GeometryFamily::URA;
    std::uint64_t seed = 0; // used by Random only

    bool operator==(const GeometryKind&) const = default;
};

std::string to_string(GeometryKind kind);
// Accepts "ura", "nested", "coprime", "billboard", "openbox", "random" and "random:<seed>".
GeometryKind parse_geometry_kind(std::string_view text);
// All six catalog geometries, Random with the given seed.
std::vector<GeometryKind> geometry_catalog(std::uint64_t random_seed = 1);

// Number of cells the Random geometry draws.
inline constexpr int kRandomSensorCount = 23;

SensorSet build_geometry(GeometryKind kind, const GridSpec& grid = {});

class CoArray {
public:
    explicit CoArray(std::map<Offset, int> multiplicities) : offsets_(std::move(multiplicities)) {}

    const std::map<Offset, int>& offsets() const { return offsets_; }
    int multiplicity(Offset m) const;
    bool contains(Offset m) const { return offsets_.count(m) != 0; }
    std::size_t size() const { return offsets_.size(); }

private:
    std::map<Offset, int> offsets_;
};

// Half-extents of the centered hole-free rectangle [-mx..mx] x [-my..my].
struct CoherentSegment {
    int mx = 0;
    int my = 0;

    int width() const { return 2 * mx + 1; }
    int height() const { return 2 * my + 1; }
    int count() const { return width() * height(); }
    // Row-major position of offset (ox, oy) inside the segment.
    int index(int ox, int oy) const { return (oy + my) * width() + (ox + mx); }
    bool contains(int ox, int oy) const { return ox >= -mx && ox <= mx && oy >= -my && oy <= my; }
    bool operator==(const CoherentSegment&) const = default;
};

CoArray difference_coarray(const SensorSet& s);
CoherentSegment coherent_segment(const CoArray& c);

// Text format: "# sdoa-geometry" header line, "d <m> nx <n> ny <n>", then one "ix iy" per line.
void write_geometry(std::ostream& os, const SensorSet& s);
SensorSet read_geometry(std::istream& is);

} // namespace sdoa
