#include <doctest.h>

#include <set>
#include <sstream>

#include "sdoa/error.hpp"
#include "sdoa/geometry.hpp"

using namespace sdoa;

namespace {

// Oracle: largest centered hole-free rectangle by exhaustive search over all (mx, my).
CoherentSegment brute_segment(const std::set<std::pair<int, int>>& diffs, int lim)
{
    CoherentSegment best{0, 0};
    for (int mx = 0; mx <= lim; ++mx)
        for (int my = 0; my <= lim; ++my) {
            bool ok = true;
            for (int x = -mx; x <= mx && ok; ++x)
                for (int y = -my; y <= my && ok; ++y)
                    ok = diffs.count({x, y}) != 0;
            if (!ok)
                continue;
            const CoherentSegment s{mx, my};
            if (s.count() > best.count() ||
                (s.count() == best.count() && std::min(s.mx, s.my) > std::min(best.mx, best.my)))
                best = s;
        }
    return best;
}

std::set<std::pair<int, int>> brute_diffs(const SensorSet& s)
{
    std::set<std::pair<int, int>> d;
    for (const auto& a : s.positions())
        for (const auto& b : s.positions())
            d.insert({a.ix - b.ix, a.iy - b.iy});
    return d;
}

} // namespace

TEST_SUITE("geometry") {

TEST_CASE("catalog sensor counts")
{
    const std::size_t expected[] = {64, 22, 21, 25, 22, 23};
    const auto cat = geometry_catalog(1);
    REQUIRE(cat.size() == 6);
    for (std::size_t i = 0; i < cat.size(); ++i)
        CHECK(build_geometry(cat[i]).size() == expected[i]);
}

TEST_CASE("nested is the product of the ruler {0,1,2,5,7}")
{
    const SensorSet s = build_geometry({GeometryFamily::Nested});
    const int ruler[] = {0, 1, 2, 5, 7};
    for (int y : ruler)
        for (int x : ruler)
            CHECK(s.contains({x, y}));
}

TEST_CASE("1-D nested example is hole-free over [-11, 11]")
{
    std::vector<GridPos> p;
    for (int x : {0, 1, 2, 3, 7, 11})
        p.push_back({x, 0});
    const SensorSet s(p, {1.0, 12, 1});
    const CoArray c = difference_coarray(s);
    CHECK(c.size() == 23);
    for (int m = -11; m <= 11; ++m)
        CHECK(c.contains({m, 0}));
    CHECK(c.multiplicity({0, 0}) == 6);
    CHECK(coherent_segment(c) == CoherentSegment{11, 0});
}

TEST_CASE("co-array matches the brute-force difference set")
{
    for (const auto& kind : geometry_catalog(12345)) {
        const SensorSet s = build_geometry(kind);
        const CoArray c = difference_coarray(s);
        const auto oracle = brute_diffs(s);
        CHECK(c.size() == oracle.size());
        long total = 0;
        for (const auto& [m, n] : c.offsets()) {
            CHECK(oracle.count({m.ix, m.iy}) == 1);
            CHECK(n == c.multiplicity({-m.ix, -m.iy})); // symmetric
            total += n;
        }
        CHECK(total == static_cast<long>(s.size() * s.size()));
        CHECK(coherent_segment(c).count() == brute_segment(oracle, 7).count());
    }
}

TEST_CASE("coherent segments of the catalog")
{
    const auto seg = [](GeometryFamily f) { return coherent_segment(difference_coarray(build_geometry({f}))); };
    CHECK(seg(GeometryFamily::URA) == CoherentSegment{7, 7});
    CHECK(seg(GeometryFamily::Nested) == CoherentSegment{7, 7});
    CHECK(seg(GeometryFamily::OpenBox) == CoherentSegment{7, 7});
    CHECK(seg(GeometryFamily::Billboard) == CoherentSegment{7, 7});
    CHECK(seg(GeometryFamily::Coprime) == CoherentSegment{4, 4});
}

TEST_CASE("random geometry is seeded and keeps the corners")
{
    const SensorSet a = build_geometry({GeometryFamily::Random, 7});
    const SensorSet b = build_geometry({GeometryFamily::Random, 7});
    const SensorSet c = build_geometry({GeometryFamily::Random, 8});
    CHECK(a == b);
    CHECK_FALSE(a == c);
    for (GridPos p : {GridPos{0, 0}, GridPos{7, 0}, GridPos{0, 7}, GridPos{7, 7}})
        CHECK(a.contains(p));
}

TEST_CASE("sensor set validation")
{
    CHECK_THROWS_AS(SensorSet({}, {}), PreconditionError);
    CHECK_THROWS_AS(SensorSet({{1, 1}, {1, 1}}, {}), PreconditionError);
    CHECK_THROWS_AS(SensorSet({{8, 0}}, {}), PreconditionError);
    CHECK_THROWS_AS(build_geometry({GeometryFamily::Coprime}, {1e-2, 6, 6}), PreconditionError);
    CHECK_THROWS_AS(build_geometry({GeometryFamily::Billboard}, {1e-2, 8, 6}), PreconditionError);
    const SensorSet s({{3, 2}, {0, 0}, {1, 0}}, {});
    CHECK(s.positions().front() == GridPos{0, 0});
    CHECK(s.positions().back() == GridPos{3, 2});
    CHECK(s.channel_index({3, 2}) == 19);
}

TEST_CASE("geometry kind parsing")
{
    CHECK(parse_geometry_kind("OpenBox") == GeometryKind{GeometryFamily::OpenBox});
    CHECK(parse_geometry_kind("random:42") == GeometryKind{GeometryFamily::Random, 42});
    CHECK(to_string(parse_geometry_kind("random:42")) == "random:42");
    CHECK_THROWS_AS(parse_geometry_kind("hexagon"), PreconditionError);
    CHECK_THROWS_AS(parse_geometry_kind("random:x"), PreconditionError);
}

TEST_CASE("geometry file round trip and malformed input")
{
    const SensorSet s = build_geometry({GeometryFamily::Random, 3});
    std::stringstream ss;
    write_geometry(ss, s);
    CHECK(read_geometry(ss) == s);

    std::istringstream bad1("not a header\n");
    CHECK_THROWS_AS(read_geometry(bad1), DataError);
    std::istringstream bad2("# sdoa-geometry\nd 0.01 nx 8 ny 8\n1 x\n");
    CHECK_THROWS_AS(read_geometry(bad2), DataError);
    std::istringstream bad3("# sdoa-geometry\nd 0.01 nx 8 ny 8\n9 0\n");
    CHECK_THROWS_AS(read_geometry(bad3), DataError);
}

}
