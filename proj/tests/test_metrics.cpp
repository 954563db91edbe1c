#include <doctest.h>

#include <cmath>
#include <numbers>

#include "sdoa/angular_grid.hpp"
#include "sdoa/error.hpp"
#include "sdoa/estimators.hpp"
#include "sdoa/metrics.hpp"
#include "sdoa/random.hpp"

using namespace sdoa;

TEST_SUITE("metrics") {

TEST_CASE("spherical error closed forms")
{
    CHECK(spherical_error({10.0, 20.0}, {10.0, 50.0}) == doctest::Approx(30.0));
    CHECK(spherical_error({0.0, 90.0}, {37.0, 90.0}) == doctest::Approx(37.0));
    CHECK(spherical_error({0.0, 90.0}, {180.0, 90.0}) == doctest::Approx(180.0));
    CHECK(spherical_error({123.0, 0.0}, {300.0, 0.0}) == doctest::Approx(0.0).scale(1.0));
    CHECK(spherical_error({0.0, 45.0}, {90.0, 45.0}) == doctest::Approx(60.0)); // acos(1/2)

    Rng rng(1);
    for (int i = 0; i < 200; ++i) {
        const Direction a{360 * rng.uniform(), 90 * rng.uniform()};
        const Direction b{360 * rng.uniform(), 90 * rng.uniform()};
        const Direction c{360 * rng.uniform(), 90 * rng.uniform()};
        const double ab = spherical_error(a, b);
        CHECK(ab == doctest::Approx(spherical_error(b, a)));
        CHECK(ab >= 0.0);
        CHECK(ab <= spherical_error(a, c) + spherical_error(c, b) + 1e-9);
        const double cosv = std::cos(a.elevation * std::numbers::pi / 180) * std::cos(b.elevation * std::numbers::pi / 180) +
                            std::sin(a.elevation * std::numbers::pi / 180) * std::sin(b.elevation * std::numbers::pi / 180) *
                                std::cos((a.azimuth - b.azimuth) * std::numbers::pi / 180);
        CHECK(ab == doctest::Approx(std::acos(std::clamp(cosv, -1.0, 1.0)) * 180 / std::numbers::pi).epsilon(1e-6));
    }
}

TEST_CASE("percentiles use linear interpolation between order statistics")
{
    std::vector<double> v;
    for (int i = 100; i >= 1; --i)
        v.push_back(i);
    CHECK(percentile(v, 0.95) == doctest::Approx(95.05));
    CHECK(percentile(v, 0.5) == doctest::Approx(50.5));
    CHECK(percentile(v, 0.0) == 1.0);
    CHECK(percentile(v, 1.0) == 100.0);
    CHECK(percentile(std::vector<double>{3.0}, 0.3) == 3.0);
    CHECK_THROWS_AS(percentile(std::vector<double>{}, 0.5), PreconditionError);
    CHECK_THROWS_AS(percentile(v, 1.5), PreconditionError);
}

TEST_CASE("error summary with elevation filter")
{
    const std::vector<double> e{1.0, 2.0, 3.0, 10.0};
    const std::vector<Direction> t{{0, 10}, {0, 20}, {0, 30}, {0, 80}};
    const auto all = error_summary(e);
    CHECK(all.mean == doctest::Approx(4.0));
    CHECK(all.excluded == 0);
    const auto cut = error_summary(e, t, 60.0);
    CHECK(cut.excluded == 1);
    CHECK(cut.mean == doctest::Approx(2.0));
    CHECK(cut.p50 == doctest::Approx(2.0));
    CHECK(cut.p95 == doctest::Approx(2.9));
    CHECK_THROWS_AS(error_summary(e, t, 5.0), PreconditionError);
    CHECK_THROWS_AS(error_summary(std::vector<double>{-1.0}), PreconditionError);
    CHECK_THROWS_AS(error_summary(e, std::vector<Direction>{{0, 0}}, 60.0), PreconditionError);
}

TEST_CASE("field-of-view fraction is the spherical cap over the hemisphere")
{
    CHECK(fov_fraction(75.0) == doctest::Approx(0.7412).epsilon(5e-4 / 0.7412));
    CHECK(fov_fraction(90.0) == doctest::Approx(1.0));
    CHECK(fov_fraction(60.0) == doctest::Approx(0.5));
    // Monte Carlo over the hemisphere, area-uniform.
    Rng rng(3);
    int inside = 0;
    const int n = 200000;
    for (int i = 0; i < n; ++i)
        inside += std::acos(rng.uniform()) * 180 / std::numbers::pi <= 40.0;
    CHECK(inside / double(n) == doctest::Approx(fov_fraction(40.0)).epsilon(0.01));
    CHECK_THROWS_AS(fov_fraction(0.0), PreconditionError);
    CHECK_THROWS_AS(fov_fraction(91.0), PreconditionError);
}

TEST_CASE("beam metrics of the full array and a single sensor")
{
    const AngularGrid grid = AngularGrid::with_counts(360, 200);
    const SensorSet u = build_geometry({GeometryFamily::URA});
    const auto m = beam_metrics(das_beampattern(u, {0, 0}, 20000.0, 343.2, grid));
    CHECK(m.peak.elevation == 0.0);
    CHECK(m.mlm == doctest::Approx(0.0).scale(1.0));
    CHECK(m.mlw == doctest::Approx(13.57).epsilon(0.01));
    REQUIRE(m.mslr.has_value());
    CHECK(*m.mslr > 12.0);
    CHECK(*m.mslr < 13.5); // continuous-aperture theory gives ~13.3 dB for the first sidelobe

    const auto low = beam_metrics(das_beampattern(u, {0, 0}, 10000.0, 343.2, grid));
    CHECK(low.mlw / m.mlw == doctest::Approx(2.0).epsilon(0.15));

    const SensorSet one({{4, 4}}, GridSpec{});
    const auto flat = beam_metrics(das_beampattern(one, {0, 0}, 20000.0, 343.2, grid));
    CHECK_FALSE(flat.mslr.has_value());
    CHECK_FALSE(flat.sidelobe.has_value());

    Pseudospectrum lin{grid, Eigen::MatrixXd::Ones(grid.el_count(), grid.az_count()), Pseudospectrum::Scale::Linear, ""};
    CHECK_THROWS_AS(beam_metrics(lin), PreconditionError);
}

TEST_CASE("grid peaks: wrap-around and the broadside node")
{
    const AngularGrid grid(10.0, 10.0);
    Pseudospectrum p{grid, Eigen::MatrixXd::Zero(grid.el_count(), grid.az_count()), Pseudospectrum::Scale::Linear, ""};
    for (int j = 0; j < grid.el_count(); ++j)
        p.values.row(j).setConstant(-1e-3 * j); // slope towards broadside: no plateau maxima
    for (int i = 0; i < grid.az_count(); ++i)
        p.values(0, i) = 5.0; // broadside row is a single point
    p.values(4, 0) = 3.0;      // azimuth 0, neighbours across the wrap are 350
    p.values(4, 35) = 2.0;     // adjacent across the wrap: suppressed as non-maximum
    p.values(7, 18) = 1.0;
    const auto peaks = find_peaks(p, 10, 5.0);
    REQUIRE(peaks.size() == 3);
    CHECK(peaks[0].direction.elevation == 0.0);
    CHECK(peaks[1].direction == Direction{0.0, 40.0});
    CHECK(peaks[2].direction == Direction{180.0, 70.0});
    CHECK(find_peaks(p, 1, 5.0).size() == 1);
    // NMS radius larger than the 40 deg gap removes the second peak.
    CHECK(find_peaks(p, 10, 45.0).size() == 2);
}

}
