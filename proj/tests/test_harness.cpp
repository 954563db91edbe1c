#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <sstream>

#include "sdoa/error.hpp"
#include "sdoa/harness.hpp"
#include "sdoa/random.hpp"

using namespace sdoa;

namespace {

const char* kSmall = R"({
  "id": "t",
  "geometries": ["ura", "nested", "random:3"],
  "samples": 300,
  "sources": [{"random": true}, {"azimuth": 200, "elevation": 50, "level": 57}],
  "truth_max_elevation": 70,
  "truth_min_separation": 20,
  "noise": {"mode": "snr", "values": [5, 25]},
  "estimator": {"kind": "music", "min_peak_ratio": 0, "az_step": 2, "el_step": 2},
  "seed": 99,
  "trials": 6
})";

std::string csv(const ResultRecord& r, const ScenarioConfig& c)
{
    std::ostringstream os;
    write_trials_csv(os, r);
    write_summary_csv(os, r, c);
    return os.str();
}

} // namespace

TEST_SUITE("harness") {

TEST_CASE("config parses, validates and round-trips")
{
    const ScenarioConfig c = parse_config(kSmall);
    CHECK(c.geometries.size() == 3);
    CHECK(c.geometries[2] == GeometryKind{GeometryFamily::Random, 3});
    CHECK(c.sources[1].direction == Direction{200.0, 50.0});
    CHECK(c.cell_count() == 2);
    CHECK(c.source_count() == 2);
    const std::string once = serialize_config(c);
    CHECK(serialize_config(parse_config(once)) == once);

    const ScenarioConfig demo = default_demo_config();
    CHECK(serialize_config(parse_config(serialize_config(demo))) == serialize_config(demo));

    CHECK(parse_config(R"({"sources":[{"random":true}],"duration":0.5})").samples == 24000);
}

TEST_CASE("config errors name the offending field")
{
    const auto error_of = [](const std::string& text) -> std::string {
        try {
            parse_config(text);
        } catch (const ConfigError& e) {
            return e.what();
        }
        return "";
    };
    CHECK(error_of("{").find("not valid JSON") != std::string::npos);
    CHECK(error_of(R"({"sources":[{"random":true}],"trails":3})").find("unknown key 'trails'") != std::string::npos);
    CHECK(error_of(R"({"sources":[{"random":true}],"trials":"many"})").find("config.trials") != std::string::npos);
    CHECK(error_of(R"({"sources":[]})").find("config.sources") != std::string::npos);
    CHECK(error_of(R"({"sources":[{"azimuth":10}]})").find("config.sources[0]") != std::string::npos);
    CHECK(error_of(R"({"sources":[{"random":true}],"geometries":["hexagon"]})").find("config.geometries") !=
          std::string::npos);
    CHECK(error_of(R"({"sources":[{"random":true}],"estimator":{"kind":"srp-phat"}})").find("passband") !=
          std::string::npos);
    CHECK(error_of(R"({"sources":[{"random":true,"waveform":{"kind":"hadamard"}}]})").find("passband") !=
          std::string::npos);
    CHECK(error_of(R"({"sources":[{"random":true}],"noise":{"mode":"snr"}})").find("config.noise.values") !=
          std::string::npos);
    CHECK(error_of(R"({"sources":[{"random":true}],"geometries":["coprime"],"grid":{"nx":6,"ny":6}})")
              .find("coprime") != std::string::npos);
    CHECK(error_of(R"({"sources":[{"random":true, "frequency": 25000}]})").find("frequency") != std::string::npos);
    CHECK_THROWS_AS(load_config("/nonexistent/cfg.json"), ConfigError);
}

TEST_CASE("Hungarian assignment equals exhaustive search")
{
    Rng rng(8);
    for (int t = 0; t < 50; ++t) {
        const int n = 1 + t % 4;
        const int m = n + t % 3;
        Eigen::MatrixXd cost(n, m);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < m; ++j)
                cost(i, j) = std::floor(10 * rng.uniform()); // ties on purpose
        const auto a = hungarian(cost);
        double got = 0;
        for (int i = 0; i < n; ++i)
            got += cost(i, a[i]);
        std::vector<int> cols(m);
        std::iota(cols.begin(), cols.end(), 0);
        double best = 1e18;
        do {
            double s = 0;
            for (int i = 0; i < n; ++i)
                s += cost(i, cols[i]);
            best = std::min(best, s);
        } while (std::next_permutation(cols.begin(), cols.end()));
        CHECK(got == doctest::Approx(best));
        std::vector<int> sorted = a;
        std::sort(sorted.begin(), sorted.end());
        CHECK(std::adjacent_find(sorted.begin(), sorted.end()) == sorted.end());
    }
    CHECK_THROWS_AS(hungarian(Eigen::MatrixXd::Zero(3, 2)), PreconditionError);
}

TEST_CASE("Monte-Carlo results do not depend on the thread count")
{
    ScenarioConfig c = parse_config(kSmall);
    c.threads = 1;
    const auto a = run_montecarlo(c);
    c.threads = 3;
    const auto b = run_montecarlo(c);
    CHECK(csv(a, c) == csv(b, c));
    REQUIRE(a.trials.size() == 2 * 3 * 6);
    CHECK(a.cells.size() == 6);
    // ordering (cell, geometry, trial)
    CHECK(a.trials[6].geometry == "nested");
    CHECK(a.trials[6].trial == 0);
    // common random numbers: same truths for a trial in every cell
    CHECK(a.trials[1].truths == a.trials[19].truths);
    // the fixed source stays put, the random one respects the cap and the separation
    for (const auto& t : a.trials) {
        CHECK(t.truths[1] == Direction{200.0, 50.0});
        CHECK(t.truths[0].elevation <= 70.0);
        CHECK(spherical_error(t.truths[0], t.truths[1]) >= 20.0);
    }
    c.seed = 100;
    CHECK(csv(run_montecarlo(c), c) != csv(a, c));
}

TEST_CASE("noise-free baseband scenes are recovered almost exactly")
{
    ScenarioConfig c = parse_config(R"({
      "geometries": ["ura", "billboard", "coprime", "nested", "openbox", "random:1"],
      "samples": 200, "sources": [{"random": true}], "truth_max_elevation": 75,
      "estimator": {"kind": "music", "min_peak_ratio": 0}, "seed": 5, "trials": 8})");
    const auto r = run_montecarlo(c);
    for (const auto& t : r.trials) {
        CHECK(t.status == "ok");
        CHECK(t.errors.at(0) <= 0.1);
    }
}

TEST_CASE("summary honours the elevation filter and failures are recorded")
{
    ScenarioConfig c = parse_config(kSmall);
    c.summary_max_elevation = 40.0;
    const auto r = run_montecarlo(c);
    for (const auto& cell : r.cells) {
        REQUIRE(cell.summary.has_value());
        CHECK(cell.summary->excluded > 0); // the fixed source is at 50 deg
    }

    // Two sources in one direction cannot be split by MUSIC with the prominence rule on.
    ScenarioConfig same = parse_config(R"({
      "samples": 300, "sources": [{"azimuth": 10, "elevation": 20}, {"azimuth": 10, "elevation": 20}],
      "noise": {"mode": "snr", "values": [20]}, "seed": 1, "trials": 2})");
    const auto f = run_montecarlo(same);
    CHECK(f.cells[0].failures == 2);
    CHECK_FALSE(f.cells[0].summary.has_value());
    CHECK(f.trials[0].status.rfind("failed", 0) == 0);
}

TEST_CASE("recording observation: calibration is applied before masking")
{
    const ScenarioConfig c = parse_config(R"({"chain": "passband", "samples": 4800, "settle": 0.03,
      "sources": [{"azimuth": 70, "elevation": 40}], "seed": 1})");
    SceneSpec scene;
    scene.samples = 4800;
    NarrowbandSource src;
    src.direction = {70.0, 40.0};
    scene.sources = {src};
    const SensorSet full = build_geometry({GeometryFamily::URA});
    const SensorSet nested = build_geometry({GeometryFamily::Nested});
    const RealSnapshots x = synthesize_scene(scene, full);

    const Observation clean = observe_recording(c, x, nested);
    const auto est = estimate_directions(c, clean);
    CHECK(spherical_error(est.at(0), src.direction) < 0.05);

    std::vector<double> amp(64), ph(64);
    Rng rng(6);
    for (int k = 0; k < 64; ++k) {
        amp[k] = 0.5 + rng.uniform();
        ph[k] = rng.normal();
    }
    const auto cal = CalibrationMatrix::from_factors(amp, ph);
    const Observation obs = observe_recording(c, x, nested, cal);
    // R_cal = D R D^H with D the nested rows of the calibration vector.
    Eigen::VectorXcd d(25);
    for (std::size_t k = 0; k < nested.size(); ++k)
        d(static_cast<Eigen::Index>(k)) = cal.values()(full.channel_index(nested.positions()[k]), 0);
    const Eigen::MatrixXcd expect = d.asDiagonal() * clean.covariance.R * d.conjugate().asDiagonal();
    CHECK((obs.covariance.R - expect).norm() < 1e-9 * expect.norm());

    // Undoing a gain error restores the clean covariance.
    Eigen::MatrixXd bent = x.samples;
    for (int k = 0; k < 64; ++k)
        bent.row(k) *= amp[k];
    std::vector<double> inv(64), zero(64, 0.0);
    for (int k = 0; k < 64; ++k)
        inv[k] = 1.0 / amp[k];
    const Observation fixed = observe_recording(c, RealSnapshots(bent, x.fs, full), nested,
                                                CalibrationMatrix::from_factors(inv, zero));
    CHECK((fixed.covariance.R - clean.covariance.R).norm() < 1e-9 * clean.covariance.R.norm());
}

TEST_CASE("a saved passband recording reproduces the simulated observation")
{
    const ScenarioConfig c = parse_config(R"({"geometries": ["nested", "openbox"], "chain": "passband",
      "samples": 4800, "settle": 0.03, "sources": [{"random": true}],
      "noise": {"mode": "snr", "values": [20], "in_band": 200}, "seed": 12})");
    const TrialScene ts = simulate_trial(c, 0, 3);
    REQUIRE(ts.recording.has_value());
    CHECK(ts.recording->channel_count() == 64);
    for (std::size_t g = 0; g < 2; ++g) {
        const Observation o = observe_recording(c, *ts.recording, ts.observations[g].sensors);
        CHECK((o.covariance.R - ts.observations[g].covariance.R).norm() <=
              1e-12 * ts.observations[g].covariance.R.norm());
    }
    CHECK_FALSE(simulate_trial(parse_config(kSmall), 0, 0).recording.has_value());
}

TEST_CASE("multi-source demo recovers three coded tags")
{
    const ScenarioConfig c = default_demo_config();
    const DemoResult r = run_multisource_demo(c, 0);
    REQUIRE(r.tags.size() == 3);
    for (const auto& t : r.tags) {
        CHECK(t.error <= 2.0);
        CHECK(t.truth.elevation <= 60.0);
    }
    CHECK(r.spectrum.values.size() > 0);
    CHECK(run_multisource_demo(c, 0).tags[1].estimate == r.tags[1].estimate);
}

TEST_CASE("beampattern suite covers the catalog")
{
    BeamSuiteOptions opt;
    opt.grid = AngularGrid::with_counts(180, 100);
    const auto rows = run_beampattern_suite(opt);
    REQUIRE(rows.size() == 6);
    CHECK(rows[0].sensors == 64);
    CHECK(rows[0].metrics.mlm == doctest::Approx(0.0).scale(1.0));
    for (const auto& r : rows)
        CHECK(r.metrics.mlm == doctest::Approx(20 * std::log10(r.sensors / 64.0)).epsilon(1e-9).scale(1.0));
    std::ostringstream os;
    write_beam_table(os, rows);
    CHECK(os.str().find("openbox") != std::string::npos);
}

}
