// Acceptance runner: one PASS/FAIL line per criterion, non-zero exit if any fails.
// Usage: acceptance [criterion numbers...]   (default: all)

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>
#include <string>

#include <Eigen/Eigenvalues>

#include "sdoa/harness.hpp"
#include "sdoa/log.hpp"
#include "sdoa/random.hpp"

using namespace sdoa;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, auto... args)
{
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

bool within(double v, double target, double tol)
{
    return std::abs(v - target) <= tol;
}

const BeamRow& row(const std::vector<BeamRow>& rows, GeometryFamily f)
{
    for (const auto& r : rows)
        if (r.kind.family == f)
            return r;
    throw std::runtime_error("geometry missing from the suite");
}

Outcome c1_table()
{
    const BeamSuiteOptions opt;
    const auto rows = run_beampattern_suite(opt);
    const double step = opt.grid.el_step();
    const auto& u = row(rows, GeometryFamily::URA).metrics;
    const auto& ob = row(rows, GeometryFamily::OpenBox).metrics;
    const auto& cp = row(rows, GeometryFamily::Coprime).metrics;
    const bool ok = within(u.mlw, 13.57, step) && u.mslr && within(*u.mslr, 12.80, 0.5) && u.msls &&
                    within(*u.msls, 21.71, 2.0) && within(ob.mlw, 9.95, step) && cp.msls && within(*cp.msls, 90.0, 2.0);
    return {ok, fmt("URA MLW %.2f MSLR %.2f MSLS %.2f, OpenBox MLW %.2f, Coprime MSLS %.2f (grid step %.3f)", u.mlw,
                    u.mslr.value_or(NAN), u.msls.value_or(NAN), ob.mlw, cp.msls.value_or(NAN), step)};
}

Outcome c2_mlm()
{
    const auto rows = run_beampattern_suite(BeamSuiteOptions{});
    const int expect[6] = {64, 22, 21, 25, 22, 23};
    bool ok = rows.size() == 6;
    std::string d;
    for (std::size_t i = 0; i < rows.size() && i < 6; ++i) {
        const double ref = 20.0 * std::log10(expect[i] / 64.0);
        ok = ok && static_cast<int>(rows[i].sensors) == expect[i] && within(rows[i].metrics.mlm, ref, 0.01);
        d += fmt("%s k=%zu %.2f dB; ", to_string(rows[i].kind).c_str(), rows[i].sensors, rows[i].metrics.mlm);
    }
    return {ok, d};
}

Outcome c3_fmax()
{
    const double f = max_frequency(8.255e-3, 343.2);
    return {within(f, 20788.0, 1.0), fmt("f_max = %.2f Hz", f)};
}

Outcome c4_fov()
{
    const double v = fov_fraction(75.0);
    return {within(v, 0.7412, 0.0005), fmt("fov_fraction(75) = %.5f", v)};
}

Outcome c5_coarray()
{
    std::vector<GridPos> p;
    for (int x : {0, 1, 2, 3, 7, 11})
        p.push_back({x, 0});
    const CoArray c = difference_coarray(SensorSet(p, GridSpec{8.255e-3, 12, 1}));
    bool holes = false;
    for (int m = -11; m <= 11; ++m)
        holes = holes || !c.contains({m, 0});
    const CoherentSegment s1 = coherent_segment(c);
    const CoherentSegment sn = coherent_segment(difference_coarray(build_geometry({GeometryFamily::Nested})));
    const CoherentSegment so = coherent_segment(difference_coarray(build_geometry({GeometryFamily::OpenBox})));
    const bool ok = !holes && s1.width() == 23 && s1.mx == 11 && sn == CoherentSegment{7, 7} &&
                    so == CoherentSegment{7, 7};
    return {ok, fmt("1-D nested: %d virtual sensors, holes %s; Nested (%d,%d), OpenBox (%d,%d)", s1.width(),
                    holes ? "yes" : "no", sn.mx, sn.my, so.mx, so.my)};
}

Outcome c6_sweep(const fs::path& configs)
{
    const ScenarioConfig cfg = load_config(configs / "sweep.json");
    bool sweep_ok = cfg.trials == 200 && cfg.samples == 1000 && cfg.noise.values == std::vector<double>{-10, 0, 10, 20, 30};
    const ResultRecord r = run_montecarlo(cfg);
    const std::size_t ng = cfg.geometries.size();
    const auto mean = [&](std::size_t cell, std::size_t g) {
        const auto& s = r.cells.at(cell * ng + g).summary;
        return s ? s->mean : INFINITY;
    };
    bool monotone = true;
    bool ordering = true;
    for (std::size_t g = 0; g < ng; ++g)
        for (std::size_t cell = 1; cell < cfg.cell_count(); ++cell)
            monotone = monotone && mean(cell, g) <= mean(cell - 1, g);
    for (std::size_t cell = 0; cell < cfg.cell_count(); ++cell)
        for (std::size_t g = 1; g < ng; ++g)
            ordering = ordering && mean(cell, 0) <= mean(cell, g);
    std::string d = fmt("monotone %s, URA best %s; URA means:", monotone ? "yes" : "no", ordering ? "yes" : "no");
    for (std::size_t cell = 0; cell < cfg.cell_count(); ++cell)
        d += fmt(" %.4f", mean(cell, 0));
    d += fmt("; %.0f s", r.wall_seconds);
    return {sweep_ok && monotone && ordering && r.wall_seconds < 600.0, d};
}

Outcome c7_subspace()
{
    Rng rng(77);
    double worst_eig = 0.0;
    for (int t = 0; t < 100; ++t) {
        const int n = 2 + static_cast<int>(rng.uniform() * 63);
        Eigen::MatrixXcd b(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                b(i, j) = cdouble(rng.normal(), rng.normal());
        const Eigen::MatrixXcd r = 0.5 * (b + b.adjoint());
        const EigenPair e = eig_hermitian(r);
        worst_eig = std::max(worst_eig, (e.vectors * e.values.asDiagonal() * e.vectors.adjoint() - r).norm());
    }

    const SensorSet nested = build_geometry({GeometryFamily::Nested});
    bool smoothing_ok = true;
    for (int m = 1; m <= 3; ++m)
        for (int w : {4, 6, 8}) {
            std::vector<Direction> dirs;
            for (int q = 0; q < m; ++q)
                dirs.push_back({360.0 * rng.uniform(), 10.0 + 60.0 * rng.uniform()});
            const Eigen::MatrixXcd A = steering_matrix(nested, dirs, 20000.0);
            const auto z = coarray_observation(CovarianceMatrix{A * A.adjoint(), 1}, nested);
            const auto sm = spatial_smoothing(z, w, w);
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(sm.R);
            const auto& ev = es.eigenvalues();
            int rank = 0;
            for (Eigen::Index i = 0; i < ev.size(); ++i)
                rank += ev(i) > 1e-8 * ev.maxCoeff();
            smoothing_ok = smoothing_ok && (sm.R - sm.R.adjoint()).norm() < 1e-12 * sm.R.norm() &&
                           ev.minCoeff() > -1e-9 * ev.maxCoeff() && rank == m;
        }

    const SensorSet ura = build_geometry({GeometryFamily::URA});
    MusicOptions opt;
    double worst_music = 0.0;
    for (int t = 0; t < 50; ++t) {
        const double lo = std::cos(75.0 * std::numbers::pi / 180.0);
        const double el = std::acos(1.0 - rng.uniform() * (1.0 - lo)) * 180.0 / std::numbers::pi;
        const Direction d{360.0 * rng.uniform(), el};
        const Eigen::VectorXcd a = steering_vector(ura, d, 20000.0);
        const CovarianceMatrix r{a * a.adjoint(), 1};
        worst_music = std::max(worst_music, spherical_error(music(r, ura, opt).directions.at(0), d));
    }
    return {worst_eig < 1e-10 && smoothing_ok && worst_music <= 0.1,
            fmt("eig residual %.2e, smoothed PSD rank=m %s, noise-free MUSIC worst %.4f deg", worst_eig,
                smoothing_ok ? "yes" : "no", worst_music)};
}

Outcome c8_demo()
{
    const auto t0 = std::chrono::steady_clock::now();
    const ScenarioConfig cfg = default_demo_config();
    int good = 0;
    double worst = 0.0;
    for (int run = 0; run < 100; ++run) {
        try {
            const DemoResult r = run_multisource_demo(cfg, run);
            bool all = r.tags.size() == 3;
            for (const auto& t : r.tags) {
                all = all && t.error <= 2.0;
                worst = std::max(worst, t.error);
            }
            good += all;
        } catch (const EstimationError&) {
        }
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return {good >= 95 && secs < 300.0,
            fmt("%d/100 runs with all tags <= 2 deg (worst tag error %.3f deg), %.0f s", good, worst, secs)};
}

Outcome c9_cross()
{
    ScenarioConfig cfg = parse_config(R"({"id": "cross", "geometries": ["ura"], "chain": "passband",
      "samples": 9600, "settle": 0.03, "sources": [{"random": true}], "truth_max_elevation": 60,
      "noise": {"mode": "snr", "values": [30], "in_band": 200},
      "estimator": {"kind": "srp-phat"}, "seed": 9, "trials": 50})");
    double worst = 0.0;
    for (int seed = 0; seed < 50; ++seed) {
        const TrialScene ts = simulate_trial(cfg, 0, seed);
        const Observation& obs = ts.observations.at(0);
        ScenarioConfig c = cfg;
        const Direction srp = estimate_directions(c, obs).at(0);
        c.estimator.kind = EstimatorKind::Music;
        const Direction mus = estimate_directions(c, obs).at(0);
        c.estimator.kind = EstimatorKind::Esprit;
        const Direction esp = estimate_directions(c, obs).at(0);
        worst = std::max({worst, spherical_error(mus, esp), spherical_error(mus, srp), spherical_error(esp, srp)});
    }
    return {worst <= 2.0, fmt("worst pairwise disagreement %.3f deg over 50 seeds", worst)};
}

Outcome c10_determinism(const fs::path& configs, const std::string& cli)
{
    const fs::path base = fs::temp_directory_path() / "sdoa_acceptance_c10";
    fs::remove_all(base);
    for (const char* run : {"a", "b"}) {
        const std::string cmd = "\"" + cli + "\" -q montecarlo -c \"" + (configs / "quick.json").string() + "\" -o \"" +
                                (base / run).string() + "\" > /dev/null";
        if (std::system(cmd.c_str()) != 0)
            return {false, "montecarlo command failed: " + cmd};
    }
    const auto slurp = [](const fs::path& p) {
        std::ifstream is(p, std::ios::binary);
        std::stringstream ss;
        ss << is.rdbuf();
        return ss.str();
    };
    bool same = true;
    std::size_t bytes = 0;
    for (const char* f : {"trials.csv", "summary.csv"}) {
        const std::string a = slurp(base / "a" / f);
        same = same && !a.empty() && a == slurp(base / "b" / f);
        bytes += a.size();
    }
    return {same, fmt("trials.csv + summary.csv byte-identical across runs: %s (%zu bytes)", same ? "yes" : "no", bytes)};
}

} // namespace

int main(int argc, char** argv)
{
    set_warnings_enabled(false);
    std::set<int> only;
    for (int i = 1; i < argc; ++i)
        only.insert(std::atoi(argv[i]));

    const fs::path configs = SDOA_CONFIG_DIR;
    const std::string cli = SDOA_CLI_PATH;
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"reference beampattern metrics", c1_table},
        {"MLM equals 20 log10(k/64)", c2_mlm},
        {"spatial Nyquist frequency", c3_fmax},
        {"field-of-view fraction", c4_fov},
        {"co-array properties", c5_coarray},
        {"Monte-Carlo SNR sweep", [&] { return c6_sweep(configs); }},
        {"subspace correctness", c7_subspace},
        {"multi-source demo", c8_demo},
        {"cross-estimator agreement", c9_cross},
        {"montecarlo determinism", [&] { return c10_determinism(configs, cli); }},
    };

    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const int id = static_cast<int>(i) + 1;
        if (!only.empty() && !only.count(id))
            continue;
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        failed += !o.pass;
        std::cout << "criterion " << id << ": " << (o.pass ? "PASS" : "FAIL") << "  " << criteria[i].first << ": "
                  << o.detail << fmt("  [%.1f s]", secs) << std::endl;
    }
    return failed == 0 ? 0 : 1;
}
