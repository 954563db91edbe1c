#include "sdoa/harness.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <numbers>
#include <thread>

#include "sdoa/error.hpp"
#include "sdoa/random.hpp"

namespace sdoa {

namespace {

constexpr double kPi = std::numbers::pi;

SensorSet full_grid(const GridSpec& g)
{
    return build_geometry({GeometryFamily::URA}, g);
}

// Area-uniform over the cap elevation <= max_el.
Direction draw_direction(Rng& rng, double max_el)
{
    const double lo = std::cos(max_el * kPi / 180.0);
    const double cos_el = 1.0 - rng.uniform() * (1.0 - lo);
    const double az = 360.0 * rng.uniform();
    return normalized(az, std::acos(std::clamp(cos_el, -1.0, 1.0)) * 180.0 / kPi);
}

std::vector<Direction> draw_truths(const ScenarioConfig& cfg, std::uint64_t seed)
{
    Rng rng(derive_seed(seed, 1));
    std::vector<Direction> out;
    for (const auto& s : cfg.sources) {
        if (!s.random_direction) {
            out.push_back(s.direction);
            continue;
        }
        for (int attempt = 0;; ++attempt) {
            if (attempt > 100000)
                throw ConfigError("config.truth_min_separation: cannot place the random sources");
            const Direction d = draw_direction(rng, cfg.truth_max_elevation);
            const bool far = std::all_of(out.begin(), out.end(), [&](const Direction& o) {
                return spherical_error(o, d) >= cfg.truth_min_separation;
            });
            if (far) {
                out.push_back(d);
                break;
            }
        }
    }
    return out;
}

double loudest_level(const ScenarioConfig& cfg)
{
    double l = -std::numeric_limits<double>::infinity();
    for (const auto& s : cfg.sources)
        l = std::max(l, s.level_db);
    return l;
}

ComplexSnapshots baseband_snapshots(const ScenarioConfig& cfg, const std::vector<Direction>& truths,
                                    std::optional<double> noise_db, std::uint64_t seed)
{
    const SensorSet all = full_grid(cfg.grid);
    const auto k = static_cast<Eigen::Index>(all.size());
    const auto n = static_cast<Eigen::Index>(cfg.samples);
    const double ref = loudest_level(cfg);
    Rng rng(derive_seed(seed, 2));
    const auto cn = [&rng](double sd) {
        const double re = rng.normal();
        const double im = rng.normal();
        return cdouble(re, im) * (sd / std::numbers::sqrt2);
    };

    Eigen::MatrixXcd y = Eigen::MatrixXcd::Zero(k, n);
    for (std::size_t q = 0; q < cfg.sources.size(); ++q) {
        const auto& src = cfg.sources[q];
        // SNR mode is relative to the loudest source (power 1); otherwise absolute pressure.
        const double amp = cfg.noise.mode == NoiseSpec::Mode::Snr
                               ? std::pow(10.0, (src.level_db - ref) / 20.0)
                               : kReferencePressure * std::pow(10.0, src.level_db / 20.0);
        const Eigen::VectorXcd a = steering_vector(all, truths[q], src.frequency, cfg.c);
        Eigen::RowVectorXcd s(n);
        for (Eigen::Index i = 0; i < n; ++i)
            s(i) = cn(amp);
        y.noalias() += a * s;
    }
    double sigma = 0.0;
    if (cfg.noise.mode == NoiseSpec::Mode::Snr)
        sigma = std::pow(10.0, -*noise_db / 20.0);
    else if (cfg.noise.mode == NoiseSpec::Mode::Spl)
        sigma = kReferencePressure * std::pow(10.0, *noise_db / 20.0);
    if (sigma > 0.0)
        for (Eigen::Index i = 0; i < n; ++i)
            for (Eigen::Index c = 0; c < k; ++c)
                y(c, i) += cn(sigma);
    return ComplexSnapshots(std::move(y), cfg.fs, all);
}

RealSnapshots passband_recording(const ScenarioConfig& cfg, const std::vector<Direction>& truths,
                                 std::optional<double> noise_db, std::uint64_t seed)
{
    SceneSpec scene;
    scene.fs = cfg.fs;
    scene.samples = cfg.samples;
    scene.c = cfg.c;
    scene.seed = derive_seed(seed, 2);
    Rng phases(derive_seed(seed, 3));
    for (std::size_t q = 0; q < cfg.sources.size(); ++q) {
        const auto& s = cfg.sources[q];
        scene.sources.push_back({truths[q], s.frequency, s.level_db, s.waveform, 2.0 * kPi * phases.uniform()});
    }
    scene.noise.mode = cfg.noise.mode;
    scene.noise.in_band_hz = cfg.noise.in_band_hz;
    if (noise_db)
        scene.noise.value_db = *noise_db;
    return synthesize_scene(scene, full_grid(cfg.grid));
}

ColumnRange covariance_columns(const ScenarioConfig& cfg, Eigen::Index n)
{
    const ColumnRange inner = interior_columns(n);
    const auto settle = static_cast<Eigen::Index>(std::ceil(cfg.settle_s * cfg.fs));
    const Eigen::Index start = std::max(inner.start, settle);
    const Eigen::Index stop = inner.start + inner.count;
    if (stop - start < 2)
        throw PreconditionError("too few samples left after dropping the filter transient");
    return {start, stop - start};
}

std::optional<double> cell_noise(const ScenarioConfig& cfg, std::size_t cell)
{
    if (cfg.noise.values.empty())
        return std::nullopt;
    return cfg.noise.values.at(cell);
}

void match(const std::vector<Direction>& truths, const std::vector<Direction>& est, TrialRecord& rec)
{
    rec.truths = truths;
    if (est.size() < truths.size()) {
        rec.status = "failed: fewer estimates than sources";
        return;
    }
    Eigen::MatrixXd cost(static_cast<Eigen::Index>(truths.size()), static_cast<Eigen::Index>(est.size()));
    for (std::size_t i = 0; i < truths.size(); ++i)
        for (std::size_t j = 0; j < est.size(); ++j)
            cost(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = spherical_error(est[j], truths[i]);
    const auto assign = hungarian(cost);
    for (std::size_t i = 0; i < truths.size(); ++i) {
        rec.estimates.push_back(est[static_cast<std::size_t>(assign[i])]);
        rec.errors.push_back(cost(static_cast<Eigen::Index>(i), assign[i]));
    }
}

} // namespace

std::vector<int> hungarian(const Eigen::MatrixXd& cost)
{
    const auto n = static_cast<int>(cost.rows());
    const auto m = static_cast<int>(cost.cols());
    require(n >= 1 && n <= m, "hungarian: need 1 <= rows <= cols");
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> u(n + 1, 0.0), v(m + 1, 0.0);
    std::vector<int> p(m + 1, 0), way(m + 1, 0);
    for (int i = 1; i <= n; ++i) {
        p[0] = i;
        int j0 = 0;
        std::vector<double> minv(m + 1, inf);
        std::vector<char> used(m + 1, 0);
        do {
            used[j0] = 1;
            const int i0 = p[j0];
            double delta = inf;
            int j1 = 0;
            for (int j = 1; j <= m; ++j) {
                if (used[j])
                    continue;
                const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (int j = 0; j <= m; ++j) {
                if (used[j]) {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (p[j0] != 0);
        do {
            const int j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
        } while (j0 != 0);
    }
    std::vector<int> out(static_cast<std::size_t>(n), -1);
    for (int j = 1; j <= m; ++j)
        if (p[j] != 0)
            out[static_cast<std::size_t>(p[j] - 1)] = j - 1;
    return out;
}

double TrialRecord::error() const
{
    if (errors.empty())
        return std::numeric_limits<double>::quiet_NaN();
    double s = 0.0;
    for (double e : errors)
        s += e;
    return s / static_cast<double>(errors.size());
}

Observation observe_recording(const ScenarioConfig& cfg, const RealSnapshots& x, const SensorSet& s,
                              const std::optional<CalibrationMatrix>& calibration)
{
    const ComplexSnapshots y = mask_channels(process_chain(x, cfg.filter, calibration), s);
    CovarianceMatrix cov = sample_covariance(y, covariance_columns(cfg, y.sample_count()));
    return {s, std::move(cov), mask_channels(x, s)};
}

TrialScene simulate_trial(const ScenarioConfig& cfg, std::size_t cell, int trial)
{
    TrialScene ts;
    // Common random numbers: every geometry and sweep cell of a trial sees the same scene and
    // the same unit noise realisation; only the noise level differs between cells.
    ts.seed = derive_seed(cfg.seed, static_cast<std::uint64_t>(trial));
    ts.truths = draw_truths(cfg, ts.seed);
    const auto noise = cell_noise(cfg, cell);
    if (cfg.chain == ChainMode::Baseband) {
        const ComplexSnapshots y = baseband_snapshots(cfg, ts.truths, noise, ts.seed);
        for (const auto& g : cfg.geometries) {
            SensorSet s = build_geometry(g, cfg.grid);
            CovarianceMatrix cov = sample_covariance(mask_channels(y, s));
            ts.observations.push_back({std::move(s), std::move(cov), std::nullopt});
        }
        return ts;
    }
    const RealSnapshots x = passband_recording(cfg, ts.truths, noise, ts.seed);
    const RealSnapshots xf = bandpass(x, cfg.filter);
    const ComplexSnapshots y = analytic(xf);
    const ColumnRange cols = covariance_columns(cfg, y.sample_count());
    for (const auto& g : cfg.geometries) {
        SensorSet s = build_geometry(g, cfg.grid);
        CovarianceMatrix cov = sample_covariance(mask_channels(y, s), cols);
        std::optional<RealSnapshots> raw;
        if (cfg.estimator.kind == EstimatorKind::SrpPhat)
            raw = mask_channels(x, s);
        ts.observations.push_back({std::move(s), std::move(cov), std::move(raw)});
    }
    ts.recording = x;
    return ts;
}

std::vector<Direction> estimate_directions(const ScenarioConfig& cfg, const Observation& obs,
                                           Pseudospectrum* spectrum)
{
    const int m = cfg.source_count();
    const double f = cfg.sources.at(0).frequency;
    const double d = cfg.grid.spacing;
    const AngularGrid grid(cfg.estimator.az_step, cfg.estimator.el_step);

    std::optional<SmoothedCovariance> rss;
    if (cfg.smoothing.enabled) {
        const auto z = coarray_observation(obs.covariance, obs.sensors, cfg.smoothing.redundancy);
        const int wx = cfg.smoothing.wx > 0 ? cfg.smoothing.wx : z.segment.mx + 1;
        const int wy = cfg.smoothing.wy > 0 ? cfg.smoothing.wy : z.segment.my + 1;
        rss = spatial_smoothing(z, wx, wy);
    }

    switch (cfg.estimator.kind) {
    case EstimatorKind::Music: {
        MusicOptions opt;
        opt.sources = m;
        opt.grid = grid;
        opt.frequency = f;
        opt.c = cfg.c;
        opt.min_separation_deg = cfg.estimator.min_separation;
        opt.min_peak_ratio = cfg.estimator.min_peak_ratio;
        opt.refine = cfg.estimator.refine;
        MusicResult r = rss ? music(*rss, d, opt) : music(obs.covariance, obs.sensors, opt);
        if (spectrum)
            *spectrum = std::move(r.spectrum);
        return r.directions;
    }
    case EstimatorKind::Esprit: {
        EspritOptions opt{m, f, cfg.c, d, cfg.estimator.solver};
        if (rss)
            return unitary_esprit_2d(*rss, opt);
        if (static_cast<int>(obs.sensors.size()) != cfg.grid.cells())
            throw PreconditionError("esprit without smoothing needs the fully populated grid");
        return unitary_esprit_2d(obs.covariance.R, cfg.grid.nx, cfg.grid.ny, opt);
    }
    case EstimatorKind::SrpPhat: {
        if (!obs.passband)
            throw PreconditionError("srp-phat needs passband channel data");
        SrpOptions opt{grid, cfg.c, cfg.filter.center - cfg.filter.bandwidth / 2.0,
                       cfg.filter.center + cfg.filter.bandwidth / 2.0};
        SrpResult r = srp_phat(*obs.passband, opt);
        if (spectrum)
            *spectrum = std::move(r.spectrum);
        return {r.direction};
    }
    }
    return {};
}

ResultRecord run_montecarlo(const ScenarioConfig& cfg)
{
    cfg.validate();
    const auto t0 = std::chrono::steady_clock::now();
    const std::size_t cells = cfg.cell_count();
    const std::size_t ng = cfg.geometries.size();
    const auto trials = static_cast<std::size_t>(cfg.trials);
    const std::size_t items = cells * trials;

    std::vector<std::vector<TrialRecord>> out(items);
    std::atomic<std::size_t> next{0};
    std::mutex err_mu;
    std::exception_ptr first_error;
    std::size_t first_error_item = items;

    const auto worker = [&] {
        for (;;) {
            const std::size_t item = next.fetch_add(1);
            if (item >= items)
                return;
            const std::size_t cell = item / trials;
            const int trial = static_cast<int>(item % trials);
            std::string where = "cell " + std::to_string(cell) + ", trial " + std::to_string(trial);
            try {
                const TrialScene ts = simulate_trial(cfg, cell, trial);
                for (std::size_t g = 0; g < ng; ++g) {
                    where = "cell " + std::to_string(cell) + " (" + to_string(cfg.geometries[g]) + "), trial " +
                            std::to_string(trial);
                    TrialRecord rec;
                    rec.cell = cell;
                    rec.geometry = to_string(cfg.geometries[g]);
                    rec.trial = trial;
                    rec.seed = ts.seed;
                    try {
                        match(ts.truths, estimate_directions(cfg, ts.observations[g]), rec);
                    } catch (const EstimationError& e) {
                        rec.truths = ts.truths;
                        rec.status = std::string("failed: ") + e.what();
                    }
                    out[item].push_back(std::move(rec));
                }
            } catch (const std::exception& e) {
                std::lock_guard lock(err_mu);
                if (item < first_error_item) {
                    first_error_item = item;
                    try {
                        throw PreconditionError(where + ": " + e.what());
                    } catch (...) {
                        first_error = std::current_exception();
                    }
                }
                next.store(items);
                return;
            }
        }
    };

    unsigned nthreads = cfg.threads > 0 ? static_cast<unsigned>(cfg.threads)
                                        : std::max(1u, std::thread::hardware_concurrency());
    nthreads = static_cast<unsigned>(std::min<std::size_t>(nthreads, items));
    if (nthreads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (unsigned i = 0; i < nthreads; ++i)
            pool.emplace_back(worker);
        for (auto& t : pool)
            t.join();
    }
    if (first_error)
        std::rethrow_exception(first_error);

    ResultRecord r;
    r.scenario = cfg.id;
    for (std::size_t cell = 0; cell < cells; ++cell)
        for (std::size_t g = 0; g < ng; ++g) {
            CellSummary cs;
            cs.cell = cell;
            cs.geometry = to_string(cfg.geometries[g]);
            cs.noise_db = cell_noise(cfg, cell);
            std::vector<double> errs;
            std::vector<Direction> gts;
            for (std::size_t t = 0; t < trials; ++t) {
                const TrialRecord& rec = out[cell * trials + t][g];
                ++cs.trials;
                if (rec.status != "ok") {
                    ++cs.failures;
                } else {
                    errs.insert(errs.end(), rec.errors.begin(), rec.errors.end());
                    gts.insert(gts.end(), rec.truths.begin(), rec.truths.end());
                }
                r.trials.push_back(rec);
            }
            try {
                if (!errs.empty())
                    cs.summary = error_summary(errs, gts, cfg.summary_max_elevation);
            } catch (const PreconditionError&) {
                // every pose filtered out; reported as an empty summary
            }
            r.cells.push_back(std::move(cs));
        }
    r.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return r;
}

std::vector<BeamRow> run_beampattern_suite(const BeamSuiteOptions& opt)
{
    std::vector<BeamRow> rows;
    for (const auto& kind : geometry_catalog(opt.random_seed)) {
        const SensorSet s = build_geometry(kind, opt.array);
        const Pseudospectrum p = das_beampattern(s, {0.0, 0.0}, opt.frequency, opt.c, opt.grid, opt.norm_count);
        rows.push_back({kind, s.size(), beam_metrics(p)});
    }
    return rows;
}

ScenarioConfig default_demo_config()
{
    ScenarioConfig c;
    c.id = "multisource-demo";
    c.geometries = {{GeometryFamily::Nested}};
    c.chain = ChainMode::Passband;
    c.samples = 19200; // 0.4 s
    c.settle_s = 0.03;
    c.filter = {20000.0, 200.0, 10};
    const double levels[3] = {55.0, 52.0, 50.0};
    for (int i = 0; i < 3; ++i) {
        SourceConfig s;
        s.random_direction = true;
        s.frequency = 20000.0;
        s.level_db = levels[i];
        s.waveform = {Waveform::Kind::Hadamard, 8, i + 1, 200.0};
        c.sources.push_back(s);
    }
    c.truth_max_elevation = 60.0;
    c.truth_min_separation = 30.0;
    c.noise = {NoiseSpec::Mode::Snr, {25.0}, 200.0};
    c.estimator.kind = EstimatorKind::Music;
    c.estimator.sources = 3;
    c.seed = 2024;
    c.trials = 100;
    return c;
}

DemoResult run_multisource_demo(const ScenarioConfig& cfg, int trial)
{
    cfg.validate();
    const TrialScene ts = simulate_trial(cfg, 0, trial);
    DemoResult r{Pseudospectrum{AngularGrid{}, {}, Pseudospectrum::Scale::Linear, ""}, {}, ts.seed};
    const auto est = estimate_directions(cfg, ts.observations.at(0), &r.spectrum);
    TrialRecord rec;
    match(ts.truths, est, rec);
    if (rec.status != "ok")
        throw EstimationError(rec.status);
    for (std::size_t i = 0; i < ts.truths.size(); ++i)
        r.tags.push_back({i, ts.truths[i], rec.estimates[i], rec.errors[i]});
    return r;
}

} // namespace sdoa
