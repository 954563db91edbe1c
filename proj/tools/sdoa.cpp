#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>

#include <CLI11.hpp>

#include "sdoa/angular_grid.hpp"
#include "sdoa/error.hpp"
#include "sdoa/harness.hpp"
#include "sdoa/io.hpp"
#include "sdoa/log.hpp"

using namespace sdoa;

namespace {

// Writes to `path`, or stdout when the path is empty or "-".
class Output {
public:
    explicit Output(const std::string& path)
    {
        if (!path.empty() && path != "-") {
            file_ = std::make_unique<std::ofstream>(path, std::ios::binary);
            if (!*file_)
                throw DataError("cannot write '" + path + "'");
        }
    }
    std::ostream& stream() { return file_ ? *file_ : std::cout; }

private:
    std::unique_ptr<std::ofstream> file_;
};

std::string fixed(double v, int prec = 4)
{
    std::ostringstream os;
    os.setf(std::ios::fixed);
    os.precision(prec);
    os << v;
    return os.str();
}

SensorSet geometry_from(const std::string& kind, const std::string& file, const GridSpec& grid)
{
    if (!file.empty()) {
        std::ifstream is(file);
        if (!is)
            throw DataError("cannot open geometry file '" + file + "'");
        return read_geometry(is);
    }
    try {
        return build_geometry(parse_geometry_kind(kind), grid);
    } catch (const PreconditionError& e) {
        throw ConfigError(e.what());
    }
}

struct GridArgs {
    double spacing = 8.255e-3;
    int nx = 8;
    int ny = 8;
    GridSpec spec() const { return {spacing, nx, ny}; }
    void add(CLI::App* app)
    {
        app->add_option("--spacing", spacing, "grid pitch in metres")->capture_default_str();
        app->add_option("--nx", nx, "grid columns")->capture_default_str();
        app->add_option("--ny", ny, "grid rows")->capture_default_str();
    }
};

void apply_overrides(ScenarioConfig& cfg, const std::optional<std::uint64_t>& seed, const std::optional<int>& trials,
                     const std::optional<int>& threads)
{
    if (seed)
        cfg.seed = *seed;
    if (trials)
        cfg.trials = *trials;
    if (threads)
        cfg.threads = *threads;
    cfg.validate();
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Sparse planar array direction-of-arrival simulator"};
    app.require_subcommand(1);
    bool quiet = false;
    app.add_flag("-q,--quiet", quiet, "suppress warnings");

    // geometry
    auto* geo = app.add_subcommand("geometry", "list or emit array geometries");
    geo->require_subcommand(1);
    auto* geo_list = geo->add_subcommand("list", "catalog with sensor counts");
    std::uint64_t list_seed = 1;
    GridArgs list_grid;
    geo_list->add_option("--seed", list_seed, "seed of the random geometry")->capture_default_str();
    list_grid.add(geo_list);
    auto* geo_emit = geo->add_subcommand("emit", "write one geometry as a text file");
    std::string emit_kind;
    std::string emit_out;
    GridArgs emit_grid;
    geo_emit->add_option("kind", emit_kind, "ura|billboard|coprime|nested|openbox|random:<seed>")->required();
    geo_emit->add_option("-o,--output", emit_out, "output file (default stdout)");
    emit_grid.add(geo_emit);

    // coarray
    auto* co = app.add_subcommand("coarray", "difference co-array and coherent segment");
    std::string co_kind = "nested";
    std::string co_file;
    std::string co_out;
    GridArgs co_grid;
    co->add_option("kind", co_kind, "geometry kind")->capture_default_str();
    co->add_option("--geometry-file", co_file, "read the geometry from a file instead");
    co->add_option("-o,--output", co_out, "output file (default stdout)");
    co_grid.add(co);

    // beampattern
    auto* bp = app.add_subcommand("beampattern", "delay-and-sum beampattern metrics per geometry");
    BeamSuiteOptions bopt;
    int az_count = 360;
    int el_count = 200;
    std::string bp_out;
    std::string bp_spectra;
    bp->add_option("--frequency", bopt.frequency, "Hz")->capture_default_str();
    bp->add_option("--c", bopt.c, "speed of sound, m/s")->capture_default_str();
    bp->add_option("--az-count", az_count, "azimuth samples over [0, 360)")->capture_default_str();
    bp->add_option("--el-count", el_count, "elevation samples over [0, 90]")->capture_default_str();
    bp->add_option("--seed", bopt.random_seed, "seed of the random geometry")->capture_default_str();
    bp->add_option("--norm-count", bopt.norm_count, "normalisation sensor count")->capture_default_str();
    bp->add_option("-o,--output", bp_out, "metrics table (CSV, default stdout)");
    bp->add_option("--spectra", bp_spectra, "directory for gridded beampattern tables");

    // estimate
    auto* est = app.add_subcommand("estimate", "estimate directions for one simulated scene or a recording");
    std::string est_cfg;
    std::string est_rec;
    std::string est_cal;
    std::string est_geom_file;
    std::string est_out;
    std::string est_spec;
    int est_trial = 0;
    std::optional<std::uint64_t> est_seed;
    est->add_option("-c,--config", est_cfg, "scenario config (JSON)")->required();
    est->add_option("--recording", est_rec, "SDOARAW1 or WAV recording to ingest");
    est->add_option("--calibration", est_cal, "calibration table applied to the recording channels");
    est->add_option("--geometry-file", est_geom_file, "sensor selection file (default: first config geometry)");
    est->add_option("--trial", est_trial, "simulated trial index")->capture_default_str();
    est->add_option("--seed", est_seed, "override the config seed");
    est->add_option("-o,--output", est_out, "estimates CSV (default stdout)");
    est->add_option("--spectrum", est_spec, "write the (first) pseudospectrum as a gridded table");
    std::string est_save;
    est->add_option("--save-recording", est_save,
                    "passband chain: write the simulated full-grid signals (.wav or SDOARAW1)");

    // montecarlo
    auto* mc = app.add_subcommand("montecarlo", "Monte-Carlo sweep over the config's cells");
    std::string mc_cfg;
    std::string mc_out = "results";
    std::optional<std::uint64_t> mc_seed;
    std::optional<int> mc_trials;
    std::optional<int> mc_threads;
    mc->add_option("-c,--config", mc_cfg, "scenario config (JSON)")->required();
    mc->add_option("-o,--out", mc_out, "output directory")->capture_default_str();
    mc->add_option("--seed", mc_seed, "override the master seed");
    mc->add_option("--trials", mc_trials, "override the trial count");
    mc->add_option("--threads", mc_threads, "worker threads (0: hardware concurrency)");

    // multisource-demo
    auto* demo = app.add_subcommand("multisource-demo", "three coded tags on the nested selection");
    std::string demo_cfg;
    std::string demo_out = "demo";
    std::optional<std::uint64_t> demo_seed;
    std::optional<int> demo_runs;
    demo->add_option("-c,--config", demo_cfg, "scenario config (default: built-in demo)");
    demo->add_option("-o,--out", demo_out, "output directory")->capture_default_str();
    demo->add_option("--seed", demo_seed, "override the seed");
    demo->add_option("--runs", demo_runs, "number of seeded runs (config trials)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }
    set_warnings_enabled(!quiet);

    try {
        if (geo_list->parsed()) {
            std::cout << "kind,sensors\n";
            for (const auto& k : geometry_catalog(list_seed)) {
                try {
                    std::cout << to_string(k) << ',' << build_geometry(k, list_grid.spec()).size() << '\n';
                } catch (const PreconditionError& e) {
                    std::cout << to_string(k) << ",n/a (" << e.what() << ")\n";
                }
            }
        } else if (geo_emit->parsed()) {
            const SensorSet s = geometry_from(emit_kind, "", emit_grid.spec());
            Output out(emit_out);
            write_geometry(out.stream(), s);
        } else if (co->parsed()) {
            const SensorSet s = geometry_from(co_kind, co_file, co_grid.spec());
            const CoArray c = difference_coarray(s);
            const CoherentSegment seg = coherent_segment(c);
            Output out(co_out);
            auto& os = out.stream();
            os << "# sensors " << s.size() << " virtual " << c.size() << '\n';
            os << "# coherent_segment mx " << seg.mx << " my " << seg.my << " (" << seg.width() << "x"
               << seg.height() << ")\n";
            os << "ox oy multiplicity\n";
            for (const auto& [m, n] : c.offsets())
                os << m.ix << ' ' << m.iy << ' ' << n << '\n';
        } else if (bp->parsed()) {
            try {
                bopt.grid = AngularGrid::with_counts(az_count, el_count);
            } catch (const PreconditionError& e) {
                throw ConfigError(e.what());
            }
            const auto rows = run_beampattern_suite(bopt);
            Output out(bp_out);
            write_beam_table(out.stream(), rows);
            if (!bp_spectra.empty()) {
                std::filesystem::create_directories(bp_spectra);
                for (const auto& r : rows) {
                    const SensorSet s = build_geometry(r.kind, bopt.array);
                    auto name = to_string(r.kind);
                    std::replace(name.begin(), name.end(), ':', '_');
                    std::ofstream os(std::filesystem::path(bp_spectra) / (name + ".txt"));
                    write_pseudospectrum(os, das_beampattern(s, {0.0, 0.0}, bopt.frequency, bopt.c, bopt.grid,
                                                             bopt.norm_count));
                }
            }
        } else if (est->parsed()) {
            ScenarioConfig cfg = load_config(est_cfg);
            apply_overrides(cfg, est_seed, std::nullopt, std::nullopt);
            Output out(est_out);
            auto& os = out.stream();
            std::optional<Pseudospectrum> first;
            if (!est_rec.empty()) {
                const SensorSet s = est_geom_file.empty() ? build_geometry(cfg.geometries.front(), cfg.grid)
                                                          : geometry_from("", est_geom_file, cfg.grid);
                // Full-grid files stay whole so that a per-channel calibration precedes masking.
                const RealSnapshots x = ingest_recording(est_rec, s, cfg.fs, true);
                std::optional<CalibrationMatrix> cal;
                if (!est_cal.empty()) {
                    std::ifstream is(est_cal);
                    if (!is)
                        throw DataError("cannot open calibration '" + est_cal + "'");
                    cal = read_calibration(is);
                    if (cal->channels() != x.channel_count())
                        throw DataError("calibration covers " + std::to_string(cal->channels()) +
                                        " channels, recording has " + std::to_string(x.channel_count()));
                }
                const auto blocks = cfg.chunk > 0 ? chunk(x, static_cast<Eigen::Index>(cfg.chunk))
                                                  : std::vector<RealSnapshots>{x};
                if (blocks.empty())
                    throw DataError("recording is shorter than one chunk");
                os << "chunk,source,est_az,est_el\n";
                for (std::size_t b = 0; b < blocks.size(); ++b) {
                    Pseudospectrum spec;
                    const auto dirs = estimate_directions(cfg, observe_recording(cfg, blocks[b], s, cal), &spec);
                    for (std::size_t i = 0; i < dirs.size(); ++i)
                        os << b << ',' << i << ',' << fixed(dirs[i].azimuth) << ',' << fixed(dirs[i].elevation)
                           << '\n';
                    if (!first && spec.values.size() > 0)
                        first = std::move(spec);
                }
            } else {
                const TrialScene ts = simulate_trial(cfg, 0, est_trial);
                if (!est_save.empty()) {
                    if (!ts.recording)
                        throw ConfigError("--save-recording needs \"chain\": \"passband\"");
                    if (std::filesystem::path(est_save).extension() == ".wav")
                        write_wav(est_save, ts.recording->samples, ts.recording->fs);
                    else
                        write_raw_recording(est_save, ts.recording->samples, ts.recording->fs);
                }
                os << "geometry,source,truth_az,truth_el,est_az,est_el,error_deg\n";
                for (std::size_t g = 0; g < cfg.geometries.size(); ++g) {
                    Pseudospectrum spec;
                    const auto dirs = estimate_directions(cfg, ts.observations[g], &spec);
                    const auto assign = [&] {
                        Eigen::MatrixXd cost(static_cast<Eigen::Index>(ts.truths.size()),
                                             static_cast<Eigen::Index>(dirs.size()));
                        for (std::size_t i = 0; i < ts.truths.size(); ++i)
                            for (std::size_t j = 0; j < dirs.size(); ++j)
                                cost(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                                    spherical_error(dirs[j], ts.truths[i]);
                        return hungarian(cost);
                    }();
                    for (std::size_t i = 0; i < ts.truths.size(); ++i) {
                        const auto& d = dirs[static_cast<std::size_t>(assign[i])];
                        os << to_string(cfg.geometries[g]) << ',' << i << ',' << fixed(ts.truths[i].azimuth) << ','
                           << fixed(ts.truths[i].elevation) << ',' << fixed(d.azimuth) << ',' << fixed(d.elevation)
                           << ',' << fixed(spherical_error(d, ts.truths[i])) << '\n';
                    }
                    if (!first && spec.values.size() > 0)
                        first = std::move(spec);
                }
            }
            if (!est_spec.empty()) {
                if (!first)
                    throw ConfigError("the configured estimator produces no pseudospectrum");
                Output sp(est_spec);
                write_pseudospectrum(sp.stream(), *first);
            }
        } else if (mc->parsed()) {
            ScenarioConfig cfg = load_config(mc_cfg);
            apply_overrides(cfg, mc_seed, mc_trials, mc_threads);
            const ResultRecord r = run_montecarlo(cfg);
            write_results(mc_out, r, cfg);
            write_summary_csv(std::cout, r, cfg);
        } else if (demo->parsed()) {
            ScenarioConfig cfg = demo_cfg.empty() ? default_demo_config() : load_config(demo_cfg);
            apply_overrides(cfg, demo_seed, demo_runs, std::nullopt);
            std::filesystem::create_directories(demo_out);
            std::ofstream csv(std::filesystem::path(demo_out) / "tags.csv");
            csv << "run,seed,tag,truth_az,truth_el,est_az,est_el,error_deg\n";
            int passed = 0;
            for (int run = 0; run < cfg.trials; ++run) {
                bool ok = true;
                try {
                    const DemoResult r = run_multisource_demo(cfg, run);
                    for (const auto& t : r.tags) {
                        csv << run << ',' << r.seed << ',' << t.tag << ',' << fixed(t.truth.azimuth) << ','
                            << fixed(t.truth.elevation) << ',' << fixed(t.estimate.azimuth) << ','
                            << fixed(t.estimate.elevation) << ',' << fixed(t.error) << '\n';
                        ok = ok && t.error <= 2.0;
                    }
                    if (run == 0) {
                        std::ofstream sp(std::filesystem::path(demo_out) / "spectrum_run0.txt");
                        write_pseudospectrum(sp, r.spectrum);
                    }
                } catch (const EstimationError& e) {
                    csv << run << ",,,,,,,\"" << e.what() << "\"\n";
                    ok = false;
                }
                passed += ok ? 1 : 0;
            }
            std::cout << "runs " << cfg.trials << ", all tags within 2 deg in " << passed << " ("
                      << fixed(100.0 * passed / cfg.trials, 1) << "%)\n";
        }
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return 3;
    } catch (const PreconditionError& e) {
        std::cerr << "invalid parameter: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
