#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "sdoa/error.hpp"
#include "sdoa/harness.hpp"

namespace sdoa {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& where, const std::string& what)
{
    throw ConfigError(where + ": " + what);
}

// Rejects keys outside `allowed` so that typos do not silently fall back to defaults.
void check_keys(const json& j, const std::string& where, std::initializer_list<const char*> allowed)
{
    if (!j.is_object())
        fail(where, "expected an object");
    std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& [k, v] : j.items())
        if (!ok.count(k))
            fail(where, "unknown key '" + k + "'");
}

template <typename T>
void get(const json& j, const char* key, T& out, const std::string& where)
{
    if (!j.contains(key))
        return;
    try {
        out = j.at(key).get<T>();
    } catch (const json::exception&) {
        fail(where + "." + key, "wrong type");
    }
}

NoiseSpec::Mode parse_noise_mode(const std::string& s, const std::string& where)
{
    if (s == "none") return NoiseSpec::Mode::None;
    if (s == "snr") return NoiseSpec::Mode::Snr;
    if (s == "spl") return NoiseSpec::Mode::Spl;
    fail(where, "mode must be none, snr or spl");
}

const char* noise_mode_name(NoiseSpec::Mode m)
{
    switch (m) {
    case NoiseSpec::Mode::None: return "none";
    case NoiseSpec::Mode::Snr: return "snr";
    case NoiseSpec::Mode::Spl: return "spl";
    }
    return "none";
}

const char* estimator_name(EstimatorKind k)
{
    switch (k) {
    case EstimatorKind::Music: return "music";
    case EstimatorKind::Esprit: return "esprit";
    case EstimatorKind::SrpPhat: return "srp-phat";
    }
    return "music";
}

SourceConfig parse_source(const json& j, const std::string& where)
{
    check_keys(j, where, {"random", "azimuth", "elevation", "frequency", "level", "waveform"});
    SourceConfig s;
    get(j, "random", s.random_direction, where);
    if (!s.random_direction && !(j.contains("azimuth") && j.contains("elevation")))
        fail(where, "needs azimuth and elevation, or \"random\": true");
    get(j, "azimuth", s.direction.azimuth, where);
    get(j, "elevation", s.direction.elevation, where);
    get(j, "frequency", s.frequency, where);
    get(j, "level", s.level_db, where);
    if (j.contains("waveform")) {
        const auto& w = j.at("waveform");
        const std::string ww = where + ".waveform";
        check_keys(w, ww, {"kind", "order", "row", "bandwidth"});
        std::string kind = "tone";
        get(w, "kind", kind, ww);
        if (kind == "tone")
            s.waveform.kind = Waveform::Kind::Tone;
        else if (kind == "hadamard")
            s.waveform.kind = Waveform::Kind::Hadamard;
        else
            fail(ww, "kind must be tone or hadamard");
        get(w, "order", s.waveform.code_order, ww);
        get(w, "row", s.waveform.code_row, ww);
        get(w, "bandwidth", s.waveform.bandwidth, ww);
    }
    return s;
}

} // namespace

ScenarioConfig parse_config(std::string_view text)
{
    json j;
    try {
        j = json::parse(text, nullptr, true, true);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    check_keys(j, "config",
               {"id", "geometries", "grid", "c", "fs", "samples", "duration", "chunk", "chain", "settle",
                "filter", "sources", "truth_max_elevation", "truth_min_separation", "noise", "estimator",
                "smoothing", "summary_max_elevation", "seed", "trials", "threads"});
    ScenarioConfig c;
    get(j, "id", c.id, "config");
    if (j.contains("geometries")) {
        std::vector<std::string> names;
        get(j, "geometries", names, "config");
        c.geometries.clear();
        for (const auto& n : names) {
            try {
                c.geometries.push_back(parse_geometry_kind(n));
            } catch (const PreconditionError& e) {
                fail("config.geometries", e.what());
            }
        }
    }
    if (j.contains("grid")) {
        const auto& g = j.at("grid");
        check_keys(g, "config.grid", {"spacing", "nx", "ny"});
        get(g, "spacing", c.grid.spacing, "config.grid");
        get(g, "nx", c.grid.nx, "config.grid");
        get(g, "ny", c.grid.ny, "config.grid");
    }
    get(j, "c", c.c, "config");
    get(j, "fs", c.fs, "config");
    if (j.contains("samples") && j.contains("duration"))
        fail("config", "give either samples or duration, not both");
    get(j, "samples", c.samples, "config");
    if (j.contains("duration")) {
        double t = 0.0;
        get(j, "duration", t, "config");
        if (!(t > 0.0))
            fail("config.duration", "must be positive");
        c.samples = static_cast<std::size_t>(std::llround(t * c.fs));
    }
    get(j, "chunk", c.chunk, "config");
    if (j.contains("chain")) {
        std::string m;
        get(j, "chain", m, "config");
        if (m == "baseband")
            c.chain = ChainMode::Baseband;
        else if (m == "passband")
            c.chain = ChainMode::Passband;
        else
            fail("config.chain", "must be baseband or passband");
    }
    get(j, "settle", c.settle_s, "config");
    if (j.contains("filter")) {
        const auto& f = j.at("filter");
        check_keys(f, "config.filter", {"center", "bandwidth", "order"});
        get(f, "center", c.filter.center, "config.filter");
        get(f, "bandwidth", c.filter.bandwidth, "config.filter");
        get(f, "order", c.filter.order, "config.filter");
    }
    if (j.contains("sources")) {
        const auto& s = j.at("sources");
        if (!s.is_array())
            fail("config.sources", "expected an array");
        for (std::size_t i = 0; i < s.size(); ++i)
            c.sources.push_back(parse_source(s[i], "config.sources[" + std::to_string(i) + "]"));
    }
    get(j, "truth_max_elevation", c.truth_max_elevation, "config");
    get(j, "truth_min_separation", c.truth_min_separation, "config");
    if (j.contains("noise")) {
        const auto& n = j.at("noise");
        check_keys(n, "config.noise", {"mode", "values", "in_band"});
        std::string mode = "none";
        get(n, "mode", mode, "config.noise");
        c.noise.mode = parse_noise_mode(mode, "config.noise");
        get(n, "values", c.noise.values, "config.noise");
        get(n, "in_band", c.noise.in_band_hz, "config.noise");
    }
    if (j.contains("estimator")) {
        const auto& e = j.at("estimator");
        const std::string w = "config.estimator";
        check_keys(e, w, {"kind", "sources", "az_step", "el_step", "solver", "min_separation", "min_peak_ratio",
                          "refine"});
        std::string kind = "music";
        get(e, "kind", kind, w);
        if (kind == "music")
            c.estimator.kind = EstimatorKind::Music;
        else if (kind == "esprit")
            c.estimator.kind = EstimatorKind::Esprit;
        else if (kind == "srp-phat")
            c.estimator.kind = EstimatorKind::SrpPhat;
        else
            fail(w + ".kind", "must be music, esprit or srp-phat");
        get(e, "sources", c.estimator.sources, w);
        get(e, "az_step", c.estimator.az_step, w);
        get(e, "el_step", c.estimator.el_step, w);
        if (e.contains("solver")) {
            std::string s;
            get(e, "solver", s, w);
            if (s == "ls")
                c.estimator.solver = InvarianceSolver::LeastSquares;
            else if (s == "tls")
                c.estimator.solver = InvarianceSolver::TotalLeastSquares;
            else
                fail(w + ".solver", "must be ls or tls");
        }
        get(e, "min_separation", c.estimator.min_separation, w);
        get(e, "min_peak_ratio", c.estimator.min_peak_ratio, w);
        get(e, "refine", c.estimator.refine, w);
    }
    if (j.contains("smoothing")) {
        const auto& s = j.at("smoothing");
        const std::string w = "config.smoothing";
        check_keys(s, w, {"enabled", "wx", "wy", "redundancy"});
        get(s, "enabled", c.smoothing.enabled, w);
        get(s, "wx", c.smoothing.wx, w);
        get(s, "wy", c.smoothing.wy, w);
        if (s.contains("redundancy")) {
            std::string r;
            get(s, "redundancy", r, w);
            if (r == "average")
                c.smoothing.redundancy = RedundancyRule::Average;
            else if (r == "first")
                c.smoothing.redundancy = RedundancyRule::KeepFirst;
            else
                fail(w + ".redundancy", "must be average or first");
        }
    }
    if (j.contains("summary_max_elevation") && !j.at("summary_max_elevation").is_null()) {
        double v = 0.0;
        get(j, "summary_max_elevation", v, "config");
        c.summary_max_elevation = v;
    }
    get(j, "seed", c.seed, "config");
    get(j, "trials", c.trials, "config");
    get(j, "threads", c.threads, "config");
    c.validate();
    return c;
}

ScenarioConfig load_config(const std::filesystem::path& path)
{
    std::ifstream is(path);
    if (!is)
        throw ConfigError("cannot open config '" + path.string() + "'");
    std::stringstream ss;
    ss << is.rdbuf();
    return parse_config(ss.str());
}

std::string serialize_config(const ScenarioConfig& c)
{
    json j;
    j["id"] = c.id;
    j["geometries"] = json::array();
    for (const auto& g : c.geometries)
        j["geometries"].push_back(to_string(g));
    j["grid"] = {{"spacing", c.grid.spacing}, {"nx", c.grid.nx}, {"ny", c.grid.ny}};
    j["c"] = c.c;
    j["fs"] = c.fs;
    j["samples"] = c.samples;
    j["chunk"] = c.chunk;
    j["chain"] = c.chain == ChainMode::Baseband ? "baseband" : "passband";
    j["settle"] = c.settle_s;
    j["filter"] = {{"center", c.filter.center}, {"bandwidth", c.filter.bandwidth}, {"order", c.filter.order}};
    j["sources"] = json::array();
    for (const auto& s : c.sources) {
        json o;
        if (s.random_direction)
            o["random"] = true;
        else
            o["azimuth"] = s.direction.azimuth, o["elevation"] = s.direction.elevation;
        o["frequency"] = s.frequency;
        o["level"] = s.level_db;
        if (s.waveform.kind == Waveform::Kind::Tone)
            o["waveform"] = {{"kind", "tone"}};
        else
            o["waveform"] = {{"kind", "hadamard"},
                             {"order", s.waveform.code_order},
                             {"row", s.waveform.code_row},
                             {"bandwidth", s.waveform.bandwidth}};
        j["sources"].push_back(o);
    }
    j["truth_max_elevation"] = c.truth_max_elevation;
    j["truth_min_separation"] = c.truth_min_separation;
    j["noise"] = {{"mode", noise_mode_name(c.noise.mode)}, {"values", c.noise.values}, {"in_band", c.noise.in_band_hz}};
    j["estimator"] = {{"kind", estimator_name(c.estimator.kind)},
                      {"sources", c.estimator.sources},
                      {"az_step", c.estimator.az_step},
                      {"el_step", c.estimator.el_step},
                      {"solver", c.estimator.solver == InvarianceSolver::LeastSquares ? "ls" : "tls"},
                      {"min_separation", c.estimator.min_separation},
                      {"min_peak_ratio", c.estimator.min_peak_ratio},
                      {"refine", c.estimator.refine}};
    j["smoothing"] = {{"enabled", c.smoothing.enabled},
                      {"wx", c.smoothing.wx},
                      {"wy", c.smoothing.wy},
                      {"redundancy", c.smoothing.redundancy == RedundancyRule::Average ? "average" : "first"}};
    if (c.summary_max_elevation)
        j["summary_max_elevation"] = *c.summary_max_elevation;
    j["seed"] = c.seed;
    j["trials"] = c.trials;
    j["threads"] = c.threads;
    return j.dump(2) + "\n";
}

void ScenarioConfig::validate() const
{
    const auto check = [](bool ok, const std::string& where, const std::string& what) {
        if (!ok)
            fail(where, what);
    };
    check(!geometries.empty(), "config.geometries", "at least one geometry is required");
    try {
        grid.validate();
    } catch (const PreconditionError& e) {
        fail("config.grid", e.what());
    }
    check(c > 0.0 && std::isfinite(c), "config.c", "must be positive");
    check(fs > 0.0 && std::isfinite(fs), "config.fs", "must be positive");
    check(samples >= 16, "config.samples", "need at least 16 samples");
    check(settle_s >= 0.0, "config.settle", "must be non-negative");
    check(trials >= 1, "config.trials", "must be at least 1");
    check(threads >= 0, "config.threads", "must be non-negative (0: one per hardware thread)");
    check(truth_max_elevation > 0.0 && truth_max_elevation <= 90.0, "config.truth_max_elevation",
          "must lie in (0, 90]");
    check(truth_min_separation >= 0.0 && truth_min_separation < 90.0, "config.truth_min_separation",
          "must lie in [0, 90)");
    if (summary_max_elevation)
        check(*summary_max_elevation > 0.0 && *summary_max_elevation <= 90.0, "config.summary_max_elevation",
              "must lie in (0, 90]");
    if (chain == ChainMode::Passband) {
        try {
            filter.validate(fs);
        } catch (const PreconditionError& e) {
            fail("config.filter", e.what());
        }
        check(static_cast<double>(samples) > settle_s * fs + 16, "config.samples",
              "passband run is shorter than the filter settling time");
    }

    check(!sources.empty(), "config.sources", "at least one source is required");
    for (std::size_t i = 0; i < sources.size(); ++i) {
        const std::string w = "config.sources[" + std::to_string(i) + "]";
        const auto& s = sources[i];
        if (!s.random_direction) {
            try {
                s.direction.validate();
            } catch (const PreconditionError& e) {
                fail(w, e.what());
            }
        }
        check(s.frequency > 0.0 && s.frequency < fs / 2.0, w + ".frequency", "must lie in (0, fs/2)");
        check(std::abs(s.frequency - sources[0].frequency) < 1e-9, w + ".frequency",
              "all sources share one narrowband analysis frequency");
        if (s.waveform.kind == Waveform::Kind::Hadamard) {
            const int n = s.waveform.code_order;
            check(n >= 2 && (n & (n - 1)) == 0, w + ".waveform.order", "must be a power of two >= 2");
            check(s.waveform.code_row >= 0 && s.waveform.code_row < n, w + ".waveform.row", "out of range");
            check(s.waveform.bandwidth > 0.0, w + ".waveform.bandwidth", "must be positive");
            check(s.frequency + 0.75 * s.waveform.bandwidth < fs / 2.0, w + ".waveform",
                  "modulated content reaches Nyquist");
            check(chain == ChainMode::Passband, w + ".waveform", "coded waveforms need the passband chain");
        }
    }
    if (noise.mode == NoiseSpec::Mode::None)
        check(noise.values.empty(), "config.noise.values", "must be empty when mode is none");
    else
        check(!noise.values.empty(), "config.noise.values", "at least one level is required");
    check(noise.in_band_hz >= 0.0 && noise.in_band_hz <= fs / 2.0, "config.noise.in_band", "must lie in [0, fs/2]");

    const int m = source_count();
    check(m >= 1, "config.estimator.sources", "must be at least 1");
    check(estimator.az_step > 0.0 && estimator.az_step <= 90.0 && estimator.el_step > 0.0 &&
              estimator.el_step <= 45.0,
          "config.estimator", "grid steps must lie in (0, 90] / (0, 45]");
    check(estimator.min_separation >= 0.0, "config.estimator.min_separation", "must be non-negative");
    check(estimator.min_peak_ratio >= 0.0, "config.estimator.min_peak_ratio", "must be non-negative");
    if (estimator.kind == EstimatorKind::SrpPhat) {
        check(chain == ChainMode::Passband, "config.estimator", "srp-phat needs the passband chain");
        check(m == 1, "config.estimator.sources", "srp-phat estimates a single source");
        check(!smoothing.enabled, "config.smoothing", "srp-phat works on the physical channels");
    }
    check(smoothing.wx >= 0 && smoothing.wy >= 0, "config.smoothing", "window sizes must be non-negative");

    for (const auto& g : geometries) {
        const std::string w = "config.geometries[" + to_string(g) + "]";
        SensorSet s = [&] {
            try {
                return build_geometry(g, grid);
            } catch (const PreconditionError& e) {
                fail(w, e.what());
            }
        }();
        if (!smoothing.enabled) {
            check(m < static_cast<int>(s.size()), w, "source count must be below the sensor count");
            if (estimator.kind == EstimatorKind::Esprit)
                check(static_cast<int>(s.size()) == grid.cells(), w,
                      "esprit without smoothing needs the fully populated grid");
            continue;
        }
        const CoherentSegment seg = coherent_segment(difference_coarray(s));
        const int wx = smoothing.wx > 0 ? smoothing.wx : seg.mx + 1;
        const int wy = smoothing.wy > 0 ? smoothing.wy : seg.my + 1;
        check(wx <= seg.width() && wy <= seg.height(), w,
              "smoothing window exceeds the coherent segment (" + std::to_string(seg.width()) + "x" +
                  std::to_string(seg.height()) + ")");
        if (estimator.kind == EstimatorKind::Esprit) {
            check(wx >= 2 && wy >= 2, w, "esprit needs a smoothing window of at least 2x2");
            check(m < std::min(wx * (wy - 1), wy * (wx - 1)), w, "too many sources for the smoothing window");
        } else {
            check(m < wx * wy, w, "too many sources for the smoothing window");
        }
    }
}

} // namespace sdoa
