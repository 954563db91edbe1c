#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>

#include <Eigen/Core>
#include <fftw3.h>
#include <json.hpp>

#include "sdoa/error.hpp"
#include "sdoa/harness.hpp"

namespace sdoa {

namespace {

std::string num(double v, int prec = 6)
{
    if (!std::isfinite(v))
        return "nan";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", prec, v);
    std::string s(buf);
    if (s == "-0." + std::string(static_cast<std::size_t>(prec), '0'))
        s.erase(0, 1);
    return s;
}

std::string csv_field(const std::string& s)
{
    if (s.find_first_of(",\"\n") == std::string::npos)
        return s;
    std::string q = "\"";
    for (char c : s) {
        if (c == '"')
            q += '"';
        q += c;
    }
    return q + '"';
}

std::uint64_t fnv1a(const std::string& s)
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::ofstream open_out(const std::filesystem::path& p)
{
    std::ofstream os(p, std::ios::binary);
    if (!os)
        throw DataError("cannot write '" + p.string() + "'");
    return os;
}

} // namespace

void write_trials_csv(std::ostream& os, const ResultRecord& r)
{
    std::ostringstream b;
    b << "cell,geometry,trial,seed,source,truth_az,truth_el,est_az,est_el,error_deg,status\n";
    for (const auto& t : r.trials) {
        for (std::size_t i = 0; i < t.truths.size(); ++i) {
            b << t.cell << ',' << csv_field(t.geometry) << ',' << t.trial << ',' << t.seed << ',' << i << ','
              << num(t.truths[i].azimuth) << ',' << num(t.truths[i].elevation) << ',';
            if (i < t.estimates.size())
                b << num(t.estimates[i].azimuth) << ',' << num(t.estimates[i].elevation) << ','
                  << num(t.errors[i]);
            else
                b << ",,";
            b << ',' << csv_field(t.status) << '\n';
        }
    }
    os << b.str();
}

void write_summary_csv(std::ostream& os, const ResultRecord& r, const ScenarioConfig& cfg)
{
    std::ostringstream b;
    b << "scenario,cell,noise_mode,noise_db,geometry,sensors,trials,failures,poses,excluded,mean_deg,p50_deg,p95_deg\n";
    const char* mode = cfg.noise.mode == NoiseSpec::Mode::Snr ? "snr"
                       : cfg.noise.mode == NoiseSpec::Mode::Spl ? "spl"
                                                                : "none";
    for (const auto& c : r.cells) {
        std::size_t sensors = 0;
        for (const auto& g : cfg.geometries)
            if (to_string(g) == c.geometry)
                sensors = build_geometry(g, cfg.grid).size();
        b << csv_field(r.scenario) << ',' << c.cell << ',' << mode << ',' << (c.noise_db ? num(*c.noise_db, 3) : "")
          << ',' << csv_field(c.geometry) << ',' << sensors << ',' << c.trials << ',' << c.failures << ',';
        if (c.summary)
            b << c.summary->errors.size() << ',' << c.summary->excluded << ',' << num(c.summary->mean) << ','
              << num(c.summary->p50) << ',' << num(c.summary->p95) << '\n';
        else
            b << "0,,,,\n";
    }
    os << b.str();
}

void write_results(const std::filesystem::path& dir, const ResultRecord& r, const ScenarioConfig& cfg)
{
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec)
        throw DataError("cannot create output directory '" + dir.string() + "': " + ec.message());
    {
        auto os = open_out(dir / "trials.csv");
        write_trials_csv(os, r);
    }
    {
        auto os = open_out(dir / "summary.csv");
        write_summary_csv(os, r, cfg);
    }
    const std::string text = serialize_config(cfg);
    char hash[17];
    std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(fnv1a(text)));
    nlohmann::json m;
    m["scenario"] = r.scenario;
    m["config_hash_fnv1a64"] = hash;
    m["config"] = nlohmann::json::parse(text);
    m["seed"] = cfg.seed;
    m["trials"] = cfg.trials;
    m["files"] = nlohmann::json::array({"trials.csv", "summary.csv"});
    nlohmann::json versions;
    versions["sdoa"] = "0.1.0";
    versions["eigen"] = std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                        std::to_string(EIGEN_MINOR_VERSION);
    versions["fftw"] = std::string(fftw_version);
    versions["compiler"] = std::string(__VERSION__);
    m["versions"] = versions;
    m["wall_seconds"] = r.wall_seconds;
    auto os = open_out(dir / "manifest.json");
    os << m.dump(2) << '\n';
}

void write_beam_table(std::ostream& os, const std::vector<BeamRow>& rows)
{
    std::ostringstream b;
    b << "geometry,sensors,mlm_db,mlw_deg,mslr_db,msls_deg\n";
    for (const auto& row : rows) {
        const auto& m = row.metrics;
        b << csv_field(to_string(row.kind)) << ',' << row.sensors << ',' << num(m.mlm, 2) << ',' << num(m.mlw, 2)
          << ',' << (m.mslr ? num(*m.mslr, 2) : "") << ',' << (m.msls ? num(*m.msls, 2) : "") << '\n';
    }
    os << b.str();
}

} // namespace sdoa
