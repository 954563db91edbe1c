#include <doctest.h>

#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>

#include "sdoa/error.hpp"
#include "sdoa/io.hpp"
#include "sdoa/random.hpp"

using namespace sdoa;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name)
{
    const fs::path dir = fs::temp_directory_path() / "sdoa_unit_io";
    fs::create_directories(dir);
    return dir / name;
}

Eigen::MatrixXd noise(Eigen::Index k, Eigen::Index n, std::uint64_t seed)
{
    Rng rng(seed);
    Eigen::MatrixXd m(k, n);
    for (Eigen::Index j = 0; j < n; ++j)
        for (Eigen::Index i = 0; i < k; ++i)
            m(i, j) = 0.3 * rng.normal();
    return m;
}

Eigen::MatrixXd as_float(const Eigen::MatrixXd& m)
{
    return m.cast<float>().cast<double>();
}

template <typename T>
void put(std::string& s, T v)
{
    char b[sizeof(T)];
    std::memcpy(b, &v, sizeof(T)); // little-endian host assumed, as on every supported target
    s.append(b, sizeof(T));
}

// Hand-rolled 16-bit PCM WAV.
std::string pcm16_wav(const std::vector<std::int16_t>& interleaved, std::uint16_t channels, std::uint32_t rate)
{
    std::string d;
    const auto data_bytes = static_cast<std::uint32_t>(interleaved.size() * 2);
    d += "RIFF";
    put<std::uint32_t>(d, 36 + data_bytes);
    d += "WAVEfmt ";
    put<std::uint32_t>(d, 16);
    put<std::uint16_t>(d, 1);
    put<std::uint16_t>(d, channels);
    put<std::uint32_t>(d, rate);
    put<std::uint32_t>(d, rate * channels * 2);
    put<std::uint16_t>(d, static_cast<std::uint16_t>(channels * 2));
    put<std::uint16_t>(d, 16);
    d += "data";
    put<std::uint32_t>(d, data_bytes);
    for (auto v : interleaved)
        put<std::int16_t>(d, v);
    return d;
}

void write_bytes(const fs::path& p, const std::string& bytes)
{
    std::ofstream os(p, std::ios::binary);
    os.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

std::string read_bytes(const fs::path& p)
{
    std::ifstream is(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(is), {}};
}

} // namespace

TEST_SUITE("io") {

TEST_CASE("raw and WAV round trips are exact at float32 precision")
{
    const Eigen::MatrixXd x = noise(5, 333, 1);
    write_raw_recording(scratch("a.raw"), x, 44100.0);
    const auto r = read_recording(scratch("a.raw"));
    CHECK(r.fs == 44100.0);
    CHECK(r.samples == as_float(x));
    CHECK(read_bytes(scratch("a.raw")).size() == 32 + 5 * 333 * 4);

    for (Eigen::Index k : {1, 2, 5}) {
        const Eigen::MatrixXd y = noise(k, 100, 2);
        write_wav(scratch("a.wav"), y, 48000.0);
        const auto w = read_recording(scratch("a.wav"));
        CHECK(w.fs == 48000.0);
        CHECK(w.samples == as_float(y));
    }
}

TEST_CASE("16-bit PCM WAV is scaled to [-1, 1)")
{
    write_bytes(scratch("pcm.wav"), pcm16_wav({0, 16384, -32768, 32767}, 2, 16000));
    const auto r = read_recording(scratch("pcm.wav"));
    REQUIRE(r.samples.rows() == 2);
    REQUIRE(r.samples.cols() == 2);
    CHECK(r.samples(0, 0) == 0.0);
    CHECK(r.samples(1, 0) == 0.5);
    CHECK(r.samples(0, 1) == -1.0);
    CHECK(r.samples(1, 1) == doctest::Approx(32767.0 / 32768.0));
    CHECK(r.fs == 16000.0);
}

TEST_CASE("truncated and unknown files report where they fail")
{
    write_raw_recording(scratch("t.raw"), noise(4, 50, 3), 48000.0);
    auto bytes = read_bytes(scratch("t.raw"));
    bytes.resize(bytes.size() - 10);
    write_bytes(scratch("t.raw"), bytes);
    try {
        read_recording(scratch("t.raw"));
        FAIL("expected DataError");
    } catch (const DataError& e) {
        CHECK(std::string(e.what()).find("truncated at byte offset " + std::to_string(bytes.size())) !=
              std::string::npos);
    }

    write_bytes(scratch("junk.bin"), "hello world, not audio");
    CHECK_THROWS_AS(read_recording(scratch("junk.bin")), DataError);
    CHECK_THROWS_AS(read_recording(scratch("missing.raw")), DataError);

    auto wav = pcm16_wav({1, 2, 3, 4, 5, 6}, 2, 48000);
    wav.resize(wav.size() - 3);
    write_bytes(scratch("t.wav"), wav);
    CHECK_THROWS_AS(read_recording(scratch("t.wav")), DataError);
}

TEST_CASE("ingest checks channel count and sample rate and masks full-grid files")
{
    const SensorSet ura = build_geometry({GeometryFamily::URA});
    const SensorSet nested = build_geometry({GeometryFamily::Nested});
    const Eigen::MatrixXd full = noise(64, 40, 4);
    write_raw_recording(scratch("full.raw"), full, 48000.0);

    const auto all = ingest_recording(scratch("full.raw"), ura, 48000.0);
    CHECK(all.samples == as_float(full));

    const auto sub = ingest_recording(scratch("full.raw"), nested);
    REQUIRE(sub.channel_count() == 25);
    for (std::size_t k = 0; k < nested.size(); ++k) {
        const auto p = nested.positions()[k];
        CHECK(sub.samples.row(static_cast<Eigen::Index>(k)) == as_float(full).row(p.iy * 8 + p.ix));
    }

    const auto whole = ingest_recording(scratch("full.raw"), nested, std::nullopt, true);
    CHECK(whole.channel_count() == 64);
    CHECK(whole.samples == as_float(full));

    CHECK_THROWS_AS(ingest_recording(scratch("full.raw"), nested, 44100.0), DataError);

    write_raw_recording(scratch("odd.raw"), noise(7, 40, 5), 48000.0);
    CHECK_THROWS_AS(ingest_recording(scratch("odd.raw"), nested), DataError);

    write_raw_recording(scratch("n25.raw"), noise(25, 40, 6), 48000.0);
    CHECK(ingest_recording(scratch("n25.raw"), nested).channel_count() == 25);
}

}
