#include "sdoa/io.hpp"

#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include "sdoa/error.hpp"

namespace sdoa {

namespace {

class ByteWriter {
public:
    void bytes(const void* p, std::size_t n)
    {
        const auto* c = static_cast<const unsigned char*>(p);
        buf_.insert(buf_.end(), c, c + n);
    }
    template <typename T>
    void le(T v)
    {
        static_assert(std::is_integral_v<T>);
        for (std::size_t i = 0; i < sizeof(T); ++i)
            buf_.push_back(static_cast<unsigned char>((static_cast<std::uint64_t>(v) >> (8 * i)) & 0xffu));
    }
    void f32(float v) { le(std::bit_cast<std::uint32_t>(v)); }
    void f64(double v) { le(std::bit_cast<std::uint64_t>(v)); }
    const std::vector<unsigned char>& data() const { return buf_; }

private:
    std::vector<unsigned char> buf_;
};

class ByteReader {
public:
    ByteReader(const std::vector<unsigned char>& b, std::string what) : b_(b), what_(std::move(what)) {}
    std::size_t offset() const { return pos_; }
    std::size_t remaining() const { return b_.size() - pos_; }
    void need(std::size_t n, const char* field) const
    {
        if (remaining() < n)
            throw DataError(what_ + ": truncated at byte offset " + std::to_string(b_.size()) +
                            " while reading " + field + " (needed " + std::to_string(pos_ + n) +
                            " bytes)");
    }
    template <typename T>
    T le(const char* field)
    {
        need(sizeof(T), field);
        std::uint64_t v = 0;
        for (std::size_t i = 0; i < sizeof(T); ++i)
            v |= static_cast<std::uint64_t>(b_[pos_ + i]) << (8 * i);
        pos_ += sizeof(T);
        return static_cast<T>(v);
    }
    float f32(const char* field) { return std::bit_cast<float>(le<std::uint32_t>(field)); }
    double f64(const char* field) { return std::bit_cast<double>(le<std::uint64_t>(field)); }
    std::string tag(std::size_t n, const char* field)
    {
        need(n, field);
        std::string s(reinterpret_cast<const char*>(b_.data() + pos_), n);
        pos_ += n;
        return s;
    }
    void skip(std::size_t n, const char* field)
    {
        need(n, field);
        pos_ += n;
    }
    const unsigned char* here() const { return b_.data() + pos_; }

private:
    const std::vector<unsigned char>& b_;
    std::string what_;
    std::size_t pos_ = 0;
};

void save(const std::filesystem::path& path, const std::vector<unsigned char>& bytes)
{
    std::ofstream os(path, std::ios::binary);
    if (!os)
        throw DataError("cannot open '" + path.string() + "' for writing");
    os.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!os)
        throw DataError("write to '" + path.string() + "' failed");
}

void check_samples(const Eigen::MatrixXd& samples, double fs)
{
    require(samples.rows() >= 1, "a recording needs at least one channel");
    require(fs > 0.0 && std::isfinite(fs), "recording sample rate must be positive");
}

RawRecording parse_raw(const std::vector<unsigned char>& bytes, const std::string& name)
{
    ByteReader r(bytes, name);
    r.skip(8, "magic");
    const auto channels = r.le<std::uint32_t>("channel count");
    const auto format = r.le<std::uint32_t>("sample format");
    const double fs = r.f64("sample rate");
    const auto frames = r.le<std::uint64_t>("frame count");
    if (channels == 0)
        throw DataError(name + ": zero channels");
    if (format != kRawFloat32)
        throw DataError(name + ": unsupported sample format " + std::to_string(format));
    if (!(fs > 0.0) || !std::isfinite(fs))
        throw DataError(name + ": invalid sample rate");
    const std::uint64_t expected = frames * channels * 4u;
    if (r.remaining() < expected)
        throw DataError(name + ": truncated at byte offset " + std::to_string(bytes.size()) + ", header declares " +
                        std::to_string(32 + expected) + " bytes");
    RawRecording rec{Eigen::MatrixXd(channels, static_cast<Eigen::Index>(frames)), fs};
    for (std::uint64_t n = 0; n < frames; ++n)
        for (std::uint32_t k = 0; k < channels; ++k)
            rec.samples(k, static_cast<Eigen::Index>(n)) = r.f32("samples");
    return rec;
}

RawRecording parse_wav(const std::vector<unsigned char>& bytes, const std::string& name)
{
    ByteReader r(bytes, name);
    if (r.tag(4, "RIFF tag") != "RIFF")
        throw DataError(name + ": not a RIFF file");
    r.le<std::uint32_t>("RIFF size");
    if (r.tag(4, "WAVE tag") != "WAVE")
        throw DataError(name + ": RIFF file is not WAVE");

    std::uint16_t format = 0;
    std::uint16_t channels = 0;
    std::uint32_t rate = 0;
    std::uint16_t bits = 0;
    bool have_fmt = false;
    while (r.remaining() > 0) {
        const std::string id = r.tag(4, "chunk id");
        const auto size = r.le<std::uint32_t>("chunk size");
        if (id == "fmt ") {
            if (size < 16)
                throw DataError(name + ": fmt chunk too short");
            const std::size_t start = r.offset();
            format = r.le<std::uint16_t>("format tag");
            channels = r.le<std::uint16_t>("channel count");
            rate = r.le<std::uint32_t>("sample rate");
            r.le<std::uint32_t>("byte rate");
            r.le<std::uint16_t>("block align");
            bits = r.le<std::uint16_t>("bits per sample");
            if (format == 0xFFFE) {
                if (size < 40)
                    throw DataError(name + ": extensible fmt chunk too short");
                r.skip(8, "extension");
                format = r.le<std::uint16_t>("sub-format"); // first GUID bytes carry the tag
            }
            r.skip(size - (r.offset() - start) + (size & 1u), "fmt chunk");
            have_fmt = true;
        } else if (id == "data") {
            if (!have_fmt)
                throw DataError(name + ": data chunk before fmt chunk");
            if (channels == 0 || rate == 0)
                throw DataError(name + ": invalid channel count or sample rate");
            const bool is_float = format == 3 && bits == 32;
            const bool is_pcm = format == 1 && (bits == 16 || bits == 24 || bits == 32);
            if (!is_float && !is_pcm)
                throw DataError(name + ": unsupported WAV sample format " + std::to_string(format) + "/" +
                                std::to_string(bits) + " bit");
            const std::size_t width = bits / 8u;
            const std::size_t block = width * channels;
            if (r.remaining() < size)
                throw DataError(name + ": truncated at byte offset " + std::to_string(bytes.size()) +
                                ", data chunk declares " + std::to_string(r.offset() + size) + " bytes");
            const std::size_t frames = size / block;
            RawRecording rec{Eigen::MatrixXd(channels, static_cast<Eigen::Index>(frames)),
                             static_cast<double>(rate)};
            for (std::size_t n = 0; n < frames; ++n)
                for (std::uint16_t k = 0; k < channels; ++k) {
                    double v = 0.0;
                    if (is_float) {
                        v = r.f32("samples");
                    } else if (bits == 16) {
                        v = static_cast<std::int16_t>(r.le<std::uint16_t>("samples")) / 32768.0;
                    } else if (bits == 24) {
                        std::uint32_t u = r.le<std::uint16_t>("samples");
                        u |= static_cast<std::uint32_t>(r.le<std::uint8_t>("samples")) << 16;
                        const auto sv = static_cast<std::int32_t>(u << 8) >> 8;
                        v = sv / 8388608.0;
                    } else {
                        v = static_cast<std::int32_t>(r.le<std::uint32_t>("samples")) / 2147483648.0;
                    }
                    rec.samples(k, static_cast<Eigen::Index>(n)) = v;
                }
            return rec;
        } else {
            r.skip(size + (size & 1u), "chunk");
        }
    }
    throw DataError(name + ": no data chunk");
}

} // namespace

void write_raw_recording(const std::filesystem::path& path, const Eigen::MatrixXd& samples, double fs)
{
    check_samples(samples, fs);
    ByteWriter w;
    w.bytes(kRawMagic, sizeof kRawMagic);
    w.le(static_cast<std::uint32_t>(samples.rows()));
    w.le(kRawFloat32);
    w.f64(fs);
    w.le(static_cast<std::uint64_t>(samples.cols()));
    for (Eigen::Index n = 0; n < samples.cols(); ++n)
        for (Eigen::Index k = 0; k < samples.rows(); ++k)
            w.f32(static_cast<float>(samples(k, n)));
    save(path, w.data());
}

void write_wav(const std::filesystem::path& path, const Eigen::MatrixXd& samples, double fs)
{
    check_samples(samples, fs);
    require(samples.rows() <= 65535, "too many channels for WAV");
    require(std::abs(fs - std::round(fs)) < 1e-9, "WAV needs an integer sample rate");
    const auto channels = static_cast<std::uint16_t>(samples.rows());
    const auto data_bytes = static_cast<std::uint32_t>(samples.size() * 4);
    const bool extensible = channels > 2;
    const std::uint32_t fmt_size = extensible ? 40 : 16;
    ByteWriter w;
    w.bytes("RIFF", 4);
    w.le(static_cast<std::uint32_t>(4 + 8 + fmt_size + 8 + data_bytes));
    w.bytes("WAVE", 4);
    w.bytes("fmt ", 4);
    w.le(fmt_size);
    w.le(static_cast<std::uint16_t>(extensible ? 0xFFFE : 3));
    w.le(channels);
    w.le(static_cast<std::uint32_t>(std::lround(fs)));
    w.le(static_cast<std::uint32_t>(std::lround(fs) * channels * 4));
    w.le(static_cast<std::uint16_t>(channels * 4));
    w.le(static_cast<std::uint16_t>(32));
    if (extensible) {
        static constexpr std::array<unsigned char, 16> kFloatGuid = {
            0x03, 0x00, 0x00, 0x00, 0x00, 0x00, 0x10, 0x00, 0x80, 0x00, 0x00, 0xAA, 0x00, 0x38, 0x9B, 0x71};
        w.le(static_cast<std::uint16_t>(22));
        w.le(static_cast<std::uint16_t>(32));
        w.le(static_cast<std::uint32_t>(0)); // no speaker mapping
        w.bytes(kFloatGuid.data(), kFloatGuid.size());
    }
    w.bytes("data", 4);
    w.le(data_bytes);
    for (Eigen::Index n = 0; n < samples.cols(); ++n)
        for (Eigen::Index k = 0; k < samples.rows(); ++k)
            w.f32(static_cast<float>(samples(k, n)));
    save(path, w.data());
}

RawRecording read_recording(const std::filesystem::path& path)
{
    std::ifstream is(path, std::ios::binary);
    if (!is)
        throw DataError("cannot open recording '" + path.string() + "'");
    std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
    const std::string name = "recording '" + path.string() + "'";
    if (bytes.size() >= 8 && std::memcmp(bytes.data(), kRawMagic, 8) == 0)
        return parse_raw(bytes, name);
    if (bytes.size() >= 4 && std::memcmp(bytes.data(), "RIFF", 4) == 0)
        return parse_wav(bytes, name);
    throw DataError(name + ": unknown container (expected SDOARAW1 header or RIFF/WAVE)");
}

RealSnapshots ingest_recording(const std::filesystem::path& path, const SensorSet& map, std::optional<double> fs,
                               bool keep_full_grid)
{
    RawRecording rec = read_recording(path);
    if (fs && std::abs(*fs - rec.fs) > 1e-9 * rec.fs)
        throw DataError("recording sample rate " + std::to_string(rec.fs) + " Hz differs from the declared " +
                        std::to_string(*fs) + " Hz");
    const auto k = rec.samples.rows();
    const auto cells = static_cast<Eigen::Index>(map.grid().cells());
    if (k == static_cast<Eigen::Index>(map.size()))
        return RealSnapshots(std::move(rec.samples), rec.fs, map);
    if (k == cells) {
        std::vector<GridPos> all;
        for (int y = 0; y < map.grid().ny; ++y)
            for (int x = 0; x < map.grid().nx; ++x)
                all.push_back({x, y});
        RealSnapshots full(std::move(rec.samples), rec.fs, SensorSet(all, map.grid()));
        return keep_full_grid ? full : mask_channels(full, map);
    }
    throw DataError("recording has " + std::to_string(k) + " channels; expected " + std::to_string(map.size()) +
                    " or " + std::to_string(cells));
}

} // namespace sdoa
