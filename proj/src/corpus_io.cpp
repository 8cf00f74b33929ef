#include "htpv/corpus_io.hpp"

#include "htpv/error.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>

namespace htpv {

namespace detail {

std::string_view trim(std::string_view s) noexcept {
    constexpr std::string_view ws = " \t\r\n";
    const auto first = s.find_first_not_of(ws);
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(ws);
    return s.substr(first, last - first + 1);
}

double parse_double(std::string_view text, std::string_view what) {
    text = trim(text);
    // from_chars rejects a leading '+', which hand-written files sometimes carry.
    if (!text.empty() && text.front() == '+') text.remove_prefix(1);
    double value = 0.0;
    const auto* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, value);
    if (text.empty() || ec == std::errc::invalid_argument || ptr != end) {
        throw Error(ErrorKind::parse, std::string(what) + ": cannot parse number '" + std::string(text) + "'");
    }
    if (ec == std::errc::result_out_of_range) {
        throw Error(ErrorKind::validation, std::string(what) + ": value out of range '" + std::string(text) + "'");
    }
    return value;
}

long long parse_integer(std::string_view text, std::string_view what) {
    text = trim(text);
    long long value = 0;
    const auto* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, value);
    if (text.empty() || ec != std::errc{} || ptr != end) {
        throw Error(ErrorKind::parse, std::string(what) + ": cannot parse integer '" + std::string(text) + "'");
    }
    return value;
}

std::string format_double(double value) {
    std::array<char, 32> buf{};
    const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
    return std::string(buf.data(), ptr);
}

}  // namespace detail

using detail::parse_double;
using detail::trim;

// ---------------------------------------------------------------------------
// Domain types

Recording::Recording(std::vector<double> samples, double sample_rate_hz, std::string label)
    : samples_(std::move(samples)), sample_rate_hz_(sample_rate_hz), label_(std::move(label)) {
    if (!(sample_rate_hz_ > 0.0) || !std::isfinite(sample_rate_hz_)) {
        throw Error(ErrorKind::config, "sample rate must be positive and finite");
    }
    if (samples_.empty()) {
        throw Error(ErrorKind::validation, "recording has no samples");
    }
    const auto bad = std::find_if(samples_.begin(), samples_.end(), [](double v) { return !std::isfinite(v); });
    if (bad != samples_.end()) {
        throw Error(ErrorKind::validation,
                    "non-finite sample at index " + std::to_string(std::distance(samples_.begin(), bad)));
    }
}

ReferenceAnnotation::ReferenceAnnotation(std::vector<double> rpeak_times_s) : times_(std::move(rpeak_times_s)) {
    if (times_.empty()) {
        throw Error(ErrorKind::validation, "annotation has no beats");
    }
    for (std::size_t i = 0; i < times_.size(); ++i) {
        if (!std::isfinite(times_[i]) || times_[i] < 0.0) {
            throw Error(ErrorKind::validation, "beat " + std::to_string(i) + " has invalid timestamp");
        }
        if (i > 0 && !(times_[i] > times_[i - 1])) {
            throw Error(ErrorKind::validation, "beat timestamps not strictly increasing at beat " + std::to_string(i));
        }
    }
}

void ReferenceAnnotation::check_within(const Recording& recording) const {
    if (times_.back() > recording.duration_s()) {
        throw Error(ErrorKind::validation, "annotation extends past the end of recording '" + recording.label() + "'");
    }
}

std::string_view to_string(WindowFunction fn) noexcept {
    return fn == WindowFunction::hann ? "hann" : "rectangular";
}

WindowFunction parse_window_function(std::string_view text) {
    text = trim(text);
    if (text == "hann") return WindowFunction::hann;
    if (text == "rectangular" || text == "rect") return WindowFunction::rectangular;
    throw Error(ErrorKind::config, "unknown window function '" + std::string(text) + "'");
}

void PipelineConfig::validate() const {
    auto require = [](bool ok, const char* message) {
        if (!ok) throw Error(ErrorKind::config, message);
    };
    require(window_s > 0.0 && std::isfinite(window_s), "window_s must be positive");
    require(hop_s > 0.0 && std::isfinite(hop_s), "hop_s must be positive");
    require(hop_s <= window_s, "hop_s must not exceed window_s");
    require(band_low_hz > 0.0 && band_low_hz < band_high_hz && std::isfinite(band_high_hz),
            "band edges must satisfy 0 < band_low_hz < band_high_hz");
    require(filter_order >= 1, "filter_order must be at least 1");
    require(search_low_hz > 0.0 && search_low_hz < search_high_hz && std::isfinite(search_high_hz),
            "search range must satisfy 0 < search_low_hz < search_high_hz");
    require(continuity_bpm > 0.0 && std::isfinite(continuity_bpm), "continuity_bpm must be positive");
    require(pad_factor >= 1, "pad_factor must be at least 1");
}

void PipelineConfig::validate_for(double sample_rate_hz) const {
    validate();
    if (!(band_high_hz < sample_rate_hz / 2.0)) {
        throw Error(ErrorKind::config, "band_high_hz must be below the Nyquist frequency");
    }
    if (!(search_high_hz < sample_rate_hz / 2.0)) {
        throw Error(ErrorKind::config, "search_high_hz must be below the Nyquist frequency");
    }
}

void PipelineConfig::set(std::string_view key, std::string_view value) {
    key = trim(key);
    const std::string what = "config key '" + std::string(key) + "'";
    auto as_int = [&] {
        const long long v = detail::parse_integer(value, what);
        if (v < 1 || v > 1 << 20) throw Error(ErrorKind::config, what + ": out of range");
        return static_cast<int>(v);
    };
    try {
        if (key == "window_s") window_s = parse_double(value, what);
        else if (key == "hop_s") hop_s = parse_double(value, what);
        else if (key == "band_low_hz") band_low_hz = parse_double(value, what);
        else if (key == "band_high_hz") band_high_hz = parse_double(value, what);
        else if (key == "filter_order") filter_order = as_int();
        else if (key == "search_low_hz") search_low_hz = parse_double(value, what);
        else if (key == "search_high_hz") search_high_hz = parse_double(value, what);
        else if (key == "continuity_bpm") continuity_bpm = parse_double(value, what);
        else if (key == "pad_factor") pad_factor = as_int();
        else if (key == "window_fn") window_fn = parse_window_function(value);
        else throw Error(ErrorKind::config, "unknown " + what);
    } catch (const Error& e) {
        // A bad value in a config file is a configuration problem, whatever the parser called it.
        if (e.kind() == ErrorKind::config) throw;
        throw Error(ErrorKind::config, e.what());
    }
}

// ---------------------------------------------------------------------------
// Recording I/O

namespace {

std::ifstream open_input(const std::filesystem::path& path, std::ios::openmode mode = std::ios::in) {
    std::error_code ec;
    if (!std::filesystem::is_regular_file(path, ec)) {
        throw Error(ErrorKind::not_found, "input not found: " + path.string());
    }
    std::ifstream in(path, mode);
    if (!in) throw Error(ErrorKind::io, "cannot open " + path.string());
    return in;
}

std::ofstream open_output(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::out | std::ios::trunc);
    if (!out) throw Error(ErrorKind::io, "cannot write " + path.string());
    return out;
}

void finish_output(std::ofstream& out, const std::filesystem::path& path) {
    out.flush();
    if (!out) throw Error(ErrorKind::io, "write failed for " + path.string());
}

std::string line_tag(std::size_t line_no) { return "line " + std::to_string(line_no); }

// Little-endian readers over a byte span with bounds checking.
class ByteReader {
public:
    explicit ByteReader(std::span<const std::byte> bytes) : bytes_(bytes) {}

    std::size_t offset() const noexcept { return pos_; }
    std::size_t remaining() const noexcept { return bytes_.size() - pos_; }

    void need(std::size_t n) const {
        if (remaining() < n) {
            throw Error(ErrorKind::parse, "truncated WAV at offset " + std::to_string(pos_));
        }
    }
    std::uint32_t u32() {
        need(4);
        std::uint32_t v = 0;
        for (int i = 3; i >= 0; --i) v = (v << 8) | std::to_integer<std::uint32_t>(bytes_[pos_ + i]);
        pos_ += 4;
        return v;
    }
    std::uint16_t u16() {
        need(2);
        const auto v = static_cast<std::uint16_t>(std::to_integer<unsigned>(bytes_[pos_]) |
                                                  (std::to_integer<unsigned>(bytes_[pos_ + 1]) << 8));
        pos_ += 2;
        return v;
    }
    std::string tag() {
        need(4);
        std::string s(4, '\0');
        for (int i = 0; i < 4; ++i) s[i] = static_cast<char>(bytes_[pos_ + i]);
        pos_ += 4;
        return s;
    }
    std::span<const std::byte> take(std::size_t n) {
        need(n);
        auto s = bytes_.subspan(pos_, n);
        pos_ += n;
        return s;
    }
    void skip(std::size_t n) {
        need(n);
        pos_ += n;
    }

private:
    std::span<const std::byte> bytes_;
    std::size_t pos_ = 0;
};

double decode_pcm(std::span<const std::byte> s, unsigned bits, bool is_float) {
    if (is_float) {
        if (bits == 32) {
            std::uint32_t raw = 0;
            for (int i = 3; i >= 0; --i) raw = (raw << 8) | std::to_integer<std::uint32_t>(s[i]);
            float f;
            std::memcpy(&f, &raw, sizeof f);
            return f;
        }
        std::uint64_t raw = 0;
        for (int i = 7; i >= 0; --i) raw = (raw << 8) | std::to_integer<std::uint64_t>(s[i]);
        double d;
        std::memcpy(&d, &raw, sizeof d);
        return d;
    }
    if (bits == 8) {
        // 8-bit PCM is unsigned with a 128 offset.
        return (static_cast<double>(std::to_integer<int>(s[0])) - 128.0) / 128.0;
    }
    const unsigned bytes = bits / 8;
    std::uint32_t raw = 0;
    for (int i = static_cast<int>(bytes) - 1; i >= 0; --i) raw = (raw << 8) | std::to_integer<std::uint32_t>(s[i]);
    // Sign-extend from `bits` to 32.
    const unsigned shift = 32 - bits;
    const auto value = static_cast<std::int32_t>(raw << shift) >> shift;
    return static_cast<double>(value) / std::ldexp(1.0, static_cast<int>(bits) - 1);
}

}  // namespace

RecordingFormat format_from_path(const std::filesystem::path& path) {
    auto ext = path.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    return ext == ".wav" ? RecordingFormat::wav : RecordingFormat::csv;
}

Recording parse_recording_csv(std::istream& in, std::string label) {
    std::vector<double> samples;
    double rate = 0.0;
    bool have_rate = false;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto text = trim(line);
        if (text.empty()) continue;
        if (text.front() == '#') {
            const auto body = trim(text.substr(1));
            const auto eq = body.find('=');
            if (eq == std::string_view::npos) continue;
            const auto key = trim(body.substr(0, eq));
            const auto value = trim(body.substr(eq + 1));
            if (key == "sample_rate_hz") {
                rate = parse_double(value, line_tag(line_no));
                have_rate = true;
            } else if (key == "label" && label.empty()) {
                label = std::string(value);
            }
            continue;
        }
        samples.push_back(parse_double(text, line_tag(line_no)));
    }
    if (!have_rate) throw Error(ErrorKind::config, "recording CSV has no '# sample_rate_hz=' header");
    return Recording(std::move(samples), rate, std::move(label));
}

Recording parse_recording_wav(std::span<const std::byte> bytes, std::string label) {
    ByteReader r(bytes);
    if (r.tag() != "RIFF") throw Error(ErrorKind::parse, "not a RIFF file at offset 0");
    r.u32();
    if (r.tag() != "WAVE") throw Error(ErrorKind::parse, "missing WAVE tag at offset 8");

    unsigned format = 0, channels = 0, bits = 0;
    double rate = 0.0;
    bool have_fmt = false;
    std::span<const std::byte> data;
    bool have_data = false;
    while (r.remaining() >= 8 && !have_data) {
        const auto id = r.tag();
        const std::size_t size = r.u32();
        const std::size_t chunk_start = r.offset();
        if (id == "fmt ") {
            if (size < 16) throw Error(ErrorKind::parse, "fmt chunk too small at offset " + std::to_string(chunk_start));
            format = r.u16();
            channels = r.u16();
            rate = r.u32();
            r.u32();  // byte rate
            r.u16();  // block align
            bits = r.u16();
            if (format == 0xFFFE && size >= 26) {
                r.u16();  // cbSize
                r.u16();  // valid bits
                r.u32();  // channel mask
                format = r.u16();
            }
            r.skip(size - (r.offset() - chunk_start));
            have_fmt = true;
        } else if (id == "data") {
            if (!have_fmt) throw Error(ErrorKind::parse, "data chunk before fmt chunk at offset " + std::to_string(chunk_start));
            data = r.take(std::min(size, r.remaining()));
            have_data = true;
        } else {
            r.skip(std::min(size, r.remaining()));
        }
        if (size % 2 == 1 && r.remaining() > 0 && !have_data) r.skip(1);
    }
    if (!have_fmt || !have_data) throw Error(ErrorKind::parse, "WAV file lacks fmt or data chunk");

    const bool is_float = format == 3;
    if (format != 1 && !is_float) {
        throw Error(ErrorKind::parse, "unsupported WAV encoding " + std::to_string(format));
    }
    const bool bits_ok = is_float ? (bits == 32 || bits == 64) : (bits == 8 || bits == 16 || bits == 24 || bits == 32);
    if (!bits_ok || channels == 0) {
        throw Error(ErrorKind::parse, "unsupported WAV sample layout: " + std::to_string(bits) + " bits, " +
                                          std::to_string(channels) + " channels");
    }
    if (!(rate > 0.0)) throw Error(ErrorKind::config, "WAV header has zero sample rate");

    // Only the first channel is read.
    const std::size_t width = bits / 8;
    const std::size_t frame = width * channels;
    const std::size_t count = data.size() / frame;
    std::vector<double> samples;
    samples.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        samples.push_back(decode_pcm(data.subspan(i * frame, width), bits, is_float));
    }
    return Recording(std::move(samples), rate, std::move(label));
}

Recording load_recording(const std::filesystem::path& path, RecordingFormat format) {
    const auto label = path.stem().string();
    if (format == RecordingFormat::wav) {
        auto in = open_input(path, std::ios::in | std::ios::binary);
        std::vector<char> raw((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
        return parse_recording_wav(std::as_bytes(std::span<const char>(raw)), label);
    }
    auto in = open_input(path);
    return parse_recording_csv(in, label);
}

void write_recording_csv(std::ostream& out, const Recording& recording) {
    out << "# sample_rate_hz=" << detail::format_double(recording.sample_rate_hz()) << '\n';
    if (!recording.label().empty()) out << "# label=" << recording.label() << '\n';
    for (const double v : recording.samples()) out << detail::format_double(v) << '\n';
}

void save_recording_csv(const std::filesystem::path& path, const Recording& recording) {
    auto out = open_output(path);
    write_recording_csv(out, recording);
    finish_output(out, path);
}

// ---------------------------------------------------------------------------
// Annotations

ReferenceAnnotation parse_annotation(std::istream& in) {
    std::vector<double> times;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto text = trim(line);
        if (text.empty() || text.front() == '#') continue;
        times.push_back(parse_double(text, line_tag(line_no)));
    }
    return ReferenceAnnotation(std::move(times));
}

ReferenceAnnotation load_annotation(const std::filesystem::path& path) {
    auto in = open_input(path);
    return parse_annotation(in);
}

void write_annotation(std::ostream& out, const ReferenceAnnotation& annotation) {
    for (const double t : annotation.rpeak_times_s()) out << detail::format_double(t) << '\n';
}

void save_annotation(const std::filesystem::path& path, const ReferenceAnnotation& annotation) {
    auto out = open_output(path);
    write_annotation(out, annotation);
    finish_output(out, path);
}

// ---------------------------------------------------------------------------
// Config

PipelineConfig parse_config(std::istream& in, PipelineConfig base) {
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        auto text = trim(line);
        if (const auto hash = text.find('#'); hash != std::string_view::npos) text = trim(text.substr(0, hash));
        if (text.empty()) continue;
        const auto eq = text.find('=');
        if (eq == std::string_view::npos) {
            throw Error(ErrorKind::config, line_tag(line_no) + ": expected 'key = value'");
        }
        try {
            base.set(text.substr(0, eq), text.substr(eq + 1));
        } catch (const Error& e) {
            throw Error(ErrorKind::config, line_tag(line_no) + ": " + e.what());
        }
    }
    return base;
}

PipelineConfig load_config(const std::filesystem::path& path, PipelineConfig base) {
    auto in = open_input(path);
    return parse_config(in, base);
}

}  // namespace htpv
