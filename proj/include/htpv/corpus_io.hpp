#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace htpv {

/// Uniformly sampled single-channel recording. Amplitude is unitless.
class Recording {
public:
    /// Throws Error(validation) if samples are empty or non-finite, or
    /// Error(config) if the sample rate is not positive.
    Recording(std::vector<double> samples, double sample_rate_hz, std::string label = {});

    std::span<const double> samples() const noexcept { return samples_; }
    double sample_rate_hz() const noexcept { return sample_rate_hz_; }
    const std::string& label() const noexcept { return label_; }
    std::size_t size() const noexcept { return samples_.size(); }
    double duration_s() const noexcept { return static_cast<double>(samples_.size()) / sample_rate_hz_; }

private:
    std::vector<double> samples_;
    double sample_rate_hz_;
    std::string label_;
};

/// Ground-truth beat (R-peak) timestamps in seconds, strictly increasing.
class ReferenceAnnotation {
public:
    ReferenceAnnotation(std::vector<double> rpeak_times_s);

    std::span<const double> rpeak_times_s() const noexcept { return times_; }
    std::size_t size() const noexcept { return times_.size(); }

    /// Throws Error(validation) if any timestamp lies past the recording end.
    void check_within(const Recording& recording) const;

private:
    std::vector<double> times_;
};

struct FrequencyBand {
    double low_hz = 0.0;
    double high_hz = 0.0;

    double width_hz() const noexcept { return high_hz - low_hz; }
};

enum class WindowFunction { rectangular, hann };

std::string_view to_string(WindowFunction fn) noexcept;
WindowFunction parse_window_function(std::string_view text);

/// Tunables of the estimation pipeline. Defaults: 30 s window, 15 s hop,
/// 0.7-10 Hz band-pass, 0.6-4 Hz heart-rate search, 10 BPM continuity.
struct PipelineConfig {
    double window_s = 30.0;
    double hop_s = 15.0;
    double band_low_hz = 0.7;
    double band_high_hz = 10.0;
    int filter_order = 4;
    double search_low_hz = 0.6;
    double search_high_hz = 4.0;
    double continuity_bpm = 10.0;
    int pad_factor = 8;
    WindowFunction window_fn = WindowFunction::hann;

    FrequencyBand passband() const noexcept { return {band_low_hz, band_high_hz}; }
    FrequencyBand search_band() const noexcept { return {search_low_hz, search_high_hz}; }

    /// Checks rate-independent invariants. Throws Error(config).
    void validate() const;
    /// Additionally checks that the passband sits below Nyquist.
    void validate_for(double sample_rate_hz) const;

    /// Applies a single `key = value` assignment. Throws Error(config) for
    /// unknown keys or unparsable values.
    void set(std::string_view key, std::string_view value);
};

enum class RecordingFormat { csv, wav };

/// Picks the format from the file extension (.wav → wav, anything else → csv).
RecordingFormat format_from_path(const std::filesystem::path& path);

Recording load_recording(const std::filesystem::path& path, RecordingFormat format);
Recording parse_recording_csv(std::istream& in, std::string label = {});
Recording parse_recording_wav(std::span<const std::byte> bytes, std::string label = {});

/// Writes `# sample_rate_hz=...` then one sample per line at full precision,
/// so reloading reproduces every sample bit-exactly.
void write_recording_csv(std::ostream& out, const Recording& recording);
void save_recording_csv(const std::filesystem::path& path, const Recording& recording);

ReferenceAnnotation load_annotation(const std::filesystem::path& path);
ReferenceAnnotation parse_annotation(std::istream& in);
void write_annotation(std::ostream& out, const ReferenceAnnotation& annotation);
void save_annotation(const std::filesystem::path& path, const ReferenceAnnotation& annotation);

/// Reads a flat `key = value` file ('#' starts a comment) on top of `base`.
PipelineConfig load_config(const std::filesystem::path& path, PipelineConfig base = {});
PipelineConfig parse_config(std::istream& in, PipelineConfig base = {});

namespace detail {
// Shared text helpers for the line-oriented formats.
std::string_view trim(std::string_view s) noexcept;
double parse_double(std::string_view text, std::string_view what);
long long parse_integer(std::string_view text, std::string_view what);
std::string format_double(double value);
}  // namespace detail

}  // namespace htpv
