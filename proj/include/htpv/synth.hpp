#pragma once

#include "htpv/corpus_io.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace htpv {

/// Piecewise-linear heart rate over time, held constant before the first
/// and after the last breakpoint.
class HrProfile {
public:
    struct Breakpoint {
        double time_s;
        double bpm;
    };

    /// Throws Error(validation) if empty, times not strictly increasing, or
    /// any rate outside [36, 240] BPM.
    explicit HrProfile(std::vector<Breakpoint> breakpoints);
    static HrProfile constant(double bpm) { return HrProfile({{0.0, bpm}}); }

    double bpm_at(double t) const noexcept;
    double max_bpm() const noexcept;
    /// Integral of bpm/60 over [0, t], i.e. the number of beats elapsed.
    double beats_until(double t) const noexcept;
    const std::vector<Breakpoint>& breakpoints() const noexcept { return points_; }

    /// Parses "t:bpm, t:bpm, ...".
    static HrProfile parse(std::string_view text);
    std::string to_text() const;

private:
    std::vector<Breakpoint> points_;
};

/// Chair-BCG signal model:
///   s(t) = resp_amp·sin(2π·resp_rate_hz·t) + a(t)·cos(2π·carrier_hz·t) + e(t)
/// with a(t) a train of raised-cosine pulses (width pulse_width_s, height
/// pulse_amp) starting at each beat and e(t) seeded white Gaussian noise.
struct SignalModelParams {
    HrProfile hr_profile = HrProfile::constant(60.0);
    double resp_rate_hz = 0.25;
    double resp_amp = 1.0;
    double carrier_hz = 5.0;
    double pulse_width_s = 0.12;
    double pulse_amp = 1.0;
    double noise_std = 0.1;
    std::uint64_t seed = 0;
    double sample_rate_hz = 225.0;
    double duration_s = 60.0;

    /// Throws Error(validation). The carrier must sit strictly inside the
    /// default 0.7-10 Hz passband and pulses must not overlap.
    void validate() const;
    /// Applies one `key = value` assignment (hr_profile, resp_rate_hz, ...).
    void set(std::string_view key, std::string_view value);
};

struct SyntheticRecording {
    Recording recording;
    ReferenceAnnotation annotation;
};

/// Beat onsets: the instants where beats_until(t) crosses 0, 1, 2, ...
/// strictly before `duration_s`.
std::vector<double> beat_times(const HrProfile& profile, double duration_s);

SyntheticRecording generate_bcg(const SignalModelParams& params, std::string label = {});

struct CorpusEntry {
    std::string label;
    SignalModelParams params;
};

/// Corpus description: blocks introduced by `[label]`, each followed by
/// `key = value` lines for SignalModelParams. Keys before the first block
/// set defaults for every block.
std::vector<CorpusEntry> parse_corpus_spec(std::istream& in);
std::vector<CorpusEntry> load_corpus_spec(const std::filesystem::path& path);

struct CorpusFiles {
    std::filesystem::path recording;
    std::filesystem::path annotation;
};

/// File names used for one corpus entry: `<label>.csv` and `<label>.rpeaks`.
CorpusFiles corpus_file_names(const std::filesystem::path& dir, const std::string& label);

/// Generates every entry and writes it into `out_dir` (created if needed).
/// Throws Error(io) when the directory or files cannot be written.
std::vector<CorpusFiles> make_corpus(const std::vector<CorpusEntry>& entries, const std::filesystem::path& out_dir);

}  // namespace htpv
