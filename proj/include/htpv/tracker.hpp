#pragma once

#include "htpv/corpus_io.hpp"
#include "htpv/envelope.hpp"
#include "htpv/spectral.hpp"

#include <cstddef>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <string_view>
#include <vector>

namespace htpv {

/// Half-open sample index range [begin, end).
struct SampleRange {
    std::size_t begin = 0;
    std::size_t end = 0;

    std::size_t size() const noexcept { return end - begin; }
    friend bool operator==(const SampleRange&, const SampleRange&) = default;
};

enum class FrameFlag {
    ok,
    held,        // no usable peak; previous frame's heart rate repeated
    degenerate,  // no usable peak on the first frame
    fallback,    // continuity band held no bin; global band searched instead
};

std::string_view to_string(FrameFlag flag) noexcept;
FrameFlag parse_frame_flag(std::string_view text);

struct HrEstimate {
    std::size_t frame_index = 0;
    double frame_start_s = 0.0;
    std::size_t bin_index = 0;
    double f_i = 0.0;     // Hz
    double f_r = 0.0;     // Hz
    double hr_bpm = 0.0;  // 60 * f_r
    FrequencyBand search_band_bpm;
    FrameFlag flag = FrameFlag::ok;
};

/// Sliding frames of round(window_s*fs) samples every round(hop_s*fs)
/// samples, starting at 0; a trailing partial frame is dropped.
/// Throws Error(config) for bad window/hop, Error(validation) if the
/// recording is shorter than one window.
std::vector<SampleRange> frames(const Recording& recording, double window_s, double hop_s);

/// [prev - continuity, prev + continuity] BPM, converted to Hz and
/// intersected with `global_band_hz`. May be empty (low >= high) when
/// prev_hr_bpm lies outside the global band; callers must check.
FrequencyBand next_search_band(double prev_hr_bpm, double continuity_bpm, FrequencyBand global_band_hz);

/// Per-frame intermediates, handed to an observer for plotting dumps.
struct FrameDiagnostics {
    std::size_t frame_index;
    double frame_start_s;
    double sample_rate_hz;
    const AnalyticFrame& analytic;
    const Spectrum& spectrum;
};

using FrameObserver = std::function<void(const FrameDiagnostics&)>;

/// Full pipeline: band-pass the recording once, then per frame take the
/// analytic-signal envelope power, its windowed zero-padded spectrum, the
/// peak inside the search band (global for frame 0, continuity-limited
/// afterwards) and the vocoder-refined frequency against the previous frame.
std::vector<HrEstimate> estimate_hr(const Recording& recording, const PipelineConfig& config,
                                    const FrameObserver& observer = {});

/// Threshold for flagging a frame with no usable spectral peak: the peak
/// magnitude must exceed this fraction of the raw frame energy.
inline constexpr double degenerate_peak_ratio = 1e-12;

// --- serialization ---------------------------------------------------------

/// Estimates plus the framing needed to rebuild each frame's time span.
struct EstimateTable {
    double window_s = 30.0;
    double hop_s = 15.0;
    std::vector<HrEstimate> estimates;
};

/// CSV with the pipeline configuration echoed as `# key=value` comment
/// lines, then `frame_index,frame_start_s,f_i_hz,f_r_hz,hr_bpm,flag`.
void write_estimates_csv(std::ostream& out, std::span<const HrEstimate> estimates, const PipelineConfig& config);
void write_estimates_json(std::ostream& out, std::span<const HrEstimate> estimates, const PipelineConfig& config);

/// Reads either format (JSON if the first non-blank character is '{').
EstimateTable parse_estimates(std::istream& in);
EstimateTable load_estimates(const std::filesystem::path& path);

}  // namespace htpv
