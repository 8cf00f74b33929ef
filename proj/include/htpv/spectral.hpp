#pragma once

#include "htpv/corpus_io.hpp"

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace htpv {

/// One-sided spectrum of a windowed, zero-padded frame.
struct Spectrum {
    std::vector<std::complex<double>> bins;  // fft_length/2 + 1 entries
    double bin_spacing_hz = 0.0;             // sample_rate_hz / fft_length
    std::size_t fft_length = 0;
    double frame_time_s = 0.0;               // start of the frame in the recording

    double frequency_of(std::size_t bin) const noexcept { return static_cast<double>(bin) * bin_spacing_hz; }
};

struct PeakPick {
    std::size_t bin_index = 0;
    double f_i = 0.0;        // bin centre, Hz
    double amplitude = 0.0;  // |bins[bin_index]|
    double phase = 0.0;      // arg(bins[bin_index]) in (-π, π]
};

struct VocoderCandidate {
    long long n = 0;
    double frequency_hz = 0.0;
};

struct VocoderResult {
    double f_r = 0.0;
    long long chosen_n = 0;
    std::vector<VocoderCandidate> candidates;
};

/// FFT length used for a frame of `frame_length` samples. pad_factor 1 means
/// no padding (the frame length itself); larger factors round
/// pad_factor*frame_length up to a power of two.
std::size_t padded_fft_length(std::size_t frame_length, int pad_factor);

std::vector<double> make_window(WindowFunction fn, std::size_t length);

/// Windows `env`, zero-pads it to padded_fft_length() and transforms it.
/// Throws Error(validation) on empty or non-finite input, Error(config) if pad_factor < 1.
Spectrum frame_spectrum(std::span<const double> env, double sample_rate_hz, int pad_factor,
                        WindowFunction window_fn, double frame_time_s = 0.0);

/// Largest-magnitude bin whose centre lies in [band.low_hz, band.high_hz];
/// ties go to the lower frequency. Throws Error(range) if no bin is in range.
PeakPick peak_pick(const Spectrum& spectrum, FrequencyBand band);

/// Reads bin `bin_index` of a spectrum as a PeakPick (used to fetch the
/// previous frame's phase at the current frame's peak bin).
PeakPick pick_at(const Spectrum& spectrum, std::size_t bin_index);

/// Phase-vocoder refinement from two picks `hop_s` seconds apart. Candidates
///   f(n) = (Δφ + 2πn) / (2π hop_s),  n >= 0,
/// are enumerated within ±1/hop_s of cur.f_i and the one closest to cur.f_i
/// wins (ties toward lower frequency). Throws Error(config) if hop_s <= 0.
VocoderResult vocoder_refine(const PeakPick& prev, const PeakPick& cur, double hop_s);

}  // namespace htpv
