#include "htpv/spectral.hpp"

#include "htpv/error.hpp"
#include "htpv/fft.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>

namespace htpv {

std::size_t padded_fft_length(std::size_t frame_length, int pad_factor) {
    if (pad_factor < 1) throw Error(ErrorKind::config, "pad_factor must be at least 1");
    if (pad_factor == 1) return frame_length;
    return std::bit_ceil(frame_length * static_cast<std::size_t>(pad_factor));
}

std::vector<double> make_window(WindowFunction fn, std::size_t length) {
    std::vector<double> w(length, 1.0);
    if (fn == WindowFunction::hann && length > 1) {
        const double denom = static_cast<double>(length - 1);
        for (std::size_t i = 0; i < length; ++i) {
            w[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) / denom);
        }
    }
    return w;
}

Spectrum frame_spectrum(std::span<const double> env, double sample_rate_hz, int pad_factor,
                        WindowFunction window_fn, double frame_time_s) {
    if (env.empty()) throw Error(ErrorKind::validation, "cannot transform an empty frame");
    if (!(sample_rate_hz > 0.0)) throw Error(ErrorKind::config, "sample rate must be positive");
    if (std::any_of(env.begin(), env.end(), [](double v) { return !std::isfinite(v); })) {
        throw Error(ErrorKind::validation, "frame has non-finite samples");
    }
    const std::size_t length = padded_fft_length(env.size(), pad_factor);

    auto windowed = make_window(window_fn, env.size());
    for (std::size_t i = 0; i < env.size(); ++i) windowed[i] *= env[i];

    Spectrum s;
    s.fft_length = length;
    s.bin_spacing_hz = sample_rate_hz / static_cast<double>(length);
    s.frame_time_s = frame_time_s;
    s.bins = fft::forward_real(windowed, length);
    return s;
}

PeakPick pick_at(const Spectrum& spectrum, std::size_t bin_index) {
    if (bin_index >= spectrum.bins.size()) throw Error(ErrorKind::range, "bin index outside spectrum");
    const auto value = spectrum.bins[bin_index];
    double phase = std::arg(value);
    if (phase <= -std::numbers::pi) phase = std::numbers::pi;
    return {bin_index, spectrum.frequency_of(bin_index), std::abs(value), phase};
}

PeakPick peak_pick(const Spectrum& spectrum, FrequencyBand band) {
    if (!(band.low_hz < band.high_hz)) throw Error(ErrorKind::range, "search band is empty");
    if (spectrum.bins.empty() || !(spectrum.bin_spacing_hz > 0.0)) {
        throw Error(ErrorKind::range, "spectrum has no bins");
    }
    // Small slack so a band edge that equals a bin centre up to rounding still includes it.
    constexpr double slack = 1e-9;
    const double lo = std::max(0.0, std::ceil(band.low_hz / spectrum.bin_spacing_hz - slack));
    const double hi = std::floor(band.high_hz / spectrum.bin_spacing_hz + slack);
    const double last = static_cast<double>(spectrum.bins.size() - 1);
    if (lo > hi || lo > last) throw Error(ErrorKind::range, "no spectrum bin inside the search band");
    const auto first = static_cast<std::size_t>(lo);
    const auto end = static_cast<std::size_t>(std::min(hi, last)) + 1;

    std::size_t best = first;
    double best_mag = std::abs(spectrum.bins[first]);
    for (std::size_t k = first + 1; k < end; ++k) {
        const double mag = std::abs(spectrum.bins[k]);
        if (mag > best_mag) {
            best = k;
            best_mag = mag;
        }
    }
    return pick_at(spectrum, best);
}

VocoderResult vocoder_refine(const PeakPick& prev, const PeakPick& cur, double hop_s) {
    if (!(hop_s > 0.0) || !std::isfinite(hop_s)) throw Error(ErrorKind::config, "hop must be positive");
    const double cycles = (cur.phase - prev.phase) / (2.0 * std::numbers::pi);
    const double f_i = cur.f_i;
    // f(n) = (cycles + n) / hop in [f_i - 1/hop, f_i + 1/hop]
    const auto n_lo = std::max(0.0, std::ceil((f_i * hop_s - 1.0) - cycles));
    const auto n_hi = std::floor((f_i * hop_s + 1.0) - cycles);

    VocoderResult result;
    double best_dev = 0.0;
    for (double n = n_lo; n <= n_hi; n += 1.0) {
        const double f = (cycles + n) / hop_s;
        const double dev = std::abs(f - f_i);
        if (result.candidates.empty() || dev < best_dev) {
            best_dev = dev;
            result.f_r = f;
            result.chosen_n = static_cast<long long>(n);
        }
        result.candidates.push_back({static_cast<long long>(n), f});
    }
    if (result.candidates.empty()) throw Error(ErrorKind::range, "no vocoder candidate near the peak frequency");
    return result;
}

}  // namespace htpv
