#pragma once

#include <span>
#include <vector>

namespace htpv {

/// Analytic signal of one frame: real_part is the input, imag_part its
/// discrete Hilbert transform, envelope_power the squared magnitude.
struct AnalyticFrame {
    std::vector<double> real_part;
    std::vector<double> imag_part;
    std::vector<double> envelope_power;

    std::size_t size() const noexcept { return real_part.size(); }
};

/// Frequency-domain Hilbert transform: keep DC (and Nyquist for even
/// lengths), double positive frequencies, zero negative ones.
/// Throws Error(validation) for fewer than 2 samples or non-finite input.
AnalyticFrame analytic_signal(std::span<const double> x);

/// envelope_power with its arithmetic mean removed; this is the series whose
/// spectrum carries the heart-rate fundamental.
std::vector<double> envelope_for_spectrum(const AnalyticFrame& frame);

}  // namespace htpv
