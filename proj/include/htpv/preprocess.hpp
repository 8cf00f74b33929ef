#pragma once

#include "htpv/corpus_io.hpp"

#include <complex>
#include <span>
#include <vector>

namespace htpv {

/// One second-order section in direct form II transposed:
///   H(z) = (b0 + b1 z^-1 + b2 z^-2) / (1 + a1 z^-1 + a2 z^-2)
struct Biquad {
    double b0 = 1.0, b1 = 0.0, b2 = 0.0;
    double a1 = 0.0, a2 = 0.0;

    std::complex<double> response(std::complex<double> z_inv) const noexcept;
};

/// IIR band-pass filter. `sections` is the cascade used for filtering;
/// `feedforward`/`feedback` are the same transfer function expanded into
/// single polynomials in z^-1 (feedback[0] == 1).
struct FilterSpec {
    std::vector<double> feedforward;
    std::vector<double> feedback;
    std::vector<Biquad> sections;
    int order = 0;
    FrequencyBand band;
    double design_rate_hz = 0.0;

    /// Single-pass complex response at `frequency_hz`.
    std::complex<double> response(double frequency_hz) const;

    /// Poles of every section (two per section).
    std::vector<std::complex<double>> poles() const;
};

/// Butterworth band-pass of the given prototype order (2*order poles), built
/// by analog low-pass → band-pass transformation and the bilinear transform
/// with both band edges pre-warped. Gain is normalized to unity at the
/// centre frequency, which puts both edges at -3 dB.
///
/// Throws Error(config) unless 0 < low_hz < high_hz < sample_rate_hz/2 and order >= 1.
FilterSpec design_bandpass(double low_hz, double high_hz, double sample_rate_hz, int order);

/// Forward-backward (zero-phase) filtering. The signal is extended at each end
/// by an odd reflection of 3*order samples, every section starts from its
/// step steady state scaled to the first sample, and the extension is trimmed.
///
/// Throws Error(validation) if x.size() <= 3*order or x has non-finite values.
std::vector<double> filtfilt(std::span<const double> x, const FilterSpec& spec);

}  // namespace htpv
