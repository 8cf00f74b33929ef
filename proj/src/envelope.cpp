#include "htpv/envelope.hpp"

#include "htpv/error.hpp"
#include "htpv/fft.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace htpv {

AnalyticFrame analytic_signal(std::span<const double> x) {
    const std::size_t n = x.size();
    if (n < 2) throw Error(ErrorKind::validation, "analytic signal needs at least 2 samples");
    if (std::any_of(x.begin(), x.end(), [](double v) { return !std::isfinite(v); })) {
        throw Error(ErrorKind::validation, "analytic signal input has non-finite samples");
    }

    std::vector<fft::Complex> buf(x.begin(), x.end());
    auto spectrum = fft::forward(buf);
    // Bins 1 .. ceil(n/2)-1 are strictly positive frequencies.
    const std::size_t positive_end = (n + 1) / 2;
    for (std::size_t k = 1; k < positive_end; ++k) spectrum[k] *= 2.0;
    const std::size_t negative_begin = n / 2 + 1;
    for (std::size_t k = negative_begin; k < n; ++k) spectrum[k] = 0.0;
    const auto analytic = fft::inverse(spectrum);

    AnalyticFrame frame;
    frame.real_part.assign(x.begin(), x.end());
    frame.imag_part.resize(n);
    frame.envelope_power.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double im = analytic[i].imag();
        frame.imag_part[i] = im;
        frame.envelope_power[i] = x[i] * x[i] + im * im;
    }
    return frame;
}

std::vector<double> envelope_for_spectrum(const AnalyticFrame& frame) {
    const auto& p = frame.envelope_power;
    if (p.empty() || frame.real_part.size() != p.size() || frame.imag_part.size() != p.size()) {
        throw Error(ErrorKind::validation, "malformed analytic frame");
    }
    const double mean = std::accumulate(p.begin(), p.end(), 0.0) / static_cast<double>(p.size());
    std::vector<double> out(p.size());
    std::transform(p.begin(), p.end(), out.begin(), [mean](double v) { return v - mean; });
    return out;
}

}  // namespace htpv
