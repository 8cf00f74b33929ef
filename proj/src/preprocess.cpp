#include "htpv/preprocess.hpp"

#include "htpv/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace htpv {

using cplx = std::complex<double>;

std::complex<double> Biquad::response(cplx z_inv) const noexcept {
    const cplx num = b0 + z_inv * (b1 + z_inv * b2);
    const cplx den = 1.0 + z_inv * (a1 + z_inv * a2);
    return num / den;
}

std::complex<double> FilterSpec::response(double frequency_hz) const {
    const double w = 2.0 * std::numbers::pi * frequency_hz / design_rate_hz;
    const cplx z_inv = std::polar(1.0, -w);
    cplx h = 1.0;
    for (const auto& s : sections) h *= s.response(z_inv);
    return h;
}

std::vector<std::complex<double>> FilterSpec::poles() const {
    std::vector<cplx> out;
    out.reserve(2 * sections.size());
    for (const auto& s : sections) {
        // z^2 + a1 z + a2 = 0
        const cplx disc = std::sqrt(cplx(s.a1 * s.a1 - 4.0 * s.a2, 0.0));
        out.push_back((-s.a1 + disc) / 2.0);
        out.push_back((-s.a1 - disc) / 2.0);
    }
    return out;
}

namespace {

std::vector<double> poly_mul(const std::vector<double>& p, const std::vector<double>& q) {
    std::vector<double> r(p.size() + q.size() - 1, 0.0);
    for (std::size_t i = 0; i < p.size(); ++i)
        for (std::size_t j = 0; j < q.size(); ++j) r[i + j] += p[i] * q[j];
    return r;
}

// Section with zeros at z = +1 and z = -1 and the given conjugate (or real) pole pair.
Biquad bandpass_section(cplx p1, cplx p2) {
    Biquad s;
    s.b0 = 1.0;
    s.b1 = 0.0;
    s.b2 = -1.0;
    s.a1 = -(p1 + p2).real();
    s.a2 = (p1 * p2).real();
    return s;
}

}  // namespace

FilterSpec design_bandpass(double low_hz, double high_hz, double sample_rate_hz, int order) {
    if (!(sample_rate_hz > 0.0) || !std::isfinite(sample_rate_hz)) {
        throw Error(ErrorKind::config, "sample rate must be positive");
    }
    if (order < 1) throw Error(ErrorKind::config, "filter order must be at least 1");
    if (!(low_hz > 0.0 && low_hz < high_hz && high_hz < sample_rate_hz / 2.0)) {
        throw Error(ErrorKind::config, "band edges must satisfy 0 < low < high < Nyquist");
    }
    using std::numbers::pi;
    const double fs2 = 2.0 * sample_rate_hz;
    const double w_low = fs2 * std::tan(pi * low_hz / sample_rate_hz);
    const double w_high = fs2 * std::tan(pi * high_hz / sample_rate_hz);
    const double bw = w_high - w_low;
    const double w0_sq = w_low * w_high;

    auto to_digital = [fs2](cplx s) { return (fs2 + s) / (fs2 - s); };
    // Low-pass pole p maps to the two roots of s^2 - p*bw*s + w0^2.
    auto bandpass_pair = [&](cplx p) {
        const cplx half = p * bw / 2.0;
        const cplx root = std::sqrt(half * half - w0_sq);
        return std::pair{to_digital(half + root), to_digital(half - root)};
    };

    FilterSpec spec;
    spec.order = order;
    spec.band = {low_hz, high_hz};
    spec.design_rate_hz = sample_rate_hz;
    for (int k = 0; k < order; ++k) {
        const cplx p = std::polar(1.0, pi * (2.0 * k + order + 1.0) / (2.0 * order));
        if (2 * k + 1 == order) {
            // Real prototype pole: its two band-pass images form one section.
            const auto [z1, z2] = bandpass_pair(cplx(-1.0, 0.0));
            spec.sections.push_back(bandpass_section(z1, z2));
        } else if (p.imag() > 0.0) {
            // Each upper-half-plane pole pairs with its conjugate's images.
            const auto [z1, z2] = bandpass_pair(p);
            spec.sections.push_back(bandpass_section(z1, std::conj(z1)));
            spec.sections.push_back(bandpass_section(z2, std::conj(z2)));
        }
    }

    // Unity gain at the (digital image of the) geometric centre frequency.
    const double centre_hz = std::atan(std::sqrt(w0_sq) / fs2) * sample_rate_hz / pi;
    const double gain = 1.0 / std::abs(spec.response(centre_hz));
    const double per_section = std::pow(gain, 1.0 / static_cast<double>(spec.sections.size()));
    for (auto& s : spec.sections) {
        s.b0 *= per_section;
        s.b1 *= per_section;
        s.b2 *= per_section;
    }

    spec.feedforward = {1.0};
    spec.feedback = {1.0};
    for (const auto& s : spec.sections) {
        spec.feedforward = poly_mul(spec.feedforward, {s.b0, s.b1, s.b2});
        spec.feedback = poly_mul(spec.feedback, {1.0, s.a1, s.a2});
    }
    return spec;
}

namespace {

struct SectionState {
    double z1 = 0.0, z2 = 0.0;
};

// Initial states that make the cascade output its steady-state response to a
// unit step, i.e. no transient when the input starts at a constant level.
std::vector<SectionState> step_steady_state(std::span<const Biquad> sections) {
    std::vector<SectionState> zi(sections.size());
    double input_level = 1.0;
    for (std::size_t i = 0; i < sections.size(); ++i) {
        const auto& s = sections[i];
        const double dc_gain = (s.b0 + s.b1 + s.b2) / (1.0 + s.a1 + s.a2);
        const double y = dc_gain * input_level;
        zi[i].z1 = y - s.b0 * input_level;
        zi[i].z2 = s.b2 * input_level - s.a2 * y;
        input_level = y;
    }
    return zi;
}

void run_cascade(std::vector<double>& x, std::span<const Biquad> sections, std::span<const SectionState> zi) {
    const double x0 = x.front();
    for (std::size_t i = 0; i < sections.size(); ++i) {
        const auto& s = sections[i];
        double z1 = zi[i].z1 * x0;
        double z2 = zi[i].z2 * x0;
        for (double& v : x) {
            const double in = v;
            const double out = s.b0 * in + z1;
            z1 = s.b1 * in - s.a1 * out + z2;
            z2 = s.b2 * in - s.a2 * out;
            v = out;
        }
    }
}

}  // namespace

std::vector<double> filtfilt(std::span<const double> x, const FilterSpec& spec) {
    const std::size_t pad = 3 * static_cast<std::size_t>(spec.order);
    if (x.size() <= pad) {
        throw Error(ErrorKind::validation, "signal of " + std::to_string(x.size()) +
                                               " samples is too short to filter (need more than " +
                                               std::to_string(pad) + ")");
    }
    if (std::any_of(x.begin(), x.end(), [](double v) { return !std::isfinite(v); })) {
        throw Error(ErrorKind::validation, "cannot filter non-finite samples");
    }
    const std::size_t n = x.size();
    std::vector<double> ext;
    ext.reserve(n + 2 * pad);
    for (std::size_t i = pad; i >= 1; --i) ext.push_back(2.0 * x[0] - x[i]);
    ext.insert(ext.end(), x.begin(), x.end());
    for (std::size_t i = 1; i <= pad; ++i) ext.push_back(2.0 * x[n - 1] - x[n - 1 - i]);

    const auto zi = step_steady_state(spec.sections);
    run_cascade(ext, spec.sections, zi);
    std::reverse(ext.begin(), ext.end());
    run_cascade(ext, spec.sections, zi);
    std::reverse(ext.begin(), ext.end());

    return {ext.begin() + static_cast<std::ptrdiff_t>(pad), ext.begin() + static_cast<std::ptrdiff_t>(pad + n)};
}

}  // namespace htpv
