#include "htpv/synth.hpp"

#include "htpv/error.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

namespace htpv {

namespace {

constexpr double min_profile_bpm = 36.0;
constexpr double max_profile_bpm = 240.0;

}  // namespace

HrProfile::HrProfile(std::vector<Breakpoint> breakpoints) : points_(std::move(breakpoints)) {
    if (points_.empty()) throw Error(ErrorKind::validation, "heart-rate profile has no breakpoints");
    for (std::size_t i = 0; i < points_.size(); ++i) {
        const auto& p = points_[i];
        if (!std::isfinite(p.time_s) || !std::isfinite(p.bpm) || p.bpm < min_profile_bpm || p.bpm > max_profile_bpm) {
            throw Error(ErrorKind::validation, "profile breakpoint " + std::to_string(i) + " outside [36, 240] BPM");
        }
        if (i > 0 && !(p.time_s > points_[i - 1].time_s)) {
            throw Error(ErrorKind::validation, "profile breakpoint times must be strictly increasing");
        }
    }
}

double HrProfile::bpm_at(double t) const noexcept {
    if (t <= points_.front().time_s) return points_.front().bpm;
    if (t >= points_.back().time_s) return points_.back().bpm;
    const auto upper = std::upper_bound(points_.begin(), points_.end(), t,
                                        [](double v, const Breakpoint& b) { return v < b.time_s; });
    const auto& b = *upper;
    const auto& a = *(upper - 1);
    const double u = (t - a.time_s) / (b.time_s - a.time_s);
    return a.bpm + u * (b.bpm - a.bpm);
}

double HrProfile::max_bpm() const noexcept {
    return std::max_element(points_.begin(), points_.end(),
                            [](const Breakpoint& a, const Breakpoint& b) { return a.bpm < b.bpm; })
        ->bpm;
}

namespace {

// Segment boundaries of the piecewise-linear rate over [0, end].
std::vector<double> knots(const std::vector<HrProfile::Breakpoint>& points, double end) {
    std::vector<double> k{0.0};
    for (const auto& p : points) {
        if (p.time_s > 0.0 && p.time_s < end) k.push_back(p.time_s);
    }
    k.push_back(end);
    return k;
}

/// Beats over one segment with linear rate; the trapezoid rule is exact.
double segment_beats(double bpm_a, double bpm_b, double dt) { return 0.5 * (bpm_a + bpm_b) / 60.0 * dt; }

}  // namespace

double HrProfile::beats_until(double t) const noexcept {
    if (t <= 0.0) return 0.0;
    const auto ks = knots(points_, t);
    double beats = 0.0;
    for (std::size_t i = 1; i < ks.size(); ++i) beats += segment_beats(bpm_at(ks[i - 1]), bpm_at(ks[i]), ks[i] - ks[i - 1]);
    return beats;
}

HrProfile HrProfile::parse(std::string_view text) {
    std::vector<Breakpoint> points;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto comma = text.find(',', pos);
        const auto item = detail::trim(text.substr(pos, comma == std::string_view::npos ? std::string_view::npos : comma - pos));
        if (!item.empty()) {
            const auto colon = item.find(':');
            if (colon == std::string_view::npos) {
                throw Error(ErrorKind::parse, "profile breakpoint '" + std::string(item) + "' is not 'time:bpm'");
            }
            points.push_back({detail::parse_double(item.substr(0, colon), "profile time"),
                              detail::parse_double(item.substr(colon + 1), "profile bpm")});
        }
        if (comma == std::string_view::npos) break;
        pos = comma + 1;
    }
    return HrProfile(std::move(points));
}

std::string HrProfile::to_text() const {
    std::string out;
    for (const auto& p : points_) {
        if (!out.empty()) out += ", ";
        out += detail::format_double(p.time_s) + ":" + detail::format_double(p.bpm);
    }
    return out;
}

void SignalModelParams::validate() const {
    auto require = [](bool ok, const std::string& message) {
        if (!ok) throw Error(ErrorKind::validation, message);
    };
    const PipelineConfig defaults;
    require(sample_rate_hz > 0.0 && std::isfinite(sample_rate_hz), "sample_rate_hz must be positive");
    require(duration_s > 0.0 && std::isfinite(duration_s), "duration_s must be positive");
    require(carrier_hz > defaults.band_low_hz && carrier_hz < defaults.band_high_hz && carrier_hz < sample_rate_hz / 2.0,
            "carrier_hz must lie strictly inside the 0.7-10 Hz passband and below Nyquist");
    require(pulse_width_s > 0.0 && pulse_width_s < 60.0 / hr_profile.max_bpm(),
            "pulse_width_s must be positive and shorter than the minimum beat interval");
    require(resp_rate_hz >= 0.0 && std::isfinite(resp_rate_hz), "resp_rate_hz must be non-negative");
    require(std::isfinite(resp_amp) && std::isfinite(pulse_amp) && pulse_amp >= 0.0, "amplitudes must be finite");
    require(noise_std >= 0.0 && std::isfinite(noise_std), "noise_std must be non-negative");
}

void SignalModelParams::set(std::string_view key, std::string_view value) {
    key = detail::trim(key);
    const std::string what = "key '" + std::string(key) + "'";
    if (key == "hr_profile") hr_profile = HrProfile::parse(value);
    else if (key == "resp_rate_hz") resp_rate_hz = detail::parse_double(value, what);
    else if (key == "resp_amp") resp_amp = detail::parse_double(value, what);
    else if (key == "carrier_hz") carrier_hz = detail::parse_double(value, what);
    else if (key == "pulse_width_s") pulse_width_s = detail::parse_double(value, what);
    else if (key == "pulse_amp") pulse_amp = detail::parse_double(value, what);
    else if (key == "noise_std") noise_std = detail::parse_double(value, what);
    else if (key == "sample_rate_hz") sample_rate_hz = detail::parse_double(value, what);
    else if (key == "duration_s") duration_s = detail::parse_double(value, what);
    else if (key == "seed") {
        const long long s = detail::parse_integer(value, what);
        if (s < 0) throw Error(ErrorKind::config, what + ": seed must be non-negative");
        seed = static_cast<std::uint64_t>(s);
    } else {
        throw Error(ErrorKind::config, "unknown " + what);
    }
}

std::vector<double> beat_times(const HrProfile& profile, double duration_s) {
    std::vector<double> beats;
    const auto ks = knots(profile.breakpoints(), duration_s);
    double phase = 0.0;  // beats elapsed at the start of the segment
    double next = 0.0;   // index of the next beat to place
    for (std::size_t i = 1; i < ks.size(); ++i) {
        const double ta = ks[i - 1];
        const double tb = ks[i];
        const double ra = profile.bpm_at(ta) / 60.0;
        const double rb = profile.bpm_at(tb) / 60.0;
        const double slope = (rb - ra) / (tb - ta);
        const double phase_end = phase + segment_beats(profile.bpm_at(ta), profile.bpm_at(tb), tb - ta);
        while (next <= phase_end) {
            // Solve phase + ra*tau + slope*tau^2/2 = next in the cancellation-free form.
            const double need = next - phase;
            const double tau = 2.0 * need / (ra + std::sqrt(std::max(0.0, ra * ra + 2.0 * slope * need)));
            const double t = next == phase_end ? tb : std::min(ta + tau, tb);
            if (t >= duration_s) return beats;
            beats.push_back(t);
            next += 1.0;
        }
        phase = phase_end;
    }
    return beats;
}

SyntheticRecording generate_bcg(const SignalModelParams& params, std::string label) {
    params.validate();
    using std::numbers::pi;
    const double fs = params.sample_rate_hz;
    const auto n = static_cast<std::size_t>(std::llround(params.duration_s * fs));
    if (n == 0) throw Error(ErrorKind::validation, "duration shorter than one sample");
    const double duration = static_cast<double>(n) / fs;

    auto beats = beat_times(params.hr_profile, duration);
    if (beats.empty()) throw Error(ErrorKind::validation, "profile produces no beats");

    std::vector<double> pulse(n, 0.0);
    const double width = params.pulse_width_s;
    for (const double tb : beats) {
        const auto i0 = static_cast<std::size_t>(std::ceil(tb * fs));
        const auto i1 = std::min(n - 1, static_cast<std::size_t>(std::floor((tb + width) * fs)));
        for (std::size_t i = i0; i <= i1 && i < n; ++i) {
            const double tau = static_cast<double>(i) / fs - tb;
            pulse[i] += params.pulse_amp * 0.5 * (1.0 - std::cos(2.0 * pi * tau / width));
        }
    }

    std::mt19937_64 rng(params.seed);
    std::normal_distribution<double> noise(0.0, 1.0);
    std::vector<double> s(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double t = static_cast<double>(i) / fs;
        const double e = params.noise_std > 0.0 ? params.noise_std * noise(rng) : 0.0;
        s[i] = params.resp_amp * std::sin(2.0 * pi * params.resp_rate_hz * t) +
               pulse[i] * std::cos(2.0 * pi * params.carrier_hz * t) + e;
    }
    return {Recording(std::move(s), fs, std::move(label)), ReferenceAnnotation(std::move(beats))};
}

// ---------------------------------------------------------------------------
// Corpus

namespace {

bool valid_label(std::string_view label) {
    return !label.empty() && label != "." && label != ".." &&
           std::all_of(label.begin(), label.end(), [](unsigned char c) {
               return std::isalnum(c) || c == '_' || c == '-' || c == '.';
           });
}

}  // namespace

std::vector<CorpusEntry> parse_corpus_spec(std::istream& in) {
    std::vector<CorpusEntry> entries;
    SignalModelParams defaults;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string where = "corpus spec line " + std::to_string(line_no);
        auto text = detail::trim(line);
        if (const auto hash = text.find('#'); hash != std::string_view::npos) text = detail::trim(text.substr(0, hash));
        if (text.empty()) continue;
        if (text.front() == '[') {
            if (text.back() != ']') throw Error(ErrorKind::parse, where + ": unterminated block header");
            const auto label = detail::trim(text.substr(1, text.size() - 2));
            if (!valid_label(label)) throw Error(ErrorKind::parse, where + ": invalid label '" + std::string(label) + "'");
            for (const auto& e : entries) {
                if (e.label == label) throw Error(ErrorKind::parse, where + ": duplicate label '" + std::string(label) + "'");
            }
            entries.push_back({std::string(label), defaults});
            continue;
        }
        const auto eq = text.find('=');
        if (eq == std::string_view::npos) throw Error(ErrorKind::parse, where + ": expected 'key = value'");
        auto& target = entries.empty() ? defaults : entries.back().params;
        try {
            target.set(text.substr(0, eq), text.substr(eq + 1));
        } catch (const Error& e) {
            throw Error(e.kind(), where + ": " + e.what());
        }
    }
    for (const auto& e : entries) {
        try {
            e.params.validate();
        } catch (const Error& err) {
            throw Error(ErrorKind::validation, "corpus entry '" + e.label + "': " + err.what());
        }
    }
    return entries;
}

std::vector<CorpusEntry> load_corpus_spec(const std::filesystem::path& path) {
    std::error_code ec;
    if (!std::filesystem::is_regular_file(path, ec)) throw Error(ErrorKind::not_found, "input not found: " + path.string());
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::io, "cannot open " + path.string());
    return parse_corpus_spec(in);
}

CorpusFiles corpus_file_names(const std::filesystem::path& dir, const std::string& label) {
    return {dir / (label + ".csv"), dir / (label + ".rpeaks")};
}

std::vector<CorpusFiles> make_corpus(const std::vector<CorpusEntry>& entries, const std::filesystem::path& out_dir) {
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec || !std::filesystem::is_directory(out_dir)) {
        throw Error(ErrorKind::io, "cannot create output directory " + out_dir.string());
    }
    std::vector<CorpusFiles> written;
    for (const auto& entry : entries) {
        const auto synthetic = generate_bcg(entry.params, entry.label);
        const auto files = corpus_file_names(out_dir, entry.label);
        save_recording_csv(files.recording, synthetic.recording);
        save_annotation(files.annotation, synthetic.annotation);
        written.push_back(files);
    }
    return written;
}

}  // namespace htpv
