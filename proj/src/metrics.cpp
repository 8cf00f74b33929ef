#include "htpv/metrics.hpp"

#include "htpv/error.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>

namespace htpv {

PairedSeries::PairedSeries(std::vector<double> bpm_true, std::vector<double> bpm_est, std::vector<double> frame_times_s)
    : true_(std::move(bpm_true)), est_(std::move(bpm_est)), times_(std::move(frame_times_s)) {
    validate();
}

PairedSeries::PairedSeries(std::vector<double> bpm_true, std::vector<double> bpm_est)
    : true_(std::move(bpm_true)), est_(std::move(bpm_est)), times_(true_.size()) {
    std::iota(times_.begin(), times_.end(), 0.0);
    validate();
}

void PairedSeries::validate() const {
    if (true_.empty()) throw Error(ErrorKind::validation, "paired series is empty");
    if (est_.size() != true_.size() || times_.size() != true_.size()) {
        throw Error(ErrorKind::validation, "paired series lengths differ (" + std::to_string(true_.size()) + " true, " +
                                               std::to_string(est_.size()) + " estimated, " +
                                               std::to_string(times_.size()) + " times)");
    }
    auto valid_bpm = [](double v) { return std::isfinite(v) && v > 0.0; };
    for (std::size_t i = 0; i < true_.size(); ++i) {
        if (!valid_bpm(true_[i]) || !valid_bpm(est_[i]) || !std::isfinite(times_[i])) {
            throw Error(ErrorKind::validation, "invalid value in paired series at frame " + std::to_string(i));
        }
    }
}

std::vector<double> reference_hr(const ReferenceAnnotation& annotation,
                                 std::span<const std::pair<double, double>> frames_s) {
    const auto beats = annotation.rpeak_times_s();
    std::vector<double> out;
    out.reserve(frames_s.size());
    for (std::size_t k = 0; k < frames_s.size(); ++k) {
        const auto [start, end] = frames_s[k];
        const auto first = std::lower_bound(beats.begin(), beats.end(), start);
        const auto last = std::upper_bound(first, beats.end(), end);
        const auto count = std::distance(first, last);
        if (count < 2) {
            throw Error(ErrorKind::validation, "frame " + std::to_string(k) + " contains " + std::to_string(count) +
                                                   " reference beats; need at least 2");
        }
        double sum = 0.0;
        for (auto it = first + 1; it != last; ++it) sum += *it - *(it - 1);
        const double mean_rr = sum / static_cast<double>(count - 1);
        out.push_back(60.0 / mean_rr);
    }
    return out;
}

namespace {

std::vector<double> abs_errors(const PairedSeries& p) {
    std::vector<double> e(p.size());
    for (std::size_t i = 0; i < p.size(); ++i) e[i] = std::abs(p.bpm_true()[i] - p.bpm_est()[i]);
    return e;
}

double mean_of(std::span<const double> v) {
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double population_std(std::span<const double> v, double mean) {
    double ss = 0.0;
    for (const double x : v) ss += (x - mean) * (x - mean);
    return std::sqrt(ss / static_cast<double>(v.size()));
}

}  // namespace

double mae(const PairedSeries& p) {
    const auto e = abs_errors(p);
    return mean_of(e);
}

double std_abs_err(const PairedSeries& p) {
    const auto e = abs_errors(p);
    return population_std(e, mean_of(e));
}

double pearson_r(const PairedSeries& p) {
    if (p.size() < 2) throw Error(ErrorKind::undefined, "correlation needs at least 2 frames");
    const auto x = p.bpm_true();
    const auto y = p.bpm_est();
    const double mx = mean_of(x);
    const double my = mean_of(y);
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        const double dx = x[i] - mx;
        const double dy = y[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx == 0.0 || syy == 0.0) throw Error(ErrorKind::undefined, "correlation undefined for a constant series");
    return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

BlandAltman bland_altman(const PairedSeries& p) {
    BlandAltman ba;
    ba.diffs = abs_errors(p);
    ba.means.resize(p.size());
    for (std::size_t i = 0; i < p.size(); ++i) ba.means[i] = 0.5 * (p.bpm_true()[i] + p.bpm_est()[i]);
    const double m = mean_of(ba.diffs);
    const double s = population_std(ba.diffs, m);
    ba.lower = m - 1.96 * s;
    ba.upper = m + 1.96 * s;
    return ba;
}

MetricsReport evaluate(const PairedSeries& p) {
    MetricsReport r;
    r.n_frames = p.size();
    r.mae_bpm = mae(p);
    r.std_bpm = std_abs_err(p);
    const auto ba = bland_altman(p);
    r.ba_lower = ba.lower;
    r.ba_upper = ba.upper;
    try {
        r.pearson_r = pearson_r(p);
    } catch (const Error& e) {
        if (e.kind() != ErrorKind::undefined) throw;
    }
    return r;
}

void write_report_json(std::ostream& out, const MetricsReport& report) {
    nlohmann::json doc{{"mae_bpm", report.mae_bpm},
                       {"std_bpm", report.std_bpm},
                       {"pearson_r", nullptr},
                       {"bland_altman", {{"lower", report.ba_lower}, {"upper", report.ba_upper}}},
                       {"n_frames", report.n_frames}};
    if (report.pearson_r) doc["pearson_r"] = *report.pearson_r;
    out << doc.dump(2) << '\n';
}

void write_bland_altman_csv(std::ostream& out, const BlandAltman& ba) {
    out << "mean_bpm,abs_diff_bpm\n";
    for (std::size_t i = 0; i < ba.means.size(); ++i) {
        out << detail::format_double(ba.means[i]) << ',' << detail::format_double(ba.diffs[i]) << '\n';
    }
}

void write_hr_scatter_csv(std::ostream& out, const PairedSeries& p) {
    out << "frame_start_s,bpm_true,bpm_est\n";
    for (std::size_t i = 0; i < p.size(); ++i) {
        out << detail::format_double(p.frame_times_s()[i]) << ',' << detail::format_double(p.bpm_true()[i]) << ','
            << detail::format_double(p.bpm_est()[i]) << '\n';
    }
}

}  // namespace htpv
