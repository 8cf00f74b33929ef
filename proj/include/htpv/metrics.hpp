#pragma once

#include "htpv/corpus_io.hpp"

#include <iosfwd>
#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace htpv {

/// Reference and estimated heart rate paired frame by frame.
class PairedSeries {
public:
    /// Throws Error(validation) unless all three have equal length N >= 1,
    /// every value is finite and every BPM value is positive.
    PairedSeries(std::vector<double> bpm_true, std::vector<double> bpm_est, std::vector<double> frame_times_s);
    /// Frame times default to 0, 1, 2, ...
    PairedSeries(std::vector<double> bpm_true, std::vector<double> bpm_est);

    std::span<const double> bpm_true() const noexcept { return true_; }
    std::span<const double> bpm_est() const noexcept { return est_; }
    std::span<const double> frame_times_s() const noexcept { return times_; }
    std::size_t size() const noexcept { return true_.size(); }

private:
    void validate() const;

    std::vector<double> true_;
    std::vector<double> est_;
    std::vector<double> times_;
};

struct BlandAltman {
    std::vector<double> means;  // (true + est) / 2
    std::vector<double> diffs;  // |true - est|
    double lower = 0.0;         // mae - 1.96 std
    double upper = 0.0;         // mae + 1.96 std
};

struct MetricsReport {
    double mae_bpm = 0.0;
    double std_bpm = 0.0;
    std::optional<double> pearson_r;  // empty when either series is constant
    double ba_lower = 0.0;
    double ba_upper = 0.0;
    std::size_t n_frames = 0;
};

/// Per frame: 60 / mean R-R interval over the beats inside [start, end].
/// Throws Error(validation) naming the frame if it holds fewer than 2 beats.
std::vector<double> reference_hr(const ReferenceAnnotation& annotation,
                                 std::span<const std::pair<double, double>> frames_s);

/// Mean absolute error.
double mae(const PairedSeries& p);
/// Population standard deviation of the absolute error.
double std_abs_err(const PairedSeries& p);
/// Pearson product-moment correlation. Throws Error(undefined) for N < 2 or
/// a constant series.
double pearson_r(const PairedSeries& p);
/// Agreement data using absolute error against the pair mean, with limits
/// mae ± 1.96·std.
BlandAltman bland_altman(const PairedSeries& p);

MetricsReport evaluate(const PairedSeries& p);

void write_report_json(std::ostream& out, const MetricsReport& report);
/// `mean_bpm,abs_diff_bpm` rows.
void write_bland_altman_csv(std::ostream& out, const BlandAltman& ba);
/// `frame_start_s,bpm_true,bpm_est` rows.
void write_hr_scatter_csv(std::ostream& out, const PairedSeries& p);

}  // namespace htpv
