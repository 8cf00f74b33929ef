#include "htpv/tracker.hpp"

#include "htpv/synth.hpp"

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "test_util.hpp"

#include <cmath>
#include <sstream>

namespace htpv {
namespace {

using testing::kind_of;
using testing::pi;

constexpr double fs = 225.0;

Recording zeros(double seconds) { return Recording(std::vector<double>(static_cast<std::size_t>(seconds * fs), 0.0), fs); }

/// Noise level giving the requested cardiac-component SNR for unit pulses.
/// The raised-cosine pulse train has mean-square 3/8 · width · rate; the
/// carrier halves it.
double noise_for_snr_db(double bpm, double width_s, double snr_db) {
    const double signal_power = 0.5 * 0.375 * width_s * bpm / 60.0;
    return std::sqrt(signal_power / std::pow(10.0, snr_db / 10.0));
}

TEST(Frames, SixtySecondsGivesThreeFrames) {
    const auto f = frames(zeros(60.0), 30.0, 15.0);
    ASSERT_EQ(f.size(), 3u);
    EXPECT_EQ(f[0], (SampleRange{0, 6750}));
    EXPECT_EQ(f[1], (SampleRange{3375, 10125}));
    EXPECT_EQ(f[2], (SampleRange{6750, 13500}));
}

TEST(Frames, BoundaryAndTooShort) {
    EXPECT_EQ(frames(zeros(30.0), 30.0, 15.0).size(), 1u);
    EXPECT_EQ(kind_of([] { frames(zeros(29.0), 30.0, 15.0); }), ErrorKind::validation);
    EXPECT_EQ(kind_of([] { frames(zeros(60.0), 30.0, 0.0); }), ErrorKind::config);
    EXPECT_EQ(kind_of([] { frames(zeros(60.0), 0.0, 15.0); }), ErrorKind::config);
}

TEST(Frames, CountFormula) {
    for (double seconds : {30.0, 44.9, 45.0, 61.0, 600.0, 900.3}) {
        const auto rec = zeros(seconds);
        const std::size_t n = rec.size();
        const std::size_t expected = (n - 6750) / 3375 + 1;
        EXPECT_EQ(frames(rec, 30.0, 15.0).size(), expected) << seconds;
    }
}

TEST(NextSearchBand, Examples) {
    const FrequencyBand global{0.6, 4.0};
    auto b = next_search_band(72.0, 10.0, global);
    EXPECT_NEAR(b.low_hz, 62.0 / 60.0, 1e-12);
    EXPECT_NEAR(b.high_hz, 82.0 / 60.0, 1e-12);
    EXPECT_NEAR(b.low_hz, 1.0333, 1e-4);
    EXPECT_NEAR(b.high_hz, 1.3667, 1e-4);

    b = next_search_band(40.0, 10.0, global);
    EXPECT_NEAR(60.0 * b.low_hz, 36.0, 1e-12);
    EXPECT_NEAR(60.0 * b.high_hz, 50.0, 1e-12);

    b = next_search_band(240.0, 10.0, global);
    EXPECT_NEAR(60.0 * b.low_hz, 230.0, 1e-12);
    EXPECT_NEAR(60.0 * b.high_hz, 240.0, 1e-12);

    b = next_search_band(300.0, 10.0, global);
    EXPECT_GE(b.low_hz, b.high_hz);
}

SignalModelParams constant_rate(double bpm, double seconds, double noise_std, std::uint64_t seed) {
    SignalModelParams p;
    p.hr_profile = HrProfile::constant(bpm);
    p.duration_s = seconds;
    p.noise_std = noise_std;
    p.seed = seed;
    return p;
}

TEST(EstimateHr, ConstantRateAtTenDbSnr) {
    const auto params = constant_rate(72.0, 300.0, noise_for_snr_db(72.0, 0.12, 10.0), 1);
    const auto synth = generate_bcg(params);
    const auto est = estimate_hr(synth.recording, PipelineConfig{});
    ASSERT_EQ(est.size(), 19u);
    for (const auto& e : est) {
        EXPECT_GE(e.hr_bpm, 71.0) << e.frame_index;
        EXPECT_LE(e.hr_bpm, 73.0) << e.frame_index;
        EXPECT_EQ(e.flag, FrameFlag::ok);
        EXPECT_DOUBLE_EQ(e.hr_bpm, 60.0 * e.f_r);
    }
    EXPECT_DOUBLE_EQ(est[0].f_r, est[0].f_i);
}

TEST(EstimateHr, RampIsTrackedWithinTwoBpm) {
    SignalModelParams p;
    p.hr_profile = HrProfile({{0.0, 60.0}, {600.0, 90.0}});
    p.duration_s = 600.0;
    p.noise_std = 0.1;
    p.seed = 2;
    const auto synth = generate_bcg(p);
    const PipelineConfig config;
    const auto est = estimate_hr(synth.recording, config);
    ASSERT_EQ(est.size(), 39u);
    for (const auto& e : est) {
        // Beats-per-window average equals the profile at the window centre for a linear ramp.
        const double truth = p.hr_profile.bpm_at(e.frame_start_s + 15.0);
        EXPECT_LT(std::abs(e.hr_bpm - truth), 2.0) << e.frame_index;
    }
    for (std::size_t k = 1; k < est.size(); ++k) {
        EXPECT_LE(std::abs(est[k].hr_bpm - est[k - 1].hr_bpm), config.continuity_bpm + 4.0);
    }
}

TEST(EstimateHr, RespirationOnlyIsFlagged) {
    const std::size_t n = static_cast<std::size_t>(300.0 * fs);
    std::vector<double> x(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = std::sin(2.0 * pi * 0.2 * i / fs);
    const auto est = estimate_hr(Recording(std::move(x), fs), PipelineConfig{});
    ASSERT_EQ(est.size(), 19u);
    // Frames clear of the filter's edge transients carry no usable peak.
    for (std::size_t k = 1; k + 1 < est.size(); ++k) {
        EXPECT_EQ(est[k].flag, FrameFlag::held) << k;
        EXPECT_EQ(est[k].hr_bpm, est[k - 1].hr_bpm) << k;
    }
}

TEST(EstimateHr, AllZeroRecordingIsDegenerateThenHeld) {
    const auto est = estimate_hr(zeros(60.0), PipelineConfig{});
    ASSERT_EQ(est.size(), 3u);
    EXPECT_EQ(est[0].flag, FrameFlag::degenerate);
    EXPECT_EQ(est[0].f_r, est[0].f_i);
    for (std::size_t k = 1; k < est.size(); ++k) {
        EXPECT_EQ(est[k].flag, FrameFlag::held);
        EXPECT_EQ(est[k].hr_bpm, est[0].hr_bpm);
    }
}

TEST(EstimateHr, DeterministicAndScaleInvariant) {
    const auto synth = generate_bcg(constant_rate(66.0, 120.0, 0.3, 9));
    const auto a = estimate_hr(synth.recording, PipelineConfig{});
    const auto b = estimate_hr(synth.recording, PipelineConfig{});
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t k = 0; k < a.size(); ++k) {
        EXPECT_EQ(a[k].hr_bpm, b[k].hr_bpm);
        EXPECT_EQ(a[k].bin_index, b[k].bin_index);
    }

    for (double scale : {0.01, 3.7, 250.0}) {
        std::vector<double> y(synth.recording.samples().begin(), synth.recording.samples().end());
        for (auto& v : y) v *= scale;
        const auto c = estimate_hr(Recording(std::move(y), fs), PipelineConfig{});
        ASSERT_EQ(c.size(), a.size());
        for (std::size_t k = 0; k < a.size(); ++k) {
            EXPECT_EQ(c[k].bin_index, a[k].bin_index) << scale;
            EXPECT_EQ(c[k].flag, a[k].flag);
            EXPECT_NEAR(c[k].hr_bpm, a[k].hr_bpm, 1e-6);
        }
    }
}

TEST(EstimateHr, SearchBandFollowsPreviousEstimate) {
    const auto synth = generate_bcg(constant_rate(80.0, 120.0, 0.2, 4));
    const PipelineConfig config;
    const auto est = estimate_hr(synth.recording, config);
    EXPECT_NEAR(est[0].search_band_bpm.low_hz, 36.0, 1e-9);
    EXPECT_NEAR(est[0].search_band_bpm.high_hz, 240.0, 1e-9);
    for (std::size_t k = 1; k < est.size(); ++k) {
        EXPECT_NEAR(est[k].search_band_bpm.low_hz, est[k - 1].hr_bpm - 10.0, 1e-9);
        EXPECT_NEAR(est[k].search_band_bpm.high_hz, est[k - 1].hr_bpm + 10.0, 1e-9);
        EXPECT_GE(60.0 * est[k].f_i, est[k].search_band_bpm.low_hz - 1e-9);
        EXPECT_LE(60.0 * est[k].f_i, est[k].search_band_bpm.high_hz + 1e-9);
    }
}

TEST(EstimateHr, ObserverSeesEveryFrame) {
    const auto synth = generate_bcg(constant_rate(70.0, 60.0, 0.1, 5));
    std::size_t calls = 0;
    const auto est = estimate_hr(synth.recording, PipelineConfig{}, [&](const FrameDiagnostics& d) {
        EXPECT_EQ(d.frame_index, calls);
        EXPECT_EQ(d.analytic.size(), 6750u);
        EXPECT_EQ(d.spectrum.fft_length, 65536u);
        ++calls;
    });
    EXPECT_EQ(calls, est.size());
}

TEST(EstimateTableIo, CsvAndJsonRoundTrip) {
    const auto synth = generate_bcg(constant_rate(75.0, 90.0, 0.2, 6));
    PipelineConfig config;
    config.hop_s = 10.0;
    const auto est = estimate_hr(synth.recording, config);

    for (bool as_json : {false, true}) {
        std::stringstream buf;
        if (as_json) write_estimates_json(buf, est, config);
        else write_estimates_csv(buf, est, config);
        const auto table = parse_estimates(buf);
        EXPECT_EQ(table.window_s, 30.0);
        EXPECT_EQ(table.hop_s, 10.0);
        ASSERT_EQ(table.estimates.size(), est.size());
        for (std::size_t k = 0; k < est.size(); ++k) {
            EXPECT_EQ(table.estimates[k].frame_index, k);
            EXPECT_EQ(table.estimates[k].frame_start_s, est[k].frame_start_s);
            EXPECT_EQ(table.estimates[k].f_i, est[k].f_i);
            EXPECT_EQ(table.estimates[k].f_r, est[k].f_r);
            EXPECT_EQ(table.estimates[k].hr_bpm, est[k].hr_bpm);
            EXPECT_EQ(table.estimates[k].flag, est[k].flag);
        }
    }
}

TEST(EstimateTableIo, CsvHeaderEchoesConfig) {
    std::stringstream buf;
    write_estimates_csv(buf, {}, PipelineConfig{});
    const auto text = buf.str();
    EXPECT_NE(text.find("# window_s=30\n"), std::string::npos) << text;
    EXPECT_NE(text.find("# hop_s=15\n"), std::string::npos) << text;
    EXPECT_NE(text.find("frame_index,frame_start_s,f_i_hz,f_r_hz,hr_bpm,flag\n"), std::string::npos);
}

TEST(EstimateTableIo, RejectsBrokenInput) {
    std::istringstream gap("frame_index,frame_start_s,f_i_hz,f_r_hz,hr_bpm,flag\n0,0,1,1,60,ok\n2,30,1,1,60,ok\n");
    EXPECT_EQ(kind_of([&] { parse_estimates(gap); }), ErrorKind::validation);
    std::istringstream flag("frame_index,frame_start_s,f_i_hz,f_r_hz,hr_bpm,flag\n0,0,1,1,60,weird\n");
    EXPECT_EQ(kind_of([&] { parse_estimates(flag); }), ErrorKind::parse);
    std::istringstream json("{\"frames\": [}");
    EXPECT_EQ(kind_of([&] { parse_estimates(json); }), ErrorKind::parse);
}

}  // namespace
}  // namespace htpv
