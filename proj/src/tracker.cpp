#include "htpv/tracker.hpp"

#include "htpv/error.hpp"
#include "htpv/preprocess.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <optional>
#include <sstream>

namespace htpv {

std::string_view to_string(FrameFlag flag) noexcept {
    switch (flag) {
        case FrameFlag::ok: return "ok";
        case FrameFlag::held: return "held";
        case FrameFlag::degenerate: return "degenerate";
        case FrameFlag::fallback: return "fallback";
    }
    return "ok";
}

FrameFlag parse_frame_flag(std::string_view text) {
    text = detail::trim(text);
    for (auto f : {FrameFlag::ok, FrameFlag::held, FrameFlag::degenerate, FrameFlag::fallback}) {
        if (text == to_string(f)) return f;
    }
    throw Error(ErrorKind::parse, "unknown frame flag '" + std::string(text) + "'");
}

std::vector<SampleRange> frames(const Recording& recording, double window_s, double hop_s) {
    if (!(window_s > 0.0) || !(hop_s > 0.0) || hop_s > window_s) {
        throw Error(ErrorKind::config, "window and hop must be positive with hop <= window");
    }
    const double fs = recording.sample_rate_hz();
    const auto window = static_cast<std::size_t>(std::llround(window_s * fs));
    const auto hop = static_cast<std::size_t>(std::llround(hop_s * fs));
    if (window == 0 || hop == 0) throw Error(ErrorKind::config, "window or hop shorter than one sample");
    const std::size_t n = recording.size();
    if (n < window) {
        throw Error(ErrorKind::validation, "recording of " + detail::format_double(recording.duration_s()) +
                                               " s is shorter than one " + detail::format_double(window_s) +
                                               " s window");
    }
    const std::size_t count = (n - window) / hop + 1;
    std::vector<SampleRange> out;
    out.reserve(count);
    for (std::size_t k = 0; k < count; ++k) out.push_back({k * hop, k * hop + window});
    return out;
}

FrequencyBand next_search_band(double prev_hr_bpm, double continuity_bpm, FrequencyBand global_band_hz) {
    return {std::max(global_band_hz.low_hz, (prev_hr_bpm - continuity_bpm) / 60.0),
            std::min(global_band_hz.high_hz, (prev_hr_bpm + continuity_bpm) / 60.0)};
}

std::vector<HrEstimate> estimate_hr(const Recording& recording, const PipelineConfig& config,
                                    const FrameObserver& observer) {
    config.validate_for(recording.sample_rate_hz());
    const double fs = recording.sample_rate_hz();
    const auto ranges = frames(recording, config.window_s, config.hop_s);

    const auto filter = design_bandpass(config.band_low_hz, config.band_high_hz, fs, config.filter_order);
    const auto filtered = filtfilt(recording.samples(), filter);
    const auto raw = recording.samples();
    const FrequencyBand global = config.search_band();
    // Phase differences span the hop actually realized in samples.
    const double hop_s = static_cast<double>(std::llround(config.hop_s * fs)) / fs;

    std::vector<HrEstimate> out;
    out.reserve(ranges.size());
    std::optional<Spectrum> previous;

    for (std::size_t k = 0; k < ranges.size(); ++k) {
        const auto range = ranges[k];
        const double start_s = static_cast<double>(range.begin) / fs;
        const auto segment = std::span<const double>(filtered).subspan(range.begin, range.size());

        const auto analytic = analytic_signal(segment);
        const auto env = envelope_for_spectrum(analytic);
        auto spectrum = frame_spectrum(env, fs, config.pad_factor, config.window_fn, start_s);
        if (observer) observer({k, start_s, fs, analytic, spectrum});

        HrEstimate est;
        est.frame_index = k;
        est.frame_start_s = start_s;

        FrequencyBand band = global;
        if (!out.empty()) {
            band = next_search_band(out.back().hr_bpm, config.continuity_bpm, global);
        }
        std::optional<PeakPick> pick;
        if (band.low_hz < band.high_hz) {
            try {
                pick = peak_pick(spectrum, band);
            } catch (const Error& e) {
                if (e.kind() != ErrorKind::range) throw;
            }
        }
        if (!pick) {
            band = global;
            pick = peak_pick(spectrum, band);
            est.flag = FrameFlag::fallback;
        }
        est.search_band_bpm = {band.low_hz * 60.0, band.high_hz * 60.0};
        est.bin_index = pick->bin_index;
        est.f_i = pick->f_i;

        const auto frame_raw = raw.subspan(range.begin, range.size());
        const double energy = std::inner_product(frame_raw.begin(), frame_raw.end(), frame_raw.begin(), 0.0);
        if (pick->amplitude <= degenerate_peak_ratio * energy) {
            if (out.empty()) {
                est.f_r = est.f_i;
                est.flag = FrameFlag::degenerate;
            } else {
                est.f_r = out.back().f_r;
                est.flag = FrameFlag::held;
            }
        } else if (!previous) {
            est.f_r = est.f_i;
        } else {
            const auto prev_pick = pick_at(*previous, pick->bin_index);
            est.f_r = vocoder_refine(prev_pick, *pick, hop_s).f_r;
        }
        est.hr_bpm = 60.0 * est.f_r;
        out.push_back(est);
        previous = std::move(spectrum);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Serialization

namespace {

using nlohmann::json;

json config_json(const PipelineConfig& c) {
    return json{{"window_s", c.window_s},
                {"hop_s", c.hop_s},
                {"band_low_hz", c.band_low_hz},
                {"band_high_hz", c.band_high_hz},
                {"filter_order", c.filter_order},
                {"search_low_hz", c.search_low_hz},
                {"search_high_hz", c.search_high_hz},
                {"continuity_bpm", c.continuity_bpm},
                {"pad_factor", c.pad_factor},
                {"window_fn", std::string(to_string(c.window_fn))}};
}

std::vector<std::string_view> split_commas(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t pos = 0;
    while (true) {
        const auto comma = line.find(',', pos);
        fields.push_back(detail::trim(line.substr(pos, comma == std::string_view::npos ? comma : comma - pos)));
        if (comma == std::string_view::npos) break;
        pos = comma + 1;
    }
    return fields;
}

void check_frame_order(const EstimateTable& table) {
    for (std::size_t i = 0; i < table.estimates.size(); ++i) {
        if (table.estimates[i].frame_index != i) {
            throw Error(ErrorKind::validation, "estimate frames are not numbered 0..N-1 (row " + std::to_string(i) + ")");
        }
    }
    if (!(table.window_s > 0.0) || !(table.hop_s > 0.0)) {
        throw Error(ErrorKind::validation, "estimate file has invalid window_s/hop_s");
    }
}

EstimateTable parse_estimates_json(std::istream& in) {
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw Error(ErrorKind::parse, std::string("estimate JSON: ") + e.what());
    }
    EstimateTable table;
    try {
        const auto& cfg = doc.at("config");
        table.window_s = cfg.at("window_s").get<double>();
        table.hop_s = cfg.at("hop_s").get<double>();
        for (const auto& f : doc.at("frames")) {
            HrEstimate e;
            e.frame_index = f.at("frame_index").get<std::size_t>();
            e.frame_start_s = f.at("frame_start_s").get<double>();
            e.f_i = f.at("f_i_hz").get<double>();
            e.f_r = f.at("f_r_hz").get<double>();
            e.hr_bpm = f.at("hr_bpm").get<double>();
            e.flag = parse_frame_flag(f.at("flag").get<std::string>());
            table.estimates.push_back(e);
        }
    } catch (const json::exception& e) {
        throw Error(ErrorKind::parse, std::string("estimate JSON: ") + e.what());
    }
    return table;
}

EstimateTable parse_estimates_csv(std::istream& in) {
    EstimateTable table;
    bool have_header = false;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto text = detail::trim(line);
        if (text.empty()) continue;
        const std::string where = "line " + std::to_string(line_no);
        if (text.front() == '#') {
            const auto body = detail::trim(text.substr(1));
            const auto eq = body.find('=');
            if (eq == std::string_view::npos) continue;
            const auto key = detail::trim(body.substr(0, eq));
            if (key == "window_s") table.window_s = detail::parse_double(body.substr(eq + 1), where);
            if (key == "hop_s") table.hop_s = detail::parse_double(body.substr(eq + 1), where);
            continue;
        }
        const auto fields = split_commas(text);
        if (!have_header) {
            if (fields.size() != 6 || fields[0] != "frame_index") {
                throw Error(ErrorKind::parse, where + ": expected estimate column header");
            }
            have_header = true;
            continue;
        }
        if (fields.size() != 6) throw Error(ErrorKind::parse, where + ": expected 6 columns");
        HrEstimate e;
        e.frame_index = static_cast<std::size_t>(detail::parse_integer(fields[0], where));
        e.frame_start_s = detail::parse_double(fields[1], where);
        e.f_i = detail::parse_double(fields[2], where);
        e.f_r = detail::parse_double(fields[3], where);
        e.hr_bpm = detail::parse_double(fields[4], where);
        e.flag = parse_frame_flag(fields[5]);
        table.estimates.push_back(e);
    }
    if (!have_header) throw Error(ErrorKind::parse, "estimate CSV has no column header");
    return table;
}

}  // namespace

void write_estimates_csv(std::ostream& out, std::span<const HrEstimate> estimates, const PipelineConfig& config) {
    const json echoed = config_json(config);
    for (const auto& [key, value] : echoed.items()) {
        out << "# " << key << '=';
        if (value.is_string()) out << value.get<std::string>();
        else if (value.is_number_integer()) out << value.get<long long>();
        else out << detail::format_double(value.get<double>());
        out << '\n';
    }
    out << "frame_index,frame_start_s,f_i_hz,f_r_hz,hr_bpm,flag\n";
    for (const auto& e : estimates) {
        out << e.frame_index << ',' << detail::format_double(e.frame_start_s) << ',' << detail::format_double(e.f_i)
            << ',' << detail::format_double(e.f_r) << ',' << detail::format_double(e.hr_bpm) << ','
            << to_string(e.flag) << '\n';
    }
}

void write_estimates_json(std::ostream& out, std::span<const HrEstimate> estimates, const PipelineConfig& config) {
    json frames_json = json::array();
    for (const auto& e : estimates) {
        frames_json.push_back({{"frame_index", e.frame_index},
                               {"frame_start_s", e.frame_start_s},
                               {"f_i_hz", e.f_i},
                               {"f_r_hz", e.f_r},
                               {"hr_bpm", e.hr_bpm},
                               {"flag", std::string(to_string(e.flag))}});
    }
    out << json{{"config", config_json(config)}, {"frames", frames_json}}.dump(2) << '\n';
}

EstimateTable parse_estimates(std::istream& in) {
    in >> std::ws;
    EstimateTable table = in.peek() == '{' ? parse_estimates_json(in) : parse_estimates_csv(in);
    check_frame_order(table);
    return table;
}

EstimateTable load_estimates(const std::filesystem::path& path) {
    std::error_code ec;
    if (!std::filesystem::is_regular_file(path, ec)) throw Error(ErrorKind::not_found, "input not found: " + path.string());
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::io, "cannot open " + path.string());
    return parse_estimates(in);
}

}  // namespace htpv
