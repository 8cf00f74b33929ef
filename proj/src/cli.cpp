#include "htpv/cli.hpp"

#include "htpv/corpus_io.hpp"
#include "htpv/error.hpp"
#include "htpv/metrics.hpp"
#include "htpv/synth.hpp"
#include "htpv/tracker.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>

namespace htpv::cli {

namespace fs = std::filesystem;

namespace {

struct Failure {
    int code;
    std::string id;
    std::string message;
};

Failure input_failure(const Error& e) {
    switch (e.kind()) {
        case ErrorKind::not_found: return {exit_input, "input-not-found", e.what()};
        case ErrorKind::parse: return {exit_input, "parse-error", e.what()};
        case ErrorKind::config: return {exit_input, "config-error", e.what()};
        case ErrorKind::range: return {exit_input, "range-error", e.what()};
        case ErrorKind::io: return {exit_input, "input-error", e.what()};
        case ErrorKind::validation:
        case ErrorKind::undefined: break;
    }
    return {exit_input, "validation-error", e.what()};
}

void report(std::ostream& err, const Failure& f) {
    err << nlohmann::json{{"error", f.id}, {"message", f.message}, {"exit_code", f.code}}.dump() << '\n';
}

// Output files: any failure to open or write maps to exit 4.
class OutputFile {
public:
    explicit OutputFile(const fs::path& path) : path_(path), file_(path, std::ios::out | std::ios::trunc) {
        if (!file_) throw Failure{exit_output, "output-error", "cannot write " + path.string()};
    }
    std::ostream& stream() { return file_; }
    void close() {
        file_.flush();
        if (!file_) throw Failure{exit_output, "output-error", "write failed for " + path_.string()};
    }

private:
    fs::path path_;
    std::ofstream file_;
};

void ensure_directory(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) {
        throw Failure{exit_output, "output-error", "cannot create output directory " + dir.string()};
    }
}

// Probe that files can actually be created in `dir` (permission bits alone
// are not reliable, e.g. when running as root on a read-only mount).
void ensure_writable_directory(const fs::path& dir) {
    ensure_directory(dir);
    const auto probe = dir / ".htpv-write-probe";
    {
        std::ofstream f(probe);
        if (!f) throw Failure{exit_output, "output-error", "output directory is not writable: " + dir.string()};
    }
    std::error_code ec;
    fs::remove(probe, ec);
}

FrequencyBand parse_band(const std::string& text, const char* flag) {
    const auto colon = text.find(':');
    if (colon == std::string::npos) {
        throw Error(ErrorKind::config, std::string(flag) + " expects <lo:hi>, got '" + text + "'");
    }
    return {detail::parse_double(std::string_view(text).substr(0, colon), flag),
            detail::parse_double(std::string_view(text).substr(colon + 1), flag)};
}

/// Pipeline flags shared by `estimate` and `dump`.
struct PipelineFlags {
    std::string config_path;
    std::optional<double> window_s, hop_s, continuity_bpm;
    std::optional<std::string> band, search, window_fn;
    std::optional<int> pad_factor, filter_order;

    void attach(CLI::App& app) {
        app.add_option("--config", config_path, "Key/value pipeline config file");
        app.add_option("--window-s", window_s, "Analysis window length in seconds (default 30)");
        app.add_option("--hop-s", hop_s, "Window step in seconds (default 15)");
        app.add_option("--band", band, "Band-pass edges <lo:hi> in Hz (default 0.7:10)");
        app.add_option("--filter-order", filter_order, "Butterworth prototype order (default 4)");
        app.add_option("--search", search, "Heart-rate search range <lo:hi> in Hz (default 0.6:4)");
        app.add_option("--continuity-bpm", continuity_bpm, "Max HR change between frames (default 10)");
        app.add_option("--pad-factor", pad_factor, "Zero-padding factor (default 8)");
        app.add_option("--window-fn", window_fn, "Spectral window: hann or rectangular (default hann)");
    }

    PipelineConfig resolve() const {
        PipelineConfig c;
        if (!config_path.empty()) c = load_config(config_path);
        if (window_s) c.window_s = *window_s;
        if (hop_s) c.hop_s = *hop_s;
        if (continuity_bpm) c.continuity_bpm = *continuity_bpm;
        if (pad_factor) c.pad_factor = *pad_factor;
        if (filter_order) c.filter_order = *filter_order;
        if (window_fn) c.window_fn = parse_window_function(*window_fn);
        if (band) {
            const auto b = parse_band(*band, "--band");
            c.band_low_hz = b.low_hz;
            c.band_high_hz = b.high_hz;
        }
        if (search) {
            const auto s = parse_band(*search, "--search");
            c.search_low_hz = s.low_hz;
            c.search_high_hz = s.high_hz;
        }
        c.validate();
        return c;
    }
};

std::optional<RecordingFormat> parse_input_format(const std::string& text) {
    if (text.empty()) return std::nullopt;
    if (text == "csv") return RecordingFormat::csv;
    if (text == "wav") return RecordingFormat::wav;
    throw Error(ErrorKind::config, "--input-format must be csv or wav");
}

/// Collects per-frame envelope and spectrum rows for the dump files.
class DumpWriter {
public:
    DumpWriter(std::ostream* envelope, std::ostream* spectrum, double max_hz)
        : envelope_(envelope), spectrum_(spectrum), max_hz_(max_hz) {
        if (envelope_) *envelope_ << "frame_index,time_s,envelope_power\n";
        if (spectrum_) *spectrum_ << "frame_index,frequency_hz,magnitude\n";
    }

    void operator()(const FrameDiagnostics& d) const {
        if (envelope_) {
            const auto& p = d.analytic.envelope_power;
            for (std::size_t i = 0; i < p.size(); ++i) {
                *envelope_ << d.frame_index << ',' << detail::format_double(d.frame_start_s + i / d.sample_rate_hz)
                           << ',' << detail::format_double(p[i]) << '\n';
            }
        }
        if (spectrum_) {
            const auto& s = d.spectrum;
            for (std::size_t k = 0; k < s.bins.size() && s.frequency_of(k) <= max_hz_; ++k) {
                *spectrum_ << d.frame_index << ',' << detail::format_double(s.frequency_of(k)) << ','
                           << detail::format_double(std::abs(s.bins[k])) << '\n';
            }
        }
    }

private:
    std::ostream* envelope_;
    std::ostream* spectrum_;
    double max_hz_;
};

Recording load_input_recording(const std::string& path, const std::string& format_text) {
    const auto format = parse_input_format(format_text).value_or(format_from_path(path));
    return load_recording(path, format);
}

struct PipelineInputs {
    PipelineConfig config;
    Recording recording;
};

PipelineInputs load_pipeline_inputs(const PipelineFlags& flags, const std::string& path, const std::string& format) {
    try {
        auto config = flags.resolve();
        auto recording = load_input_recording(path, format);
        config.validate_for(recording.sample_rate_hz());
        return {config, std::move(recording)};
    } catch (const Error& e) {
        throw input_failure(e);
    }
}

// --- subcommands -------------------------------------------------------------

struct EstimateArgs {
    std::string recording;
    std::string input_format;
    std::string out = "-";
    std::string format = "csv";
    std::string dump_envelope;
    std::string dump_spectrum;
    PipelineFlags pipeline;
};

void cmd_estimate(const EstimateArgs& a, std::ostream& stdout_stream) {
    const auto [config, recording] = load_pipeline_inputs(a.pipeline, a.recording, a.input_format);

    std::optional<OutputFile> env_file, spec_file;
    if (!a.dump_envelope.empty()) env_file.emplace(a.dump_envelope);
    if (!a.dump_spectrum.empty()) spec_file.emplace(a.dump_spectrum);
    const DumpWriter dump(env_file ? &env_file->stream() : nullptr, spec_file ? &spec_file->stream() : nullptr,
                          config.band_high_hz);

    std::vector<HrEstimate> estimates;
    try {
        estimates = estimate_hr(recording, config,
                                (env_file || spec_file) ? FrameObserver(std::cref(dump)) : FrameObserver{});
    } catch (const Error& e) {
        throw input_failure(e);
    }

    auto write = [&](std::ostream& os) {
        if (a.format == "json") write_estimates_json(os, estimates, config);
        else write_estimates_csv(os, estimates, config);
    };
    if (a.out == "-") {
        write(stdout_stream);
    } else {
        OutputFile file(a.out);
        write(file.stream());
        file.close();
    }
    if (env_file) env_file->close();
    if (spec_file) spec_file->close();
}

struct EvaluateArgs {
    std::string estimates;
    std::string annotation;
    std::string out_dir;
};

void cmd_evaluate(const EvaluateArgs& a, std::ostream& stdout_stream) {
    EstimateTable table;
    std::optional<ReferenceAnnotation> annotation;
    try {
        table = load_estimates(a.estimates);
        annotation.emplace(load_annotation(a.annotation));
    } catch (const Error& e) {
        throw input_failure(e);
    }
    if (table.estimates.empty()) throw Failure{exit_pairing, "frame-mismatch", "estimate file has no frames"};

    std::vector<std::pair<double, double>> spans;
    std::vector<double> est, times;
    for (const auto& e : table.estimates) {
        spans.emplace_back(e.frame_start_s, e.frame_start_s + table.window_s);
        est.push_back(e.hr_bpm);
        times.push_back(e.frame_start_s);
    }
    std::vector<double> ref;
    try {
        ref = reference_hr(*annotation, spans);
    } catch (const Error& e) {
        throw Failure{exit_pairing, "frame-mismatch", e.what()};
    }
    // The annotation must reach the end of the last frame, give or take one beat interval.
    const double last_end = spans.back().second;
    const double last_rr = 60.0 / ref.back();
    if (annotation->rpeak_times_s().back() + last_rr < last_end) {
        throw Failure{exit_pairing, "frame-mismatch",
                      "annotation ends at " + detail::format_double(annotation->rpeak_times_s().back()) +
                          " s but estimates cover up to " + detail::format_double(last_end) + " s"};
    }

    MetricsReport report;
    BlandAltman ba;
    std::optional<PairedSeries> paired;
    try {
        paired.emplace(std::move(ref), std::move(est), std::move(times));
        report = evaluate(*paired);
        ba = bland_altman(*paired);
    } catch (const Error& e) {
        throw input_failure(e);
    }

    ensure_directory(a.out_dir);
    const fs::path dir(a.out_dir);
    {
        OutputFile f(dir / "metrics.json");
        write_report_json(f.stream(), report);
        f.close();
    }
    {
        OutputFile f(dir / "bland_altman.csv");
        write_bland_altman_csv(f.stream(), ba);
        f.close();
    }
    {
        OutputFile f(dir / "hr_scatter.csv");
        write_hr_scatter_csv(f.stream(), *paired);
        f.close();
    }
    write_report_json(stdout_stream, report);
}

struct SynthArgs {
    std::string spec;
    std::string out_dir;
};

void cmd_synth(const SynthArgs& a, std::ostream& stdout_stream) {
    std::vector<CorpusEntry> entries;
    try {
        entries = load_corpus_spec(a.spec);
    } catch (const Error& e) {
        throw input_failure(e);
    }
    ensure_writable_directory(a.out_dir);
    std::vector<CorpusFiles> files;
    try {
        files = make_corpus(entries, a.out_dir);
    } catch (const Error& e) {
        if (e.kind() == ErrorKind::io) throw Failure{exit_output, "output-error", e.what()};
        throw input_failure(e);
    }
    for (const auto& f : files) stdout_stream << f.recording.string() << '\n' << f.annotation.string() << '\n';
}

struct DumpArgs {
    std::string recording;
    std::string input_format;
    std::string out_dir;
    PipelineFlags pipeline;
};

void cmd_dump(const DumpArgs& a, std::ostream& stdout_stream) {
    const auto [config, recording] = load_pipeline_inputs(a.pipeline, a.recording, a.input_format);
    ensure_directory(a.out_dir);
    const fs::path dir(a.out_dir);
    OutputFile env(dir / "envelope.csv");
    OutputFile spec(dir / "spectrum.csv");
    OutputFile est(dir / "estimates.csv");
    const DumpWriter dump(&env.stream(), &spec.stream(), config.band_high_hz);
    std::vector<HrEstimate> estimates;
    try {
        estimates = estimate_hr(recording, config, std::cref(dump));
    } catch (const Error& e) {
        throw input_failure(e);
    }
    write_estimates_csv(est.stream(), estimates, config);
    env.close();
    spec.close();
    est.close();
    stdout_stream << (dir / "envelope.csv").string() << '\n'
                  << (dir / "spectrum.csv").string() << '\n'
                  << (dir / "estimates.csv").string() << '\n';
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Heart rate from ballistocardiogram recordings (Hilbert envelope + phase vocoder)", "htpv"};
    app.require_subcommand(1);

    EstimateArgs est;
    auto* estimate = app.add_subcommand("estimate", "Estimate per-frame heart rate from a recording");
    estimate->add_option("recording", est.recording, "Recording (.csv or .wav)")->required();
    estimate->add_option("--input-format", est.input_format, "csv or wav (default: from extension)");
    estimate->add_option("--out,-o", est.out, "Output file ('-' for stdout)");
    estimate->add_option("--format", est.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
    estimate->add_option("--dump-envelope", est.dump_envelope, "Write per-frame envelope power CSV");
    estimate->add_option("--dump-spectrum", est.dump_spectrum, "Write per-frame spectrum magnitude CSV");
    est.pipeline.attach(*estimate);

    EvaluateArgs eva;
    auto* evaluate_cmd = app.add_subcommand("evaluate", "Score estimates against reference beat annotations");
    evaluate_cmd->add_option("estimates", eva.estimates, "Estimates file written by 'estimate'")->required();
    evaluate_cmd->add_option("annotation", eva.annotation, "Reference beat timestamps, one per line")->required();
    evaluate_cmd->add_option("--out,-o", eva.out_dir, "Output directory")->required();

    SynthArgs syn;
    auto* synth = app.add_subcommand("synth", "Generate a synthetic corpus from a corpus description");
    synth->add_option("spec", syn.spec, "Corpus description file")->required();
    synth->add_option("--out,-o", syn.out_dir, "Output directory")->required();

    DumpArgs dmp;
    auto* dump = app.add_subcommand("dump", "Write envelope, spectrum and estimate CSVs for plotting");
    dump->add_option("recording", dmp.recording, "Recording (.csv or .wav)")->required();
    dump->add_option("--input-format", dmp.input_format, "csv or wav (default: from extension)");
    dump->add_option("--out,-o", dmp.out_dir, "Output directory")->required();
    dmp.pipeline.attach(*dump);

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return exit_ok;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return exit_ok;
    } catch (const CLI::ParseError& e) {
        report(err, {exit_input, "usage-error", e.what()});
        return exit_input;
    }

    try {
        if (estimate->parsed()) cmd_estimate(est, out);
        else if (evaluate_cmd->parsed()) cmd_evaluate(eva, out);
        else if (synth->parsed()) cmd_synth(syn, out);
        else if (dump->parsed()) cmd_dump(dmp, out);
    } catch (const Failure& f) {
        report(err, f);
        return f.code;
    } catch (const Error& e) {
        const auto f = input_failure(e);
        report(err, f);
        return f.code;
    }
    return exit_ok;
}

}  // namespace htpv::cli
