// peakmart: online peak detection for volume time series.
//
//   peakmart detect   INPUT [config flags] [--trace CSV] [--alarms FILE]
//   peakmart generate SHAPE --output TSV [--truth TSV] [shape flags]
//   peakmart evaluate INPUT (--truth TSV | --label) [config flags] [--json FILE]
//   peakmart plot     INPUT --trace CSV --alarms FILE --output-dir DIR
//
// Exit codes: 0 success, 1 usage error, 2 input/parse error, 3 internal
// invariant failure.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "peakmart/errors.hpp"
#include "peakmart/evaluation.hpp"
#include "peakmart/generators.hpp"
#include "peakmart/ingest.hpp"
#include "peakmart/manifest.hpp"
#include "peakmart/martingale.hpp"
#include "peakmart/parallel.hpp"
#include "peakmart/random.hpp"
#include "peakmart/report_io.hpp"
#include "peakmart/svg_plot.hpp"

namespace fs = std::filesystem;
using namespace peakmart;

namespace {

enum ExitCode : int { ok = 0, usage = 1, input = 2, internal = 3 };

class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct ConfigFlags {
    double epsilon = 0.92;
    double lambda = 20.0;
    std::size_t min_history = 5;
    std::optional<std::size_t> window;
    std::string reset_policy = "clear_history";
    std::uint64_t seed = 0;

    void attach(CLI::App& app)
    {
        app.add_option("--epsilon", epsilon, "power-martingale exponent in (0,1)")->capture_default_str();
        app.add_option("--lambda", lambda, "alarm threshold (> 1)")->capture_default_str();
        app.add_option("--min-history", min_history, "reference-set size before testing starts")
            ->capture_default_str();
        app.add_option("--window", window, "sliding reference-set size (default: growing)");
        app.add_option("--reset-policy", reset_policy, "clear_history | martingale_only | none")
            ->capture_default_str();
        app.add_option("--seed", seed, "global random seed")->capture_default_str();
    }

    DetectorConfig resolve() const
    {
        DetectorConfig config;
        config.epsilon = epsilon;
        config.lambda_threshold = lambda;
        config.min_history = min_history;
        config.window = window;
        config.reset_policy = parse_reset_policy(reset_policy);
        config.rng_seed = seed;
        config.validate();
        return config;
    }
};

nlohmann::ordered_json config_json(const DetectorConfig& config)
{
    nlohmann::ordered_json out;
    out["epsilon"] = config.epsilon;
    out["lambda"] = config.lambda_threshold;
    out["min_history"] = config.min_history;
    out["window"] = config.window ? nlohmann::ordered_json(*config.window) : nlohmann::ordered_json(nullptr);
    out["reset_policy"] = to_string(config.reset_policy);
    out["rng_seed"] = config.rng_seed;
    out["series_seed"] = "splitmix64(rng_seed ^ fnv1a64(series_id))";
    return out;
}

std::ifstream open_input(const fs::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw InputError("cannot open " + path.string());
    }
    return in;
}

std::ofstream open_output(const fs::path& path)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw InputError("cannot write " + path.string());
    }
    return out;
}

std::vector<VolumeSeries> load_series(const fs::path& path, const std::string& snap_layout)
{
    auto in = open_input(path);
    try {
        if (snap_layout.empty()) {
            return parse_canonical_tsv(in);
        }
        SnapLayout layout;
        if (fs::is_regular_file(snap_layout)) {
            auto layout_in = open_input(snap_layout);
            std::stringstream text;
            text << layout_in.rdbuf();
            layout = parse_snap_layout(text.str());
        } else {
            layout = snap_layout_preset(snap_layout);
        }
        return parse_snap_volume(in, layout);
    } catch (const ParseError& e) {
        throw InputError(fmt::format("{}:{}: {}", path.string(), e.line(), e.reason()));
    }
}

// ---------------------------------------------------------------------------

struct DetectCommand {
    std::string input_path;
    std::string snap_layout;
    std::string trace_path;
    std::string alarms_path;
    std::string manifest_path;
    ConfigFlags flags;

    void attach(CLI::App& app)
    {
        app.add_option("input", input_path, "canonical TSV (or SNAP file with --snap-layout)")->required();
        app.add_option("--snap-layout", snap_layout, "layout preset name or descriptor file");
        app.add_option("--trace", trace_path, "write per-step trace CSV here");
        app.add_option("--alarms", alarms_path, "also write alarm lines to this file");
        app.add_option("--manifest", manifest_path, "write the run manifest for standard output here");
        flags.attach(app);
    }

    int run()
    {
        DetectorConfig config;
        try {
            config = flags.resolve();
        } catch (const PreconditionError& e) {
            throw UsageError(e.what());
        }
        const auto dataset = load_series(input_path, snap_layout);

        std::vector<DetectionRun> runs(dataset.size());
        parallel_for(dataset.size(), [&](std::size_t i) {
            DetectorConfig series_config = config;
            series_config.rng_seed = derive_series_seed(config.rng_seed, dataset[i].id);
            runs[i] = run_detector(dataset[i], series_config);
        });

        std::ostringstream alarm_text;
        for (std::size_t i = 0; i < dataset.size(); ++i) {
            write_alarm_lines(alarm_text, dataset[i].id, runs[i].alarms);
        }
        std::cout << alarm_text.str();

        RunManifest manifest;
        manifest.command = "detect";
        manifest.rng_seed = config.rng_seed;
        manifest.parameters["detector"] = config_json(config);
        manifest.parameters["snap_layout"] = snap_layout;
        manifest.add_input(input_path);

        if (!alarms_path.empty()) {
            auto out = open_output(alarms_path);
            out << alarm_text.str();
            write_manifest_beside(alarms_path, manifest);
        }
        if (!trace_path.empty()) {
            auto out = open_output(trace_path);
            write_trace_header(out);
            for (std::size_t i = 0; i < dataset.size(); ++i) {
                write_trace_rows(out, dataset[i].id, runs[i].traces);
            }
            write_manifest_beside(trace_path, manifest);
        }
        if (!manifest_path.empty()) {
            auto out = open_output(manifest_path);
            out << manifest.to_json().dump(2) << '\n';
        }
        return ok;
    }
};

// ---------------------------------------------------------------------------

struct GenerateCommand {
    std::string shape;
    std::size_t count = 1;
    std::uint64_t seed = 0;
    std::string output_path;
    std::string truth_path;
    std::string id_prefix;

    std::size_t horizon = 200;
    // spike
    std::size_t peak_time = 100;
    double peak_height = 1000.0;
    double rise_rate = 0.5;
    double alpha = 1.5;
    double noise = 0.2;
    double baseline = 20.0;
    // si
    std::int64_t population = 1'000'000;
    double beta = 0.3;
    std::int64_t initial_infected = 10;
    // exchangeable
    std::string distribution = "poisson";
    double mean = 50.0;
    std::int64_t lo = 0;
    std::int64_t hi = 100;

    void attach(CLI::App& app)
    {
        app.add_option("shape", shape, "spike | si | powerlaw | exchangeable")
            ->required()
            ->check(CLI::IsMember({ "spike", "si", "powerlaw", "exchangeable" }));
        app.add_option("--count", count, "number of series")->capture_default_str();
        app.add_option("--seed", seed, "global random seed")->capture_default_str();
        app.add_option("--output,-o", output_path, "canonical TSV output path")->required();
        app.add_option("--truth", truth_path, "ground-truth sidecar path (default: OUTPUT.truth.tsv)");
        app.add_option("--id-prefix", id_prefix, "series id prefix (default: the shape name)");
        app.add_option("--horizon", horizon, "series length")->capture_default_str();
        app.add_option("--peak-time", peak_time, "spike: peak step t*")->capture_default_str();
        app.add_option("--peak-height", peak_height, "spike/powerlaw: peak height")->capture_default_str();
        app.add_option("--rise-rate", rise_rate, "spike: exponential rise constant")->capture_default_str();
        app.add_option("--alpha", alpha, "spike/powerlaw: power-law fall exponent")->capture_default_str();
        app.add_option("--noise", noise, "spike: log-normal noise scale")->capture_default_str();
        app.add_option("--baseline", baseline, "spike: flat background level")->capture_default_str();
        app.add_option("--population", population, "si: population N")->capture_default_str();
        app.add_option("--beta", beta, "si: infection strength per step")->capture_default_str();
        app.add_option("--initial-infected", initial_infected, "si: I0")->capture_default_str();
        app.add_option("--distribution", distribution, "exchangeable: poisson | uniform")
            ->check(CLI::IsMember({ "poisson", "uniform" }))
            ->capture_default_str();
        app.add_option("--mean", mean, "exchangeable poisson mean")->capture_default_str();
        app.add_option("--lo", lo, "exchangeable uniform lower bound")->capture_default_str();
        app.add_option("--hi", hi, "exchangeable uniform upper bound")->capture_default_str();
    }

    nlohmann::ordered_json parameters() const
    {
        nlohmann::ordered_json p;
        p["shape"] = shape;
        p["count"] = count;
        p["horizon"] = horizon;
        p["id_prefix"] = id_prefix.empty() ? shape : id_prefix;
        if (shape == "spike") {
            p["peak_time"] = peak_time;
            p["peak_height"] = peak_height;
            p["rise_rate"] = rise_rate;
            p["alpha"] = alpha;
            p["noise"] = noise;
            p["baseline"] = baseline;
        } else if (shape == "si") {
            p["population"] = population;
            p["beta"] = beta;
            p["initial_infected"] = initial_infected;
        } else if (shape == "powerlaw") {
            p["peak_height"] = peak_height;
            p["alpha"] = alpha;
        } else {
            p["distribution"] = distribution;
            if (distribution == "poisson") {
                p["mean"] = mean;
            } else {
                p["lo"] = lo;
                p["hi"] = hi;
            }
        }
        p["series_seed"] = "splitmix64(seed ^ fnv1a64(series_id))";
        return p;
    }

    int run()
    {
        if (count == 0) {
            throw UsageError("--count must be at least 1");
        }
        const std::string prefix = id_prefix.empty() ? shape : id_prefix;
        std::vector<VolumeSeries> series;
        GroundTruth truth;
        std::vector<std::string> order;
        try {
            for (std::size_t k = 0; k < count; ++k) {
                const std::string id = fmt::format("{}-{:03}", prefix, k);
                const std::uint64_t series_seed = derive_series_seed(seed, id);
                order.push_back(id);
                if (shape == "spike") {
                    auto labeled = gen_spike(SpikeSpec { .peak_time = peak_time,
                        .peak_height = peak_height,
                        .rise_rate = rise_rate,
                        .alpha = alpha,
                        .noise_level = noise,
                        .baseline = baseline,
                        .horizon = horizon,
                        .seed = series_seed,
                        .id = id });
                    truth[id].push_back(labeled.true_peak);
                    series.push_back(std::move(labeled.series));
                } else if (shape == "si") {
                    auto labeled = gen_si(SiSpec { .population = population,
                        .beta = beta,
                        .initial_infected = initial_infected,
                        .horizon = horizon,
                        .id = id });
                    truth[id].push_back(labeled.true_peak);
                    series.push_back(std::move(labeled.series));
                } else if (shape == "powerlaw") {
                    series.push_back(gen_powerlaw_decay(peak_height, alpha, horizon, id));
                    truth[id].push_back(0);
                } else {
                    const CountDistribution dist = distribution == "poisson"
                        ? CountDistribution { PoissonDistribution { .mean = mean } }
                        : CountDistribution { UniformIntDistribution { .lo = lo, .hi = hi } };
                    series.push_back(gen_exchangeable(dist, horizon, series_seed, id));
                }
            }
        } catch (const PreconditionError& e) {
            throw UsageError(e.what());
        }

        RunManifest manifest;
        manifest.command = "generate";
        manifest.rng_seed = seed;
        manifest.parameters = parameters();

        {
            auto out = open_output(output_path);
            write_canonical_tsv(series, out);
        }
        write_manifest_beside(output_path, manifest);
        const std::string sidecar = truth_path.empty() ? output_path + ".truth.tsv" : truth_path;
        {
            auto out = open_output(sidecar);
            write_truth_sidecar(out, truth, order);
        }
        write_manifest_beside(sidecar, manifest);
        return ok;
    }
};

// ---------------------------------------------------------------------------

struct LabelFlags {
    double min_prominence_fraction = 0.3;
    std::size_t min_separation = 10;

    void attach(CLI::App& app)
    {
        app.add_option("--min-prominence-fraction", min_prominence_fraction,
               "peak prominence threshold as a fraction of the series maximum")
            ->capture_default_str();
        app.add_option("--min-separation", min_separation, "minimum steps between labeled peaks")
            ->capture_default_str();
    }

    LabelingParams resolve() const
    {
        return LabelingParams { .min_prominence_fraction = min_prominence_fraction, .min_separation = min_separation };
    }
};

struct EvaluateCommand {
    std::string input_path;
    std::string snap_layout;
    std::string truth_path;
    bool label = false;
    std::size_t tolerance = 5;
    std::string json_path;
    ConfigFlags flags;
    LabelFlags label_flags;

    void attach(CLI::App& app)
    {
        app.add_option("input", input_path, "canonical TSV (or SNAP file with --snap-layout)")->required();
        app.add_option("--snap-layout", snap_layout, "layout preset name or descriptor file");
        auto* truth = app.add_option("--truth", truth_path, "ground-truth sidecar TSV");
        auto* label_flag = app.add_flag("--label", label, "label peaks by prominence instead of a sidecar");
        truth->excludes(label_flag);
        app.add_option("--tolerance", tolerance, "max |alarm - peak| for a match")->capture_default_str();
        app.add_option("--json", json_path, "write the JSON report here ('-' for standard output)");
        flags.attach(app);
        label_flags.attach(app);
    }

    int run()
    {
        if (truth_path.empty() && !label) {
            throw UsageError("evaluate needs ground truth: pass --truth SIDECAR or --label");
        }
        DetectorConfig config;
        EvaluationParams params;
        try {
            config = flags.resolve();
            params.labeling = label_flags.resolve();
            params.tolerance = tolerance;
        } catch (const PreconditionError& e) {
            throw UsageError(e.what());
        }
        const auto dataset = load_series(input_path, snap_layout);
        if (dataset.empty()) {
            throw UsageError("nothing to evaluate: " + input_path + " contains no series");
        }
        std::optional<GroundTruth> truth;
        if (!truth_path.empty()) {
            auto in = open_input(truth_path);
            try {
                truth = read_truth_sidecar(in);
            } catch (const ParseError& e) {
                throw InputError(fmt::format("{}:{}: {}", truth_path, e.line(), e.reason()));
            }
        }

        AggregateReport report;
        try {
            report = batch_evaluate(dataset, config, params, truth ? &*truth : nullptr);
        } catch (const PreconditionError& e) {
            throw InputError(e.what());
        }
        const auto json = to_json(report);

        if (json_path == "-") {
            std::cout << json.dump(2) << '\n';
        } else {
            write_report_table(std::cout, report);
        }
        if (!json_path.empty() && json_path != "-") {
            RunManifest manifest;
            manifest.command = "evaluate";
            manifest.rng_seed = config.rng_seed;
            manifest.parameters["detector"] = config_json(config);
            manifest.parameters["ground_truth"] = truth ? "sidecar" : "label_peaks";
            manifest.parameters["min_prominence_fraction"] = params.labeling.min_prominence_fraction;
            manifest.parameters["min_separation"] = params.labeling.min_separation;
            manifest.parameters["tolerance"] = params.tolerance;
            manifest.parameters["snap_layout"] = snap_layout;
            manifest.add_input(input_path);
            if (truth) {
                manifest.add_input(truth_path);
            }
            auto out = open_output(json_path);
            out << json.dump(2) << '\n';
            write_manifest_beside(json_path, manifest);
        }
        return ok;
    }
};

// ---------------------------------------------------------------------------

std::string file_stem_for(std::size_t index, const std::string& id)
{
    std::string safe;
    for (const char c : id) {
        const bool keep = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '-'
            || c == '_' || c == '.';
        safe += keep ? c : '_';
    }
    return fmt::format("{:03}_{}", index, safe);
}

struct PlotCommand {
    std::string input_path;
    std::string snap_layout;
    std::string trace_path;
    std::string alarms_path;
    std::string output_dir;
    double lambda = 20.0;
    LabelFlags label_flags;

    void attach(CLI::App& app)
    {
        app.add_option("input", input_path, "series file used for detection")->required();
        app.add_option("--snap-layout", snap_layout, "layout preset name or descriptor file");
        app.add_option("--trace", trace_path, "trace CSV from detect --trace")->required();
        app.add_option("--alarms", alarms_path, "alarm lines from detect")->required();
        app.add_option("--output-dir,-o", output_dir, "directory for one SVG per series")->required();
        app.add_option("--lambda", lambda, "threshold line to draw")->capture_default_str();
        label_flags.attach(app);
    }

    int run()
    {
        if (!(lambda > 1.0)) {
            throw UsageError("--lambda must be > 1");
        }
        LabelingParams labeling;
        try {
            labeling = label_flags.resolve();
            label_peaks(VolumeSeries { .id = "x", .counts = { 0 }, .step_label = {} }, labeling);
        } catch (const PreconditionError& e) {
            throw UsageError(e.what());
        }
        const auto dataset = load_series(input_path, snap_layout);
        std::vector<TraceRecord> traces;
        std::vector<AlarmRecord> alarms;
        try {
            auto trace_in = open_input(trace_path);
            traces = read_trace_csv(trace_in);
        } catch (const ParseError& e) {
            throw InputError(fmt::format("{}:{}: {}", trace_path, e.line(), e.reason()));
        }
        try {
            auto alarm_in = open_input(alarms_path);
            alarms = read_alarm_lines(alarm_in);
        } catch (const ParseError& e) {
            throw InputError(fmt::format("{}:{}: {}", alarms_path, e.line(), e.reason()));
        }

        std::map<std::string, std::size_t> index;
        for (std::size_t i = 0; i < dataset.size(); ++i) {
            index.emplace(dataset[i].id, i);
        }
        std::vector<std::vector<StepTrace>> series_traces(dataset.size());
        std::vector<std::vector<Alarm>> series_alarms(dataset.size());
        for (const auto& t : traces) {
            const auto it = index.find(t.series_id);
            if (it == index.end()) {
                throw InputError(fmt::format("trace series id '{}' not found in {}", t.series_id, input_path));
            }
            series_traces[it->second].push_back(t.trace);
        }
        for (const auto& a : alarms) {
            const auto it = index.find(a.series_id);
            if (it == index.end()) {
                throw InputError(fmt::format("alarm series id '{}' not found in {}", a.series_id, input_path));
            }
            series_alarms[it->second].push_back(a.alarm);
        }

        RunManifest manifest;
        manifest.command = "plot";
        manifest.parameters["lambda"] = lambda;
        manifest.parameters["min_prominence_fraction"] = labeling.min_prominence_fraction;
        manifest.parameters["min_separation"] = labeling.min_separation;
        manifest.parameters["snap_layout"] = snap_layout;
        manifest.add_input(input_path);
        manifest.add_input(trace_path);
        manifest.add_input(alarms_path);

        fs::create_directories(output_dir);
        for (std::size_t i = 0; i < dataset.size(); ++i) {
            const auto peaks = label_peaks(dataset[i], labeling);
            const PlotInput plot { .series = &dataset[i],
                .traces = series_traces[i],
                .alarms = series_alarms[i],
                .peaks = peaks,
                .lambda_threshold = lambda };
            const fs::path path = fs::path(output_dir) / (file_stem_for(i, dataset[i].id) + ".svg");
            auto out = open_output(path);
            out << render_svg(plot);
            out.close();
            write_manifest_beside(path, manifest);
        }
        return ok;
    }
};

} // namespace

int main(int argc, char** argv)
{
    CLI::App app { "peakmart: conformal-martingale peak detection for volume time series" };
    app.set_version_flag("--version", std::string(PEAKMART_VERSION));
    app.require_subcommand(1);

    DetectCommand detect;
    GenerateCommand generate;
    EvaluateCommand evaluate;
    PlotCommand plot;
    detect.attach(*app.add_subcommand("detect", "report alarms for every series in a file"));
    generate.attach(*app.add_subcommand("generate", "write synthetic series with known peaks"));
    evaluate.attach(*app.add_subcommand("evaluate", "score alarms against known or labeled peaks"));
    plot.attach(*app.add_subcommand("plot", "render series, martingale and alarms as SVG"));

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return usage;
    }

    try {
        if (app.got_subcommand("detect")) {
            return detect.run();
        }
        if (app.got_subcommand("generate")) {
            return generate.run();
        }
        if (app.got_subcommand("evaluate")) {
            return evaluate.run();
        }
        return plot.run();
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return usage;
    } catch (const InputError& e) {
        std::cerr << "input error: " << e.what() << '\n';
        return input;
    } catch (const ParseError& e) {
        std::cerr << "input error: " << e.what() << '\n';
        return input;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << '\n';
        return internal;
    }
}
