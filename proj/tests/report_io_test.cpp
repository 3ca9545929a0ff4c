#include "peakmart/report_io.hpp"

#include <sstream>

#include <gtest/gtest.h>

#include "peakmart/errors.hpp"
#include "peakmart/generators.hpp"
#include "peakmart/manifest.hpp"

namespace {

using namespace peakmart;

TEST(Csv, QuotingRoundTrip)
{
    for (const std::string id : { "plain", "#tag", "with,comma", "say \"hi\"", " padded " }) {
        const auto line = csv_field(id) + ",1,2";
        const auto fields = split_csv_line(line);
        ASSERT_EQ(fields.size(), 3U) << id;
        EXPECT_EQ(fields[0], id);
    }
}

TEST(TraceCsv, HeaderAndRoundTrip)
{
    const auto series = gen_exchangeable(PoissonDistribution { .mean = 20.0 }, 200, 3, "#a,b");
    const auto run = run_detector(series, DetectorConfig { .lambda_threshold = 3.0 });
    std::stringstream out;
    write_trace_header(out);
    write_trace_rows(out, series.id, run.traces);
    const std::string text = out.str();
    EXPECT_EQ(text.substr(0, text.find('\n')), "series_id,step,count,strangeness,p_value,martingale,alarmed");

    const auto records = read_trace_csv(out);
    ASSERT_EQ(records.size(), run.traces.size());
    for (std::size_t i = 0; i < records.size(); ++i) {
        EXPECT_EQ(records[i].series_id, series.id);
        EXPECT_EQ(records[i].trace, run.traces[i]);
    }
}

TEST(TraceCsv, BadInput)
{
    std::stringstream wrong_header("step,count\n");
    EXPECT_THROW(read_trace_csv(wrong_header), ParseError);
    std::stringstream short_row(std::string(trace_csv_header) + "\na,1,2\n");
    try {
        read_trace_csv(short_row);
        FAIL();
    } catch (const ParseError& e) {
        EXPECT_EQ(e.line(), 2U);
    }
}

TEST(AlarmLines, Format)
{
    std::stringstream out;
    const std::vector<Alarm> alarms { Alarm { .step = 41, .p_value = 0.25, .martingale_value = 21.5 } };
    write_alarm_lines(out, "#turnon", alarms);
    EXPECT_EQ(out.str(), "#turnon,41,0.25,21.5\n");
    const auto records = read_alarm_lines(out);
    ASSERT_EQ(records.size(), 1U);
    EXPECT_EQ(records[0].alarm, alarms[0]);
}

TEST(TruthSidecar, RoundTripWithHashtags)
{
    GroundTruth truth { { "#iadmit", { 40 } }, { "plain", { 3, 70 } } };
    const std::vector<std::string> order { "plain", "#iadmit", "missing" };
    std::stringstream out;
    write_truth_sidecar(out, truth, order);
    EXPECT_EQ(out.str(), "# series_id, true_peak_step\nplain\t3\nplain\t70\n#iadmit\t40\n");
    EXPECT_EQ(read_truth_sidecar(out), truth);

    std::stringstream bad("a\tb\n");
    EXPECT_THROW(read_truth_sidecar(bad), ParseError);
}

TEST(ReportJson, FixedKeySet)
{
    const std::vector<VolumeSeries> data { gen_spike(SpikeSpec { .noise_level = 0.2, .baseline = 20.0 }).series };
    const auto report = batch_evaluate(data, DetectorConfig {}, EvaluationParams {});
    const auto json = to_json(report);
    std::vector<std::string> keys;
    for (const auto& [key, _] : json.items()) {
        keys.push_back(key);
    }
    EXPECT_EQ(keys, (std::vector<std::string> { "precision", "recall", "mean_abs_delay", "matches", "false_alarms",
                        "missed_peaks", "per_series" }));
    EXPECT_EQ(json["per_series"].size(), 1U);
    EXPECT_EQ(json["per_series"][0]["series_id"], "spike");
}

TEST(ReportJson, NoMatchesGivesNullDelay)
{
    const auto report = aggregate({});
    const auto json = to_json(report);
    EXPECT_TRUE(json["mean_abs_delay"].is_null());
    EXPECT_EQ(json["precision"], 1.0);
}

TEST(Manifest, DigestAndJson)
{
    // SHA-256 of "abc" from FIPS 180-2.
    EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    RunManifest m;
    m.command = "detect";
    m.rng_seed = 7;
    const auto json = m.to_json();
    EXPECT_EQ(json["tool_version"], PEAKMART_VERSION);
    EXPECT_EQ(json["rng_seed"], 7);
    EXPECT_THROW(sha256_file("/nonexistent/file"), std::runtime_error);
}

} // namespace
