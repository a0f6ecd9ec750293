#include "slicesim/harness/report.hpp"
#include "slicesim/harness/runner.hpp"
#include "slicesim/harness/scenario.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

using namespace slicesim;
using namespace slicesim::harness;
namespace fs = std::filesystem;

namespace
{
const fs::path kScenarios{SLICESIM_SCENARIO_DIR};

const std::vector<std::string> kShipped{"fig5_dl_centric",  "fig5_ul_centric",  "fig5_100mhz",
                                        "fig6_latency",     "fig7_two_slices",  "fig8_slicing",
                                        "table1_oai_split", "table1_oai_mono",  "e2_interop_quirks",
                                        "twin_anomaly_injection"};

Scenario shipped(const std::string& name) { return load_scenario_file((kScenarios / (name + ".json")).string()); }

bool mentions(const std::vector<std::string>& v, const std::string& needle)
{
    for (const auto& s : v)
        if (s.find(needle) != std::string::npos)
            return true;
    return false;
}

std::string slurp(const fs::path& p)
{
    std::ifstream in(p);
    return {std::istreambuf_iterator<char>(in), {}};
}

fs::path scratch(const std::string& name)
{
    auto p = fs::temp_directory_path() / ("slicesim_test_" + name);
    fs::remove_all(p);
    return p;
}
} // namespace

TEST(Scenario, ShippedScenariosAreValid)
{
    for (const auto& name : kShipped)
    {
        std::vector<std::string> v;
        const auto s = parse_scenario(slurp(kScenarios / (name + ".json")), v);
        EXPECT_TRUE(v.empty()) << name << ": " << (v.empty() ? "" : v.front());
        const auto more = validate(s);
        EXPECT_TRUE(more.empty()) << name << ": " << (more.empty() ? "" : more.front());
        EXPECT_EQ(s.meta.name, name);
    }
}

TEST(Scenario, SerializationRoundTrips)
{
    for (const auto& name : kShipped)
    {
        const auto s = shipped(name);
        const auto text = to_json(s);
        const auto back = load_scenario_text(text);
        EXPECT_EQ(back, s) << name;
        EXPECT_EQ(to_json(back), text) << name;
    }
}

TEST(Scenario, EventBeyondDurationIsListed)
{
    auto s = shipped("fig8_slicing");
    s.events.push_back(EventSpec{s.meta.duration_ms + 1, "detach", "ue1"});
    EXPECT_TRUE(mentions(validate(s), "beyond duration"));
}

TEST(Scenario, UnknownIdsAreListed)
{
    auto s = shipped("fig8_slicing");
    s.traffic[0].dst = "ue-nobody";
    s.nodes[2].ru = "ru-missing";
    const auto v = validate(s);
    EXPECT_TRUE(mentions(v, "ue-nobody"));
    EXPECT_TRUE(mentions(v, "ru-missing"));
}

TEST(Scenario, AllViolationsReportedTogether)
{
    auto s = shipped("fig6_latency");
    s.meta.seed = 0; // allowed
    s.slices[0].radio_share = 1.5;
    s.events[1].slice = "nope";
    s.traffic[0].start_ms = s.traffic[0].stop_ms;
    EXPECT_GE(validate(s).size(), 3u);
}

TEST(Scenario, E2ProvisioningNeedsTheRic)
{
    auto s = shipped("fig7_two_slices");
    s.ric.enabled = false;
    EXPECT_FALSE(validate(s).empty());
}

TEST(Scenario, SchemaProblemsAreViolations)
{
    std::vector<std::string> v;
    parse_scenario(R"({"meta": {"name": "x", "seed": "one", "duration_ms": 10}, "bogus": 1})", v);
    EXPECT_TRUE(mentions(v, "seed"));
    EXPECT_TRUE(mentions(v, "bogus"));
}

TEST(Scenario, ParseErrorCarriesPosition)
{
    try
    {
        load_scenario_text("{\n  \"meta\": ,\n}");
        FAIL();
    }
    catch (const ParseError& e)
    {
        EXPECT_EQ(e.line(), 2u);
        EXPECT_GT(e.column(), 0u);
    }
}

TEST(Runner, ArtifactsAreCompleteWithZeroAnomalies)
{
    const auto a = simulate(shipped("fig5_dl_centric"));
    EXPECT_EQ(a.anomalies_csv, "time_us,ue,kind,score\n");
    EXPECT_EQ(a.metrics_csv.rfind("time_us,entity,metric,value\n", 0), 0u);
    EXPECT_FALSE(a.events_log.empty());
    EXPECT_TRUE(a.trace.empty());
    const auto dir = scratch("complete");
    write_artifacts(a, dir);
    for (const char* f : {kMetricsFile, kAnomaliesFile, kEventsFile, kSummaryFile})
        EXPECT_TRUE(fs::exists(dir / f)) << f;
    EXPECT_FALSE(fs::exists(dir / kTraceFile));
}

TEST(Runner, MetricsRowsAreTimeOrdered)
{
    const auto rows = parse_metrics_csv(simulate(shipped("fig8_slicing")).metrics_csv);
    ASSERT_FALSE(rows.empty());
    for (std::size_t i = 1; i < rows.size(); ++i)
        ASSERT_LE(rows[i - 1].time_us, rows[i].time_us);
}

TEST(Runner, SeedControlsJitterOnly)
{
    const auto s = shipped("fig6_latency");
    const auto a = simulate(s);
    const auto b = simulate(s);
    EXPECT_EQ(a.metrics_csv, b.metrics_csv);
    EXPECT_EQ(a.summary_json, b.summary_json);
    const auto c = simulate(s, RunOptions{s.meta.seed + 1, false});
    EXPECT_NE(a.metrics_csv, c.metrics_csv);
}

TEST(Runner, TraceListsDispatchedEvents)
{
    const auto a = simulate(shipped("fig5_dl_centric"), RunOptions{std::nullopt, true});
    EXPECT_EQ(a.trace.rfind("0 harness bring_up\n", 0), 0u);
    EXPECT_NE(a.trace.find(" du1 slot\n"), std::string::npos);
}

TEST(Runner, FailedScriptedActionsAreLoggedNotFatal)
{
    auto s = shipped("fig5_dl_centric");
    s.events[1].at_ms = 50; // attach before the slice exists
    const auto a = simulate(s);
    EXPECT_NE(a.events_log.find("attach failed"), std::string::npos);
}

TEST(Report, FreshSlicingRunPasses)
{
    const auto dir = scratch("fig8");
    write_artifacts(simulate(shipped("fig8_slicing")), dir);
    const auto r = build_report(dir);
    EXPECT_TRUE(r.all_pass()) << r.render();
    const auto text = r.render();
    EXPECT_NE(text.find("slice ratio 80."), std::string::npos) << text;
    EXPECT_NE(text.find("vs configured 80:20 (reported 81.95:18.05)"), std::string::npos) << text;
}

TEST(Report, TamperedCsvFails)
{
    const auto dir = scratch("tampered");
    write_artifacts(simulate(shipped("fig5_dl_centric")), dir);
    auto rows = slurp(dir / kMetricsFile);
    // Halve every DL sample.
    std::string out;
    std::istringstream in(rows);
    std::string line;
    while (std::getline(in, line))
    {
        if (line.find(",dl,throughput_mbps,") != std::string::npos)
        {
            const auto pos = line.rfind(',');
            line = line.substr(0, pos + 1) + "120";
        }
        out += line + "\n";
    }
    std::ofstream(dir / kMetricsFile) << out;
    const auto r = build_report(dir);
    EXPECT_FALSE(r.all_pass());
    EXPECT_NE(r.render().find("FAIL"), std::string::npos);
}

TEST(Report, EmptyDirectoryIsMissingArtifacts)
{
    const auto dir = scratch("empty");
    fs::create_directories(dir);
    EXPECT_THROW(build_report(dir), MissingArtifacts);
}

// Twin and plant share one model: with jitter off and no faults the twin
// must never diverge, whatever the scenario does.
TEST(Invariant, ClosedLoopTwinNeverDiverges)
{
    for (const auto& name : kShipped)
    {
        auto s = shipped(name);
        s.links.radio_jitter_us = 0;
        std::erase_if(s.events, [](const EventSpec& e) { return e.action == "inject_fault"; });
        s.ric.enabled = true;
        s.ric.twin = true;
        s.ric.subscribe.clear();
        for (auto& n : s.nodes)
        {
            if (n.kind == "DU")
            {
                n.e2 = true;
                s.ric.subscribe.push_back(n.id);
            }
        }
        ASSERT_TRUE(validate(s).empty()) << name;
        const auto a = simulate(s);
        EXPECT_EQ(a.anomalies_csv.find("TwinDivergence"), std::string::npos) << name << "\n" << a.anomalies_csv;
    }
}
