#include "slicesim/harness/report.hpp"

#include "slicesim/harness/runner.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

namespace slicesim::harness
{
namespace
{
using json = nlohmann::ordered_json;

std::string slurp(const std::filesystem::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

double mean(const std::vector<double>& v)
{
    if (v.empty())
    {
        return std::nan("");
    }
    double s = 0.0;
    for (const double x : v)
        s += x;
    return s / static_cast<double>(v.size());
}

bool within(double x, double lo, double hi)
{
    const double slack = 1e-9 * std::max(1.0, std::abs(x));
    return x >= lo - slack && x <= hi + slack;
}

struct AnomalyRow
{
    std::uint64_t time_us{0};
    std::string ue;
    std::string kind;
    double score{0.0};
};

std::vector<AnomalyRow> parse_anomalies_csv(const std::string& text)
{
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line != "time_us,ue,kind,score")
    {
        throw std::runtime_error("anomalies.csv: bad header");
    }
    std::vector<AnomalyRow> rows;
    while (std::getline(in, line))
    {
        if (line.empty())
            continue;
        std::istringstream ls(line);
        AnomalyRow r;
        std::string t, score;
        if (!std::getline(ls, t, ',') || !std::getline(ls, r.ue, ',') || !std::getline(ls, r.kind, ',') ||
            !std::getline(ls, score))
        {
            throw std::runtime_error(fmt::format("anomalies.csv: bad row '{}'", line));
        }
        r.time_us = std::stoull(t);
        r.score = std::stod(score);
        rows.push_back(std::move(r));
    }
    return rows;
}

class Builder
{
  public:
    Builder(const json& summary, std::vector<MetricRow> metrics, std::vector<AnomalyRow> anomalies, std::string events)
        : summary_(summary), metrics_(std::move(metrics)), anomalies_(std::move(anomalies)), events_(std::move(events))
    {
    }

    Report build();

  private:
    std::vector<double> values(const std::string& entity, const std::string& metric, std::uint64_t from_us = 0,
                               std::uint64_t to_us = UINT64_MAX) const
    {
        std::vector<double> v;
        for (const auto& r : metrics_)
        {
            if (r.entity == entity && r.metric == metric && r.time_us >= from_us && r.time_us <= to_us)
                v.push_back(r.value);
        }
        return v;
    }

    /// Sum over flows of the given kind/direction of their mean throughput.
    double throughput(const std::string& dir) const
    {
        double sum = 0.0;
        for (const auto& [id, f] : summary_.at("flows").items())
        {
            if (f.at("kind") != "ping" && f.at("direction") == dir)
                sum += mean(values(id, "throughput_mbps"));
        }
        return sum;
    }

    std::vector<double> rtts() const
    {
        std::vector<double> all;
        for (const auto& [id, f] : summary_.at("flows").items())
        {
            if (f.at("kind") == "ping")
            {
                auto v = values(id, "rtt_ms");
                all.insert(all.end(), v.begin(), v.end());
            }
        }
        return all;
    }

    /// Mean slice DL over a named window (samples strictly after start).
    double slice_window(const std::string& slice, const std::string& window) const
    {
        for (const auto& w : summary_.at("windows"))
        {
            if (w.at("name") == window)
            {
                const std::uint64_t from = w.at("start_ms").get<std::uint64_t>() * 1000 + 100000;
                const std::uint64_t to = w.at("stop_ms").get<std::uint64_t>() * 1000;
                return mean(values("slice:" + slice, "dl_mbps", from, to));
            }
        }
        return std::nan("");
    }

    void rel(const std::string& name, double measured, double expected, double tol, const char* unit)
    {
        const bool ok = std::isfinite(measured) && std::abs(measured - expected) <= tol * expected * (1 + 1e-9);
        add(name, fmt::format("{} {:.2f} {} vs expected {} {} +/-{:.0f}%", name, measured, unit, expected, unit,
                              tol * 100.0),
            ok);
    }
    void range(const std::string& name, double measured, double lo, double hi, const char* unit)
    {
        const bool ok = std::isfinite(measured) && within(measured, lo, hi);
        add(name, fmt::format("{} {:.2f} {} vs expected [{}, {}] {}", name, measured, unit, lo, hi, unit), ok);
    }
    void add(std::string name, std::string line, bool pass)
    {
        report_.checks.push_back({std::move(name), std::move(line), pass});
    }

    void fig5(double dl, double dl_tol, double ul, double ul_tol)
    {
        rel("dl throughput", throughput("dl"), dl, dl_tol, "Mbps");
        rel("ul throughput", throughput("ul"), ul, ul_tol, "Mbps");
    }
    void latency(double lo, double hi, std::size_t min_pings)
    {
        const auto v = rtts();
        range("ping rtt mean", mean(v), lo, hi, "ms");
        add("ping count", fmt::format("ping count {} vs expected >= {}", v.size(), min_pings), v.size() >= min_pings);
    }
    void slicing();
    void topology();
    void e2_quirks();
    void twin_detection();

    const json& summary_;
    std::vector<MetricRow> metrics_;
    std::vector<AnomalyRow> anomalies_;
    std::string events_;
    Report report_;
};

void Builder::slicing()
{
    std::vector<std::string> names;
    std::vector<double> configured;
    for (const auto& [name, s] : summary_.at("slices").items())
    {
        names.push_back(name);
        configured.push_back(s.at("radio_share").get<double>());
    }
    if (names.size() < 2)
    {
        add("slice ratio", "slice ratio: fewer than two slices in the run", false);
        return;
    }
    rel("single-slice udp baseline", slice_window(names[0], "single"), 244.9, 0.02, "Mbps");
    const double a = slice_window(names[0], "sliced");
    const double b = slice_window(names[1], "sliced");
    const double pa = 100.0 * a / (a + b);
    const double pb = 100.0 - pa;
    const double ca = 100.0 * configured[0] / (configured[0] + configured[1]);
    const bool ok = std::isfinite(pa) && std::abs(pa - ca) <= 3.0 + 1e-9;
    add("slice ratio",
        fmt::format("slice ratio {:.1f}:{:.1f} vs configured {:.0f}:{:.0f} (reported 81.95:18.05) +/-3pp", pa, pb, ca,
                    100.0 - ca),
        ok);
}

void Builder::topology()
{
    const auto& ues = summary_.at("ues");
    std::vector<std::string> active_slices;
    std::set<std::string> cu_cps;
    std::set<std::string> amfs;
    for (const auto& [name, u] : ues.items())
    {
        if (u.at("state") != "SessionActive")
            continue;
        active_slices.push_back(u.at("slice"));
        if (u.contains("signaling_path") && u.at("signaling_path").size() >= 5)
        {
            cu_cps.insert(u.at("signaling_path")[3].get<std::string>());
            amfs.insert(u.at("signaling_path")[4].get<std::string>());
        }
    }
    const std::set<std::string> distinct(active_slices.begin(), active_slices.end());
    add("active ues", fmt::format("SessionActive UEs {} on {} distinct slices vs expected 2 on 2", active_slices.size(),
                                  distinct.size()),
        active_slices.size() == 2 && distinct.size() == 2);
    const auto& c = summary_.at("census");
    const auto count = [&](const char* k) { return c.at(k).get<int>(); };
    add("user planes",
        fmt::format("CU-UP {} UPF {} SMF {} vs expected 2 2 2", count("CU_UP"), count("UPF"), count("SMF")),
        count("CU_UP") == 2 && count("UPF") == 2 && count("SMF") == 2);
    add("control plane", fmt::format("CU-CP {} AMF {} vs expected 1 1", count("CU_CP"), count("AMF")),
        count("CU_CP") == 1 && count("AMF") == 1);
    add("shared signaling path",
        fmt::format("distinct CU-CP/AMF on signaling paths {}/{} vs expected 1/1", cu_cps.size(), amfs.size()),
        cu_cps.size() == 1 && amfs.size() == 1);
}

void Builder::e2_quirks()
{
    for (const auto& [node, e] : summary_.at("e2").items())
    {
        const auto quirk = e.at("quirk").get<std::string>();
        const auto state = e.at("state").get<std::string>();
        const auto failures = e.at("failures");
        const auto has_failure = [&](const char* cause) {
            return std::find(failures.begin(), failures.end(), cause) != failures.end();
        };
        if (quirk == "Normal")
        {
            const auto ind = e.at("indications").get<std::uint64_t>();
            add(node, fmt::format("{} ({}) {} with {} indications vs expected Established, > 0", node, quirk, state, ind),
                state == "Established" && ind > 0);
        }
        else if (quirk == "EmptyIEs")
        {
            const bool f = has_failure("no-ran-function");
            add(node,
                fmt::format("{} ({}) {}{} vs expected Degraded, Failure(no-ran-function)", node, quirk, state,
                            f ? ", Failure(no-ran-function)" : ""),
                state == "Degraded" && f);
        }
        else
        {
            const auto attempts = e.at("attempts").get<int>();
            const bool timeout = events_.find(fmt::format(" {} e2 SetupTimeout", node)) != std::string::npos;
            add(node,
                fmt::format("{} ({}) {} after {} attempts{} vs expected Idle after 1+3 attempts, SetupTimeout", node,
                            quirk, state, attempts, timeout ? ", SetupTimeout" : ""),
                state == "Idle" && attempts == 4 && timeout);
        }
    }
}

void Builder::twin_detection()
{
    struct Fault
    {
        std::string ue;
        std::uint64_t start;
        std::uint64_t end;
    };
    std::vector<Fault> faults;
    for (const auto& f : summary_.at("faults"))
    {
        const auto kind = f.at("kind").get<std::string>();
        if (kind == "ue_drop" || kind == "throughput_degradation")
        {
            faults.push_back(
                {f.at("target"), f.at("start_us").get<std::uint64_t>(), f.at("end_us").get<std::uint64_t>()});
        }
    }
    // Detection needs `consecutive` samples; allow a short grace after the fault ends.
    constexpr std::uint64_t kGraceUs = 500000;
    const auto matches = [&](const AnomalyRow& a, const Fault& f) {
        return a.ue == f.ue && a.time_us >= f.start && a.time_us <= f.end + kGraceUs;
    };
    std::size_t tp = 0;
    for (const auto& a : anomalies_)
    {
        tp += std::any_of(faults.begin(), faults.end(), [&](const Fault& f) { return matches(a, f); }) ? 1 : 0;
    }
    std::size_t detected = 0;
    for (const auto& f : faults)
    {
        detected +=
            std::any_of(anomalies_.begin(), anomalies_.end(), [&](const AnomalyRow& a) { return matches(a, f); }) ? 1
                                                                                                                  : 0;
    }
    const double precision = anomalies_.empty() ? 0.0 : static_cast<double>(tp) / anomalies_.size();
    const double recall = faults.empty() ? 0.0 : static_cast<double>(detected) / faults.size();
    add("injected faults", fmt::format("injected faults {} vs expected 20", faults.size()), faults.size() == 20);
    add("precision", fmt::format("precision {:.3f} ({}/{}) vs expected >= 0.9", precision, tp, anomalies_.size()),
        precision >= 0.9);
    add("recall", fmt::format("recall {:.3f} ({}/{}) vs expected >= 0.9", recall, detected, faults.size()),
        recall >= 0.9);
}

Report Builder::build()
{
    report_.scenario = summary_.at("scenario").get<std::string>();
    const auto& s = report_.scenario;
    if (s == "fig5_dl_centric")
        fig5(240.0, 0.02, 25.0, 0.05);
    else if (s == "fig5_ul_centric")
        fig5(172.0, 0.05, 49.0, 0.05);
    else if (s == "fig5_100mhz")
    {
        const double dl = throughput("dl");
        add("dl throughput", fmt::format("dl throughput {:.2f} Mbps vs expected > 500 Mbps", dl), dl > 500.0);
    }
    else if (s == "fig6_latency")
        latency(9.0, 11.0, 1000);
    else if (s == "fig8_slicing")
        slicing();
    else if (s == "table1_oai_split")
    {
        rel("ping rtt mean", mean(rtts()), 43.35, 0.05, "ms");
        range("dl throughput", throughput("dl"), 5.0, 10.0, "Mbps");
        range("ul throughput", throughput("ul"), 4.0, 6.0, "Mbps");
    }
    else if (s == "table1_oai_mono")
    {
        range("ping rtt mean", mean(rtts()), 16.0, 17.0, "ms");
        rel("dl throughput", throughput("dl"), 120.0, 0.05, "Mbps");
        rel("ul throughput", throughput("ul"), 2.0, 0.05, "Mbps");
    }
    else if (s == "fig7_two_slices")
        topology();
    else if (s == "e2_interop_quirks")
        e2_quirks();
    else if (s == "twin_anomaly_injection")
        twin_detection();
    else
    {
        report_.notes.push_back(fmt::format("no reference values for scenario '{}'", s));
        for (const auto& [id, f] : summary_.at("flows").items())
        {
            if (f.at("kind") == "ping")
                report_.notes.push_back(fmt::format("{}: rtt mean {:.3f} ms", id, mean(values(id, "rtt_ms"))));
            else
                report_.notes.push_back(
                    fmt::format("{}: {} mean {:.2f} Mbps", id, f.at("direction").get<std::string>(),
                                mean(values(id, "throughput_mbps"))));
        }
    }
    return std::move(report_);
}
} // namespace

bool Report::all_pass() const
{
    return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.pass; });
}

std::string Report::render() const
{
    std::string out = fmt::format("scenario {}\n", scenario);
    for (const auto& n : notes)
        out += "  " + n + "\n";
    for (const auto& c : checks)
        out += fmt::format("  {} {}\n", c.line, c.pass ? "PASS" : "FAIL");
    return out;
}

std::vector<MetricRow> parse_metrics_csv(const std::string& text)
{
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line != "time_us,entity,metric,value")
    {
        throw std::runtime_error("metrics.csv: bad header");
    }
    std::vector<MetricRow> rows;
    std::size_t n = 1;
    while (std::getline(in, line))
    {
        ++n;
        if (line.empty())
            continue;
        std::istringstream ls(line);
        MetricRow r;
        std::string t, v;
        if (!std::getline(ls, t, ',') || !std::getline(ls, r.entity, ',') || !std::getline(ls, r.metric, ',') ||
            !std::getline(ls, v))
        {
            throw std::runtime_error(fmt::format("metrics.csv line {}: expected 4 fields", n));
        }
        const auto* end = t.data() + t.size();
        if (std::from_chars(t.data(), end, r.time_us).ptr != end)
        {
            throw std::runtime_error(fmt::format("metrics.csv line {}: bad time", n));
        }
        try
        {
            std::size_t used = 0;
            r.value = std::stod(v, &used);
            if (used != v.size())
                throw std::invalid_argument(v);
        }
        catch (const std::exception&)
        {
            throw std::runtime_error(fmt::format("metrics.csv line {}: bad value", n));
        }
        rows.push_back(std::move(r));
    }
    return rows;
}

Report build_report(const std::filesystem::path& dir)
{
    std::vector<std::string> missing;
    for (const char* f : {kMetricsFile, kAnomaliesFile, kEventsFile, kSummaryFile})
    {
        if (!std::filesystem::is_regular_file(dir / f))
            missing.emplace_back(f);
    }
    if (!missing.empty())
    {
        std::string list;
        for (const auto& m : missing)
            list += (list.empty() ? "" : ", ") + m;
        throw MissingArtifacts(fmt::format("{}: missing {}", dir.string(), list));
    }
    const auto summary = json::parse(slurp(dir / kSummaryFile));
    Builder b(summary, parse_metrics_csv(slurp(dir / kMetricsFile)), parse_anomalies_csv(slurp(dir / kAnomaliesFile)),
              slurp(dir / kEventsFile));
    return b.build();
}
} // namespace slicesim::harness
