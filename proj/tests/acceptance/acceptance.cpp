// Acceptance suite: one PASS/FAIL line per criterion. Measured values are
// recomputed here from the run artifacts, not taken from the report module.
#include "slicesim/e2/codec.hpp"
#include "slicesim/harness/runner.hpp"
#include "slicesim/harness/scenario.hpp"

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <deque>
#include <filesystem>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

namespace sh = slicesim::harness;
namespace e2 = slicesim::e2;
using json = nlohmann::json;

namespace
{
const std::filesystem::path kScenarios{SLICESIM_SCENARIO_DIR};

const std::vector<std::string> kShipped{"fig5_dl_centric",  "fig5_ul_centric",  "fig5_100mhz",
                                        "fig6_latency",     "fig7_two_slices",  "fig8_slicing",
                                        "table1_oai_split", "table1_oai_mono",  "e2_interop_quirks",
                                        "twin_anomaly_injection"};

struct Row
{
    std::uint64_t t;
    std::string entity;
    std::string metric;
    double value;
};

std::vector<Row> rows_of(const std::string& csv)
{
    std::vector<Row> out;
    std::istringstream in(csv);
    std::string line;
    std::getline(in, line);
    while (std::getline(in, line))
    {
        const auto a = line.find(',');
        const auto b = line.find(',', a + 1);
        const auto c = line.find(',', b + 1);
        out.push_back({std::stoull(line.substr(0, a)), line.substr(a + 1, b - a - 1), line.substr(b + 1, c - b - 1),
                       std::stod(line.substr(c + 1))});
    }
    return out;
}

struct Run
{
    sh::Scenario scenario;
    sh::RunArtifacts artifacts;
    std::vector<Row> rows;
    json summary;
    double wall_s{0.0};

    std::vector<double> series(const std::string& entity, const std::string& metric, std::uint64_t from = 0,
                               std::uint64_t to = UINT64_MAX) const
    {
        std::vector<double> v;
        for (const auto& r : rows)
            if (r.entity == entity && r.metric == metric && r.t >= from && r.t <= to)
                v.push_back(r.value);
        return v;
    }
};

Run run(const std::string& name)
{
    Run r;
    r.scenario = sh::load_scenario_file((kScenarios / (name + ".json")).string());
    const auto t0 = std::chrono::steady_clock::now();
    r.artifacts = sh::simulate(r.scenario);
    r.wall_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    r.rows = rows_of(r.artifacts.metrics_csv);
    r.summary = json::parse(r.artifacts.summary_json);
    return r;
}

double mean(const std::vector<double>& v)
{
    return v.empty() ? std::nan("") : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

/// Sum of per-flow mean throughput for bulk flows in one direction.
double throughput(const Run& r, const std::string& dir)
{
    double sum = 0.0;
    for (const auto& f : r.scenario.traffic)
    {
        if (f.kind == "ping")
            continue;
        const bool dl = f.dst.rfind("ue", 0) == 0 && f.src == "server";
        if ((dir == "dl") == dl)
            sum += mean(r.series(f.id, "throughput_mbps"));
    }
    return sum;
}

std::vector<double> rtts(const Run& r)
{
    std::vector<double> all;
    for (const auto& f : r.scenario.traffic)
    {
        if (f.kind == "ping")
        {
            auto v = r.series(f.id, "rtt_ms");
            all.insert(all.end(), v.begin(), v.end());
        }
    }
    return all;
}

bool near(double x, double expected, double tol) { return std::abs(x - expected) <= tol * expected + 1e-9; }

int failures = 0;

void line(int n, bool pass, const std::string& text)
{
    fmt::print("criterion {:>2}: {} {}\n", n, pass ? "PASS" : "FAIL", text);
    std::fflush(stdout);
    failures += pass ? 0 : 1;
}

void c1()
{
    const auto r = run("fig5_dl_centric");
    const double dl = throughput(r, "dl"), ul = throughput(r, "ul");
    line(1, near(dl, 240.0, 0.02) && near(ul, 25.0, 0.05) && r.wall_s < 10.0,
         fmt::format("DL {:.2f} Mbps vs 240 +/-2%, UL {:.2f} Mbps vs 25 +/-5%, runtime {:.2f} s vs < 10 s", dl, ul,
                     r.wall_s));
}

void c2()
{
    const auto r = run("fig5_ul_centric");
    const double dl = throughput(r, "dl"), ul = throughput(r, "ul");
    line(2, near(dl, 172.0, 0.05) && near(ul, 49.0, 0.05),
         fmt::format("DL {:.2f} Mbps vs 172 +/-5%, UL {:.2f} Mbps vs 49 +/-5%", dl, ul));
}

void c3()
{
    const auto r = run("fig5_100mhz");
    const double dl = throughput(r, "dl");
    line(3, dl > 500.0, fmt::format("DL {:.2f} Mbps vs > 500", dl));
}

void c4()
{
    const auto r = run("fig6_latency");
    const auto v = rtts(r);
    const double m = mean(v);
    line(4, m >= 9.0 && m <= 11.0 && v.size() >= 1000,
         fmt::format("RTT mean {:.3f} ms vs [9, 11] over {} pings vs >= 1000", m, v.size()));
}

void c5()
{
    const auto r = run("fig8_slicing");
    std::map<std::string, std::pair<std::uint64_t, std::uint64_t>> win;
    for (const auto& w : r.scenario.windows)
        win[w.name] = {w.start_ms * 1000 + 100000, w.stop_ms * 1000};
    const auto& s1 = r.scenario.slices.at(0);
    const auto& s2 = r.scenario.slices.at(1);
    const auto slice_mean = [&](const sh::SliceSpecJson& s, const std::string& w) {
        return mean(r.series("slice:" + s.name, "dl_mbps", win[w].first, win[w].second));
    };
    const double base = slice_mean(s1, "single");
    const double a = slice_mean(s1, "sliced"), b = slice_mean(s2, "sliced");
    const double pa = 100.0 * a / (a + b);
    // Shares in effect after the scripted set_shares event.
    double cfg = s1.radio_share;
    for (const auto& e : r.scenario.events)
        if (e.action == "set_shares" && e.shares.contains(s1.name))
            cfg = e.shares.at(s1.name);
    const double ca = 100.0 * cfg;
    line(5, std::abs(pa - ca) <= 3.0 && near(base, 244.9, 0.02),
         fmt::format("slice ratio {:.2f}:{:.2f} vs {:.0f}:{:.0f} +/-3pp ({:.2f} / {:.2f} Mbps), single-slice UDP "
                     "{:.2f} Mbps vs 244.9 +/-2%",
                     pa, 100.0 - pa, ca, 100.0 - ca, a, b, base));
}

void c6()
{
    const auto r = run("fig7_two_slices");
    std::set<std::string> slices, cu_cp, amf;
    int active = 0;
    for (const auto& [name, u] : r.summary.at("ues").items())
    {
        if (u.at("state") != "SessionActive")
            continue;
        ++active;
        slices.insert(u.at("slice").get<std::string>());
        for (const auto& hop : u.at("signaling_path"))
        {
            const auto h = hop.get<std::string>();
            if (h.find("cu-cp") != std::string::npos || h.find("cucp") != std::string::npos)
                cu_cp.insert(h);
            if (h.find("amf") != std::string::npos)
                amf.insert(h);
        }
    }
    const auto& c = r.summary.at("census");
    const auto n = [&](const char* k) { return c.at(k).get<int>(); };
    const bool ok = active == 2 && slices.size() == 2 && n("CU_UP") == 2 && n("UPF") == 2 && n("SMF") == 2 &&
                    n("CU_CP") == 1 && n("AMF") == 1 && cu_cp.size() == 1 && amf.size() == 1;
    line(6, ok,
         fmt::format("{} SessionActive UEs on {} slices, CU-UP/UPF/SMF {}/{}/{}, CU-CP {} AMF {}, signaling "
                     "CU-CP/AMF distinct {}/{} vs 2 on 2, 2/2/2, 1 1, 1/1",
                     active, slices.size(), n("CU_UP"), n("UPF"), n("SMF"), n("CU_CP"), n("AMF"), cu_cp.size(),
                     amf.size()));
}

void c7()
{
    const auto split = run("table1_oai_split");
    const auto mono = run("table1_oai_mono");
    const double rs = mean(rtts(split)), rm = mean(rtts(mono));
    const double sdl = throughput(split, "dl"), sul = throughput(split, "ul");
    const double mdl = throughput(mono, "dl"), mul = throughput(mono, "ul");
    const double eps = 1e-6;
    const bool caps = sdl <= 10.0 + eps && sul <= 6.0 + eps && mdl <= 120.0 + eps && mul <= 2.0 + eps &&
                      sdl >= 5.0 && sul >= 4.0 && near(mdl, 120.0, 0.05) && near(mul, 2.0, 0.05);
    line(7, near(rs, 43.35, 0.05) && rm >= 16.0 && rm <= 17.0 && caps,
         fmt::format("split RTT {:.2f} ms vs 43.35 +/-5%, mono RTT {:.2f} ms vs [16, 17]; caps split DL {:.2f}<=10 "
                     "UL {:.2f}<=6, mono DL {:.2f}<=120 UL {:.2f}<=2",
                     rs, rm, sdl, sul, mdl, mul));
}

void c8()
{
    const auto r = run("e2_interop_quirks");
    std::vector<std::string> parts;
    bool ok = true;
    int seen = 0;
    for (const auto& [node, e] : r.summary.at("e2").items())
    {
        const auto quirk = e.at("quirk").get<std::string>();
        const auto state = e.at("state").get<std::string>();
        const auto& fails = e.at("failures");
        if (quirk == "Normal")
        {
            const auto ind = e.at("indications").get<std::uint64_t>();
            ok = ok && state == "Established" && ind > 0;
            parts.push_back(fmt::format("{} {} {} indications", node, state, ind));
        }
        else if (quirk == "EmptyIEs")
        {
            const bool f = std::find(fails.begin(), fails.end(), "no-ran-function") != fails.end();
            ok = ok && state == "Degraded" && f;
            parts.push_back(fmt::format("{} {}{}", node, state, f ? " Failure(no-ran-function)" : ""));
        }
        else
        {
            const int attempts = e.at("attempts").get<int>();
            const bool timeout =
                r.artifacts.events_log.find(fmt::format(" {} e2 SetupTimeout", node)) != std::string::npos;
            ok = ok && state == "Idle" && attempts == 4 && timeout;
            parts.push_back(fmt::format("{} {} after 1+{} attempts{}", node, state, attempts - 1,
                                        timeout ? " SetupTimeout" : ""));
        }
        ++seen;
    }
    std::string text;
    for (const auto& p : parts)
        text += (text.empty() ? "" : "; ") + p;
    line(8, ok && seen == 3, text);
}

e2::E2Message random_valid(std::mt19937_64& g)
{
    e2::E2Message m;
    m.msg_type = static_cast<e2::MsgType>(1 + g() % 8);
    m.txn_id = static_cast<std::uint32_t>(g());
    const auto n = g() % 8;
    for (std::uint64_t i = 0; i < n; ++i)
    {
        e2::Ie ie;
        ie.tag = static_cast<std::uint16_t>(g());
        const auto len = g() % 16 == 0 ? g() % 4096 : g() % 32;
        ie.value.resize(len);
        for (auto& b : ie.value)
            b = static_cast<std::uint8_t>(g());
        m.ies.push_back(std::move(ie));
    }
    return m;
}

void c9()
{
    const auto t0 = std::chrono::steady_clock::now();
    std::mt19937_64 g(20240901);
    std::size_t round_trips = 0, rt_ok = 0;
    for (; round_trips < 10000; ++round_trips)
    {
        const auto m = random_valid(g);
        const auto r = e2::decode(e2::encode(m));
        rt_ok += (r.ok() && *r.message == m) ? 1 : 0;
    }
    std::size_t fuzz = 0, fuzz_ok = 0;
    for (; fuzz < 100000; ++fuzz)
    {
        e2::Bytes b(g() % 64 == 0 ? g() % 5000 : g() % 80);
        for (auto& x : b)
            x = static_cast<std::uint8_t>(g());
        if (fuzz % 2 == 0 && b.size() >= 10)
        {
            // Plausible header so the payload walker gets exercised too.
            b[0] = e2::kVersion;
            const auto len = static_cast<std::uint32_t>(b.size() - 10);
            b[6] = static_cast<std::uint8_t>(len >> 24);
            b[7] = static_cast<std::uint8_t>(len >> 16);
            b[8] = static_cast<std::uint8_t>(len >> 8);
            b[9] = static_cast<std::uint8_t>(len);
        }
        try
        {
            const auto r = e2::decode(b);
            // Exactly one outcome: a clean message that re-encodes to the input, or a typed error.
            const bool coherent = r.ok() ? e2::encode(*r.message) == b : r.error.has_value();
            fuzz_ok += coherent ? 1 : 0;
        }
        catch (...)
        {
        }
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    line(9, rt_ok == round_trips && fuzz_ok == fuzz && secs < 60.0,
         fmt::format("round trips {}/{} (>= 10000), random inputs handled {}/{} (>= 100000), {:.2f} s vs < 60 s",
                     rt_ok, round_trips, fuzz_ok, fuzz, secs));
}

struct AnomalyRow
{
    std::uint64_t t;
    std::string ue;
    std::string kind;
    double score;
    auto key() const { return std::tie(t, ue, kind); }
};

std::vector<AnomalyRow> emitted(const std::string& csv)
{
    std::vector<AnomalyRow> out;
    std::istringstream in(csv);
    std::string line;
    std::getline(in, line);
    while (std::getline(in, line))
    {
        std::istringstream ls(line);
        std::string t, ue, kind, score;
        std::getline(ls, t, ',');
        std::getline(ls, ue, ',');
        std::getline(ls, kind, ',');
        std::getline(ls, score);
        out.push_back({std::stoull(t), ue, kind, std::stod(score)});
    }
    return out;
}

/// Re-derives the detector output from the twin rows in metrics.csv alone.
std::vector<AnomalyRow> oracle(const std::vector<Row>& rows, std::size_t window)
{
    struct Sample
    {
        double dl{0.0};
        bool connected{false};
        bool session{false};
        std::optional<double> predicted;
    };
    std::map<std::uint64_t, std::map<std::string, Sample>> by_time;
    for (const auto& r : rows)
    {
        if (r.entity != "twin")
            continue;
        const auto colon = r.metric.find(':');
        const auto what = r.metric.substr(0, colon);
        auto& s = by_time[r.t][r.metric.substr(colon + 1)];
        if (what == "dl_mbps")
            s.dl = r.value;
        else if (what == "connected")
            s.connected = r.value != 0.0;
        else if (what == "session")
            s.session = r.value != 0.0;
        else if (what == "predicted_dl_mbps")
            s.predicted = r.value;
    }

    struct State
    {
        std::deque<double> hist;
        int drop{0}, outlier{0}, diverge{0};
        std::map<std::string, std::uint64_t> last;
    };
    std::map<std::string, State> st;
    std::vector<AnomalyRow> out;
    for (const auto& [t, ues] : by_time)
    {
        for (const auto& [ue, s] : ues)
        {
            auto& u = st[ue];
            double z = 0.0, div = 0.0;
            if (u.hist.size() >= window)
            {
                double m = 0.0;
                for (const double x : u.hist)
                    m += x;
                m /= static_cast<double>(u.hist.size());
                double ss = 0.0;
                for (const double x : u.hist)
                    ss += (x - m) * (x - m);
                const double sd = std::sqrt(ss / static_cast<double>(u.hist.size()));
                z = (s.dl - m) / std::max(sd, 1e-3);
                u.outlier = std::abs(z) > 3.0 ? u.outlier + 1 : 0;
            }
            else
                u.outlier = 0;
            if (s.predicted)
            {
                div = std::abs(s.dl - *s.predicted) / std::max(*s.predicted, 1.0);
                u.diverge = div > 0.2 ? u.diverge + 1 : 0;
            }
            else
                u.diverge = 0;
            u.drop = s.session && !s.connected ? u.drop + 1 : 0;
            u.hist.push_back(s.dl);
            if (u.hist.size() > window)
                u.hist.pop_front();

            const auto emit = [&](const char* kind, int run, double score) {
                if (run < 3)
                    return;
                auto it = u.last.find(kind);
                if (it != u.last.end() && t < it->second + 1000000)
                    return;
                u.last[kind] = t;
                out.push_back({t, ue, kind, score});
            };
            emit("ConnectivityDrop", u.drop, u.drop);
            emit("KpiOutlier", u.outlier, std::abs(z));
            emit("TwinDivergence", u.diverge, div);
        }
    }
    return out;
}

void c10()
{
    const auto r = run("twin_anomaly_injection");
    auto got = emitted(r.artifacts.anomalies_csv);
    auto want = oracle(r.rows, r.scenario.ric.twin_window);

    struct Fault
    {
        std::string ue;
        std::uint64_t start, end;
    };
    std::vector<Fault> faults;
    for (const auto& e : r.scenario.events)
    {
        if (e.action == "inject_fault")
            faults.push_back({e.ue, e.at_ms * 1000, (e.at_ms + e.duration_ms) * 1000});
    }
    // Three consecutive 100 ms samples plus one report period of slack after the fault clears.
    constexpr std::uint64_t kGrace = 500000;
    const auto hit = [&](const AnomalyRow& a, const Fault& f) {
        return a.ue == f.ue && a.t >= f.start && a.t <= f.end + kGrace;
    };
    std::size_t tp = 0, found = 0;
    for (const auto& a : got)
        tp += std::any_of(faults.begin(), faults.end(), [&](const Fault& f) { return hit(a, f); });
    for (const auto& f : faults)
        found += std::any_of(got.begin(), got.end(), [&](const AnomalyRow& a) { return hit(a, f); });
    const double precision = got.empty() ? 0.0 : static_cast<double>(tp) / got.size();
    const double recall = faults.empty() ? 0.0 : static_cast<double>(found) / faults.size();

    const auto by_key = [](const AnomalyRow& a, const AnomalyRow& b) { return a.key() < b.key(); };
    std::sort(got.begin(), got.end(), by_key);
    std::sort(want.begin(), want.end(), by_key);
    std::size_t matched = 0;
    bool same = got.size() == want.size();
    for (std::size_t i = 0; same && i < got.size(); ++i)
    {
        const bool eq = got[i].key() == want[i].key() &&
                        std::abs(got[i].score - want[i].score) <= 1e-9 * std::max(1.0, std::abs(want[i].score));
        matched += eq ? 1 : 0;
        same = eq;
    }
    line(10, faults.size() == 20 && precision >= 0.9 && recall >= 0.9 && same,
         fmt::format("{} faults, precision {:.3f} ({}/{}), recall {:.3f} ({}/{}) vs >= 0.9; offline oracle "
                     "reproduced {}/{} anomalies ({} recomputed)",
                     faults.size(), precision, tp, got.size(), recall, found, faults.size(), matched, got.size(),
                     want.size()));
}

void c11()
{
    std::vector<std::string> differ;
    for (const auto& name : kShipped)
    {
        const auto s = sh::load_scenario_file((kScenarios / (name + ".json")).string());
        const auto a = sh::simulate(s);
        const auto b = sh::simulate(s);
        if (a.metrics_csv != b.metrics_csv || a.anomalies_csv != b.anomalies_csv || a.summary_json != b.summary_json)
            differ.push_back(name);
    }
    std::string list;
    for (const auto& d : differ)
        list += " " + d;
    line(11, differ.empty(),
         fmt::format("{}/{} scenarios byte-identical across two same-seed runs{}", kShipped.size() - differ.size(),
                     kShipped.size(), differ.empty() ? "" : ", differ:" + list));
}
} // namespace

int main()
{
    for (auto* c : {c1, c2, c3, c4, c5, c6, c7, c8, c9, c10, c11})
    {
        try
        {
            c();
        }
        catch (const std::exception& e)
        {
            fmt::print("criterion: FAIL exception: {}\n", e.what());
            ++failures;
        }
    }
    fmt::print("{} criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
