#include "slicesim/harness/scenario.hpp"

#include "slicesim/e2/endpoint.hpp"
#include "slicesim/ran/ran.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

namespace slicesim::harness
{
using nlohmann::json;

const NodeSpec* Scenario::node(std::string_view id) const
{
    auto it = std::find_if(nodes.begin(), nodes.end(), [&](const NodeSpec& n) { return n.id == id; });
    return it == nodes.end() ? nullptr : &*it;
}

const SliceSpecJson* Scenario::slice(std::string_view name) const
{
    auto it = std::find_if(slices.begin(), slices.end(), [&](const SliceSpecJson& s) { return s.name == name; });
    return it == slices.end() ? nullptr : &*it;
}

bool Scenario::is_ue(std::string_view id) const
{
    return std::any_of(core.subscribers.begin(), core.subscribers.end(),
                       [&](const SubscriberSpec& s) { return s.ue == id; });
}

ScenarioInvalid::ScenarioInvalid(std::vector<std::string> violations)
    : std::runtime_error(fmt::format("scenario has {} violation(s)", violations.size())),
      violations_(std::move(violations))
{
}

bool profile_known(const Scenario& s, std::string_view name)
{
    return ran::StackProfile::is_preset(name) || s.profiles.contains(std::string(name));
}

namespace
{
/// Reads fields of one JSON object, recording type errors and unknown keys.
class Reader
{
  public:
    Reader(const json& j, std::string path, std::vector<std::string>& out)
        : j_(j), path_(std::move(path)), out_(out)
    {
        if (!j_.is_object())
        {
            out_.push_back(fmt::format("{}: expected an object", path_));
        }
    }

    ~Reader()
    {
        if (!j_.is_object())
        {
            return;
        }
        for (const auto& [key, _] : j_.items())
        {
            if (!seen_.contains(key))
            {
                out_.push_back(fmt::format("{}.{}: unknown key", path_, key));
            }
        }
    }

    Reader(const Reader&) = delete;
    Reader& operator=(const Reader&) = delete;

    const json* find(const std::string& key, bool required)
    {
        seen_.insert(key);
        if (!j_.is_object() || !j_.contains(key))
        {
            if (required)
            {
                out_.push_back(fmt::format("{}.{}: missing", path_, key));
            }
            return nullptr;
        }
        return &j_.at(key);
    }

    std::string at(const std::string& key) const { return path_ + "." + key; }

    void str(const std::string& key, std::string& v, bool required = false)
    {
        if (const auto* f = find(key, required))
        {
            if (f->is_string())
                v = f->get<std::string>();
            else
                bad(key, "a string");
        }
    }
    void boolean(const std::string& key, bool& v)
    {
        if (const auto* f = find(key, false))
        {
            if (f->is_boolean())
                v = f->get<bool>();
            else
                bad(key, "a boolean");
        }
    }
    void number(const std::string& key, double& v, bool required = false)
    {
        if (const auto* f = find(key, required))
        {
            if (f->is_number())
                v = f->get<double>();
            else
                bad(key, "a number");
        }
    }
    void opt_number(const std::string& key, std::optional<double>& v)
    {
        if (const auto* f = find(key, false))
        {
            if (f->is_number())
                v = f->get<double>();
            else if (!f->is_null())
                bad(key, "a number or null");
        }
    }
    template <typename U>
    void uint(const std::string& key, U& v, bool required = false)
    {
        if (const auto* f = find(key, required))
        {
            if (f->is_number_unsigned())
                v = static_cast<U>(f->get<std::uint64_t>());
            else if (f->is_number_integer() && f->get<std::int64_t>() >= 0)
                v = static_cast<U>(f->get<std::int64_t>());
            else
                bad(key, "a non-negative integer");
        }
    }
    void opt_uint(const std::string& key, std::optional<std::uint64_t>& v)
    {
        if (const auto* f = find(key, false))
        {
            if (f->is_number_unsigned() || (f->is_number_integer() && f->get<std::int64_t>() >= 0))
                v = f->get<std::uint64_t>();
            else if (!f->is_null())
                bad(key, "a non-negative integer or null");
        }
    }
    void opt_str(const std::string& key, std::optional<std::string>& v)
    {
        if (const auto* f = find(key, false))
        {
            if (f->is_string())
                v = f->get<std::string>();
            else if (!f->is_null())
                bad(key, "a string or null");
        }
    }
    void strings(const std::string& key, std::vector<std::string>& v)
    {
        if (const auto* f = find(key, false))
        {
            if (!f->is_array())
            {
                bad(key, "an array of strings");
                return;
            }
            for (const auto& e : *f)
            {
                if (e.is_string())
                    v.push_back(e.get<std::string>());
                else
                    bad(key, "an array of strings");
            }
        }
    }
    const json* array(const std::string& key)
    {
        const auto* f = find(key, false);
        if (f != nullptr && !f->is_array())
        {
            bad(key, "an array");
            return nullptr;
        }
        return f;
    }
    const json* object(const std::string& key)
    {
        const auto* f = find(key, false);
        if (f != nullptr && !f->is_object())
        {
            bad(key, "an object");
            return nullptr;
        }
        return f;
    }

  private:
    void bad(const std::string& key, const char* what) { out_.push_back(fmt::format("{}.{}: expected {}", path_, key, what)); }

    const json& j_;
    std::string path_;
    std::vector<std::string>& out_;
    std::set<std::string> seen_;
};

void read_tdd(const json& j, const std::string& path, radio::TddConfig& t, std::vector<std::string>& v)
{
    Reader r(j, path, v);
    r.uint("period_slots", t.period_slots);
    r.uint("dl_slots", t.dl_slots);
    r.uint("ul_slots", t.ul_slots);
    r.uint("special_dl_symbols", t.special_dl_symbols);
    r.uint("special_ul_symbols", t.special_ul_symbols);
}

std::pair<std::size_t, std::size_t> line_col(const std::string& text, std::size_t byte)
{
    std::size_t line = 1;
    std::size_t col = 1;
    for (std::size_t i = 0; i < text.size() && i + 1 < byte; ++i)
    {
        if (text[i] == '\n')
        {
            ++line;
            col = 1;
        }
        else
        {
            ++col;
        }
    }
    return {line, col};
}
} // namespace

Scenario parse_scenario(const std::string& text, std::vector<std::string>& v)
{
    json root;
    try
    {
        root = json::parse(text);
    }
    catch (const json::parse_error& e)
    {
        const auto [line, col] = line_col(text, e.byte);
        throw ParseError(fmt::format("line {}, column {}: {}", line, col, e.what()), line, col);
    }

    Scenario s;
    Reader top(root, "$", v);
    if (const auto* m = top.object("meta"))
    {
        Reader r(*m, "$.meta", v);
        r.str("name", s.meta.name, true);
        r.uint("seed", s.meta.seed, true);
        r.uint("duration_ms", s.meta.duration_ms, true);
    }
    else
    {
        v.emplace_back("$.meta: missing");
    }
    if (const auto* radio = top.object("radio"))
    {
        Reader r(*radio, "$.radio", v);
        if (const auto* c = r.object("calibration"))
        {
            Reader rc(*c, "$.radio.calibration", v);
            rc.number("dl_spectral_eff", s.calibration.dl_spectral_eff);
            rc.number("ul_spectral_eff", s.calibration.ul_spectral_eff);
            rc.number("udp_over_tcp_factor", s.calibration.udp_over_tcp_factor);
        }
    }
    if (const auto* topo = top.object("topology"))
    {
        Reader r(*topo, "$.topology", v);
        if (const auto* l = r.object("links"))
        {
            Reader rl(*l, "$.topology.links", v);
            rl.uint("radio_us", s.links.radio_us);
            rl.uint("radio_jitter_us", s.links.radio_jitter_us);
            rl.uint("fronthaul_us", s.links.fronthaul_us);
            rl.uint("midhaul_us", s.links.midhaul_us);
            rl.uint("upf_us", s.links.upf_us);
            rl.uint("server_us", s.links.server_us);
        }
        if (const auto* p = r.object("profiles"))
        {
            for (const auto& [name, body] : p->items())
            {
                ProfileSpec ps;
                Reader rp(body, "$.topology.profiles." + name, v);
                rp.str("base", ps.base);
                rp.opt_number("dl_cap_mbps", ps.dl_cap_mbps);
                rp.opt_number("ul_cap_mbps", ps.ul_cap_mbps);
                rp.opt_uint("du_proc_us", ps.du_proc_us);
                rp.opt_str("e2_quirk", ps.e2_quirk);
                s.profiles[name] = ps;
            }
        }
        if (const auto* nodes = r.array("nodes"))
        {
            std::size_t i = 0;
            for (const auto& n : *nodes)
            {
                NodeSpec ns;
                const auto path = fmt::format("$.topology.nodes[{}]", i++);
                Reader rn(n, path, v);
                rn.str("id", ns.id, true);
                rn.str("kind", ns.kind, true);
                rn.str("profile", ns.profile);
                rn.str("ru", ns.ru);
                rn.str("cu_cp", ns.cu_cp);
                rn.number("bandwidth_mhz", ns.bandwidth_mhz);
                if (const auto* t = rn.object("tdd"))
                {
                    read_tdd(*t, path + ".tdd", ns.tdd, v);
                }
                rn.boolean("e2", ns.e2);
                s.nodes.push_back(std::move(ns));
            }
        }
    }
    else
    {
        v.emplace_back("$.topology: missing");
    }
    if (const auto* c = top.object("core"))
    {
        Reader r(*c, "$.core", v);
        r.boolean("sliced_amf", s.core.sliced_amf);
        if (const auto* subs = r.array("subscribers"))
        {
            std::size_t i = 0;
            for (const auto& e : *subs)
            {
                SubscriberSpec ss;
                Reader rs(e, fmt::format("$.core.subscribers[{}]", i++), v);
                rs.str("ue", ss.ue, true);
                rs.strings("slices", ss.slices);
                s.core.subscribers.push_back(std::move(ss));
            }
        }
    }
    if (const auto* slices = top.array("slices"))
    {
        std::size_t i = 0;
        for (const auto& e : *slices)
        {
            SliceSpecJson sl;
            Reader r(e, fmt::format("$.slices[{}]", i++), v);
            r.str("name", sl.name, true);
            r.uint("sst", sl.sst);
            r.uint("sd", sl.sd);
            r.number("radio_share", sl.radio_share, true);
            r.number("min_share", sl.min_share);
            r.str("qos_label", sl.qos_label);
            r.str("provision", sl.provision);
            s.slices.push_back(std::move(sl));
        }
    }
    if (const auto* ric = top.object("ric"))
    {
        Reader r(*ric, "$.ric", v);
        r.boolean("enabled", s.ric.enabled);
        r.uint("report_period_ms", s.ric.report_period_ms);
        r.strings("subscribe", s.ric.subscribe);
        r.boolean("twin", s.ric.twin);
        r.uint("twin_window", s.ric.twin_window);
    }
    if (const auto* traffic = top.array("traffic"))
    {
        std::size_t i = 0;
        for (const auto& e : *traffic)
        {
            TrafficSpec t;
            Reader r(e, fmt::format("$.traffic[{}]", i++), v);
            r.str("id", t.id, true);
            r.str("kind", t.kind, true);
            r.str("src", t.src, true);
            r.str("dst", t.dst, true);
            r.number("rate_mbps", t.rate_mbps);
            r.uint("interval_ms", t.interval_ms);
            r.uint("start_ms", t.start_ms, true);
            r.uint("stop_ms", t.stop_ms, true);
            s.traffic.push_back(std::move(t));
        }
    }
    if (const auto* events = top.array("events"))
    {
        std::size_t i = 0;
        for (const auto& e : *events)
        {
            EventSpec ev;
            Reader r(e, fmt::format("$.events[{}]", i++), v);
            r.uint("at_ms", ev.at_ms, true);
            r.str("action", ev.action, true);
            r.str("ue", ev.ue);
            r.str("slice", ev.slice);
            r.str("du", ev.du);
            r.str("node", ev.node);
            r.str("fault", ev.fault);
            r.number("factor", ev.factor);
            r.uint("duration_ms", ev.duration_ms);
            if (const auto* sh = r.object("shares"))
            {
                for (const auto& [name, val] : sh->items())
                {
                    if (val.is_number())
                        ev.shares[name] = val.get<double>();
                    else
                        v.push_back(fmt::format("{}.shares.{}: expected a number", r.at("shares"), name));
                }
            }
            s.events.push_back(std::move(ev));
        }
    }
    if (const auto* windows = top.array("windows"))
    {
        std::size_t i = 0;
        for (const auto& e : *windows)
        {
            WindowSpec w;
            Reader r(e, fmt::format("$.windows[{}]", i++), v);
            r.str("name", w.name, true);
            r.uint("start_ms", w.start_ms, true);
            r.uint("stop_ms", w.stop_ms, true);
            s.windows.push_back(std::move(w));
        }
    }
    return s;
}

std::vector<std::string> validate(const Scenario& s)
{
    std::vector<std::string> v;
    const auto dur = s.meta.duration_ms;
    if (s.meta.name.empty())
        v.emplace_back("meta.name: empty");
    if (dur == 0)
        v.emplace_back("meta.duration_ms: must be positive");
    try
    {
        s.calibration.validate();
    }
    catch (const std::exception& e)
    {
        v.push_back(fmt::format("radio.calibration: {}", e.what()));
    }

    for (const auto& [name, p] : s.profiles)
    {
        if (!ran::StackProfile::is_preset(p.base))
            v.push_back(fmt::format("profile {}: unknown base '{}'", name, p.base));
        if (p.e2_quirk && !e2::parse_quirk(*p.e2_quirk))
            v.push_back(fmt::format("profile {}: unknown e2_quirk '{}'", name, *p.e2_quirk));
        if ((p.dl_cap_mbps && *p.dl_cap_mbps <= 0.0) || (p.ul_cap_mbps && *p.ul_cap_mbps <= 0.0))
            v.push_back(fmt::format("profile {}: caps must be positive", name));
    }

    if (s.links.radio_jitter_us > s.links.radio_us)
        v.emplace_back("topology.links: radio_jitter_us exceeds radio_us");

    std::set<std::string> ids;
    const auto unique = [&](const std::string& id, const char* what) {
        if (id.empty())
        {
            v.push_back(fmt::format("{}: empty id", what));
        }
        else if (!ids.insert(id).second)
        {
            v.push_back(fmt::format("{} '{}': duplicate id", what, id));
        }
    };
    int cu_cps = 0;
    for (const auto& n : s.nodes)
    {
        unique(n.id, "node");
        const auto kind = ran::parse_kind(n.kind);
        if (!kind || *kind == ran::NodeKind::CU_UP)
        {
            v.push_back(fmt::format("node {}: kind '{}' must be RU, DU or CU_CP", n.id, n.kind));
            continue;
        }
        if (!profile_known(s, n.profile))
            v.push_back(fmt::format("node {}: unknown profile '{}'", n.id, n.profile));
        if (*kind == ran::NodeKind::CU_CP)
            ++cu_cps;
        if (*kind != ran::NodeKind::DU)
            continue;
        const auto* ru = s.node(n.ru);
        if (ru == nullptr || ru->kind != "RU")
            v.push_back(fmt::format("node {}: ru '{}' does not name an RU", n.id, n.ru));
        const auto* cp = s.node(n.cu_cp);
        if (cp == nullptr || cp->kind != "CU_CP")
            v.push_back(fmt::format("node {}: cu_cp '{}' does not name a CU_CP", n.id, n.cu_cp));
        if (!(n.bandwidth_mhz > 0.0) || n.bandwidth_mhz > 400.0)
            v.push_back(fmt::format("node {}: bandwidth_mhz {} out of range", n.id, n.bandwidth_mhz));
        try
        {
            n.tdd.validate();
        }
        catch (const std::exception& e)
        {
            v.push_back(fmt::format("node {}: {}", n.id, e.what()));
        }
    }
    if (cu_cps != 1)
        v.push_back(fmt::format("topology: exactly one CU_CP required, found {}", cu_cps));

    std::set<std::uint32_t> snssais;
    for (const auto& sl : s.slices)
    {
        unique(sl.name, "slice");
        if (sl.sst > 255 || sl.sd > 0xFFFFFF)
            v.push_back(fmt::format("slice {}: sst/sd out of range", sl.name));
        else if (!snssais.insert((sl.sst << 24) | sl.sd).second)
            v.push_back(fmt::format("slice {}: duplicate S-NSSAI", sl.name));
        if (!(sl.radio_share > 0.0) || sl.radio_share > 1.0)
            v.push_back(fmt::format("slice {}: radio_share outside (0,1]", sl.name));
        if (sl.min_share < 0.0 || sl.min_share > sl.radio_share)
            v.push_back(fmt::format("slice {}: min_share outside [0, radio_share]", sl.name));
        if (sl.provision != "e2" && sl.provision != "static")
            v.push_back(fmt::format("slice {}: provision must be e2 or static", sl.name));
        if (sl.provision == "e2" && !s.ric.enabled)
            v.push_back(fmt::format("slice {}: e2 provisioning requires ric.enabled", sl.name));
    }

    for (const auto& sub : s.core.subscribers)
    {
        unique(sub.ue, "ue");
        for (const auto& sl : sub.slices)
        {
            if (s.slice(sl) == nullptr)
                v.push_back(fmt::format("subscriber {}: unknown slice '{}'", sub.ue, sl));
        }
    }

    if (s.ric.enabled && s.ric.report_period_ms < 10)
        v.emplace_back("ric.report_period_ms: below the 10 ms floor");
    if (s.ric.twin && !s.ric.enabled)
        v.emplace_back("ric.twin: requires ric.enabled");
    if (s.ric.twin_window == 0)
        v.emplace_back("ric.twin_window: must be positive");
    for (const auto& id : s.ric.subscribe)
    {
        const auto* n = s.node(id);
        if (n == nullptr || n->kind != "DU" || !n->e2)
            v.push_back(fmt::format("ric.subscribe: '{}' is not an E2-enabled DU", id));
    }

    for (const auto& t : s.traffic)
    {
        unique(t.id, "flow");
        if (t.kind != "udp_cbr" && t.kind != "tcp_fullbuffer" && t.kind != "ping")
            v.push_back(fmt::format("flow {}: unknown kind '{}'", t.id, t.kind));
        const bool src_ue = s.is_ue(t.src);
        const bool dst_ue = s.is_ue(t.dst);
        if (!(src_ue && t.dst == "server") && !(dst_ue && t.src == "server"))
            v.push_back(fmt::format("flow {}: endpoints must be a known UE and 'server' (got {} -> {})", t.id, t.src,
                                    t.dst));
        if (t.kind == "ping" && !src_ue)
            v.push_back(fmt::format("flow {}: ping must originate at a UE", t.id));
        if (t.kind == "udp_cbr" && !(t.rate_mbps > 0.0))
            v.push_back(fmt::format("flow {}: udp_cbr needs rate_mbps > 0", t.id));
        if (t.kind == "ping" && t.interval_ms == 0)
            v.push_back(fmt::format("flow {}: interval_ms must be positive", t.id));
        if (t.start_ms >= t.stop_ms)
            v.push_back(fmt::format("flow {}: start_ms must precede stop_ms", t.id));
        if (t.stop_ms > dur)
            v.push_back(fmt::format("flow {}: stop_ms {} beyond duration {}", t.id, t.stop_ms, dur));
    }

    std::size_t i = 0;
    for (const auto& e : s.events)
    {
        const auto where = fmt::format("event[{}] ({} at {} ms)", i++, e.action, e.at_ms);
        if (e.at_ms > dur)
            v.push_back(fmt::format("{}: beyond duration {} ms", where, dur));
        const auto need_ue = [&] {
            if (!s.is_ue(e.ue))
                v.push_back(fmt::format("{}: unknown ue '{}'", where, e.ue));
        };
        const auto need_slice = [&] {
            if (s.slice(e.slice) == nullptr)
                v.push_back(fmt::format("{}: unknown slice '{}'", where, e.slice));
        };
        if (e.action == "attach")
        {
            need_ue();
            need_slice();
            const auto* du = s.node(e.du);
            if (du == nullptr || du->kind != "DU")
                v.push_back(fmt::format("{}: unknown DU '{}'", where, e.du));
        }
        else if (e.action == "detach")
        {
            need_ue();
        }
        else if (e.action == "create_slice")
        {
            need_slice();
        }
        else if (e.action == "set_shares")
        {
            if (e.shares.empty())
                v.push_back(fmt::format("{}: shares empty", where));
            for (const auto& [name, share] : e.shares)
            {
                if (s.slice(name) == nullptr)
                    v.push_back(fmt::format("{}: unknown slice '{}'", where, name));
                if (!(share > 0.0) || share > 1.0)
                    v.push_back(fmt::format("{}: share for {} outside (0,1]", where, name));
            }
        }
        else if (e.action == "inject_fault")
        {
            if (e.fault == "ue_drop" || e.fault == "throughput_degradation")
            {
                need_ue();
                if (e.fault == "throughput_degradation" && (e.factor < 0.0 || e.factor >= 1.0))
                    v.push_back(fmt::format("{}: factor must be in [0,1)", where));
            }
            else if (e.fault == "e2_control_drop")
            {
                const auto* du = s.node(e.node);
                if (du == nullptr || du->kind != "DU")
                    v.push_back(fmt::format("{}: unknown DU '{}'", where, e.node));
            }
            else
            {
                v.push_back(fmt::format("{}: unknown fault '{}'", where, e.fault));
            }
            if (e.duration_ms == 0)
                v.push_back(fmt::format("{}: duration_ms must be positive", where));
            if (e.at_ms + e.duration_ms > dur)
                v.push_back(fmt::format("{}: fault ends beyond duration", where));
        }
        else if (e.action == "node_up" || e.action == "node_down")
        {
            if (s.node(e.node) == nullptr)
                v.push_back(fmt::format("{}: unknown node '{}'", where, e.node));
        }
        else
        {
            v.push_back(fmt::format("{}: unknown action", where));
        }
    }

    for (const auto& w : s.windows)
    {
        if (w.start_ms >= w.stop_ms || w.stop_ms > dur)
            v.push_back(fmt::format("window {}: needs start < stop <= duration", w.name));
    }
    return v;
}

Scenario load_scenario_text(const std::string& text)
{
    std::vector<std::string> violations;
    auto s = parse_scenario(text, violations);
    if (violations.empty())
    {
        violations = validate(s);
    }
    if (!violations.empty())
    {
        throw ScenarioInvalid(std::move(violations));
    }
    return s;
}

Scenario load_scenario_file(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
    {
        throw std::runtime_error(fmt::format("cannot open {}", path));
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return load_scenario_text(ss.str());
}

std::string to_json(const Scenario& s)
{
    using oj = nlohmann::ordered_json;
    oj root;
    root["meta"] = {{"name", s.meta.name}, {"seed", s.meta.seed}, {"duration_ms", s.meta.duration_ms}};
    root["radio"]["calibration"] = {{"dl_spectral_eff", s.calibration.dl_spectral_eff},
                                    {"ul_spectral_eff", s.calibration.ul_spectral_eff},
                                    {"udp_over_tcp_factor", s.calibration.udp_over_tcp_factor}};
    auto& topo = root["topology"];
    topo["links"] = {{"radio_us", s.links.radio_us},         {"radio_jitter_us", s.links.radio_jitter_us},
                     {"fronthaul_us", s.links.fronthaul_us}, {"midhaul_us", s.links.midhaul_us},
                     {"upf_us", s.links.upf_us},             {"server_us", s.links.server_us}};
    topo["profiles"] = oj::object();
    for (const auto& [name, p] : s.profiles)
    {
        oj j;
        j["base"] = p.base;
        j["dl_cap_mbps"] = p.dl_cap_mbps ? oj(*p.dl_cap_mbps) : oj(nullptr);
        j["ul_cap_mbps"] = p.ul_cap_mbps ? oj(*p.ul_cap_mbps) : oj(nullptr);
        j["du_proc_us"] = p.du_proc_us ? oj(*p.du_proc_us) : oj(nullptr);
        j["e2_quirk"] = p.e2_quirk ? oj(*p.e2_quirk) : oj(nullptr);
        topo["profiles"][name] = j;
    }
    topo["nodes"] = oj::array();
    for (const auto& n : s.nodes)
    {
        oj j{{"id", n.id}, {"kind", n.kind}, {"profile", n.profile}};
        if (n.kind == "DU")
        {
            j["ru"] = n.ru;
            j["cu_cp"] = n.cu_cp;
            j["bandwidth_mhz"] = n.bandwidth_mhz;
            j["tdd"] = {{"period_slots", n.tdd.period_slots},
                        {"dl_slots", n.tdd.dl_slots},
                        {"ul_slots", n.tdd.ul_slots},
                        {"special_dl_symbols", n.tdd.special_dl_symbols},
                        {"special_ul_symbols", n.tdd.special_ul_symbols}};
            j["e2"] = n.e2;
        }
        topo["nodes"].push_back(j);
    }
    root["core"]["sliced_amf"] = s.core.sliced_amf;
    root["core"]["subscribers"] = oj::array();
    for (const auto& sub : s.core.subscribers)
    {
        root["core"]["subscribers"].push_back({{"ue", sub.ue}, {"slices", sub.slices}});
    }
    root["slices"] = oj::array();
    for (const auto& sl : s.slices)
    {
        root["slices"].push_back({{"name", sl.name},
                                  {"sst", sl.sst},
                                  {"sd", sl.sd},
                                  {"radio_share", sl.radio_share},
                                  {"min_share", sl.min_share},
                                  {"qos_label", sl.qos_label},
                                  {"provision", sl.provision}});
    }
    root["ric"] = {{"enabled", s.ric.enabled},
                   {"report_period_ms", s.ric.report_period_ms},
                   {"subscribe", s.ric.subscribe},
                   {"twin", s.ric.twin},
                   {"twin_window", s.ric.twin_window}};
    root["traffic"] = oj::array();
    for (const auto& t : s.traffic)
    {
        root["traffic"].push_back({{"id", t.id},
                                   {"kind", t.kind},
                                   {"src", t.src},
                                   {"dst", t.dst},
                                   {"rate_mbps", t.rate_mbps},
                                   {"interval_ms", t.interval_ms},
                                   {"start_ms", t.start_ms},
                                   {"stop_ms", t.stop_ms}});
    }
    root["events"] = oj::array();
    for (const auto& e : s.events)
    {
        oj j{{"at_ms", e.at_ms}, {"action", e.action}};
        const auto put = [&](const char* key, const std::string& val) {
            if (!val.empty())
                j[key] = val;
        };
        put("ue", e.ue);
        put("slice", e.slice);
        put("du", e.du);
        put("node", e.node);
        put("fault", e.fault);
        j["factor"] = e.factor;
        j["duration_ms"] = e.duration_ms;
        if (!e.shares.empty())
        {
            j["shares"] = e.shares;
        }
        root["events"].push_back(j);
    }
    root["windows"] = oj::array();
    for (const auto& w : s.windows)
    {
        root["windows"].push_back({{"name", w.name}, {"start_ms", w.start_ms}, {"stop_ms", w.stop_ms}});
    }
    return root.dump(2) + "\n";
}
} // namespace slicesim::harness
