#pragma once

#include "slicesim/radio/radio.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace slicesim::harness
{
struct Meta
{
    std::string name;
    std::uint64_t seed{0};
    std::uint64_t duration_ms{0};
    bool operator==(const Meta&) const = default;
};

/// Latencies in microseconds.
struct LinkSpec
{
    std::uint64_t radio_us{2000};
    std::uint64_t radio_jitter_us{1500};
    std::uint64_t fronthaul_us{100};
    std::uint64_t midhaul_us{200};
    std::uint64_t upf_us{500};
    std::uint64_t server_us{1000};
    bool operator==(const LinkSpec&) const = default;
};

/// A named profile derived from a preset with optional overrides.
struct ProfileSpec
{
    std::string base{"vendor"};
    std::optional<double> dl_cap_mbps;
    std::optional<double> ul_cap_mbps;
    std::optional<std::uint64_t> du_proc_us;
    std::optional<std::string> e2_quirk;
    bool operator==(const ProfileSpec&) const = default;
};

struct NodeSpec
{
    std::string id;
    std::string kind; // RU | DU | CU_CP
    std::string profile{"vendor"};
    // DU only.
    std::string ru;
    std::string cu_cp;
    double bandwidth_mhz{40.0};
    radio::TddConfig tdd;
    bool e2{false};
    bool operator==(const NodeSpec&) const = default;
};

struct SubscriberSpec
{
    std::string ue;
    std::vector<std::string> slices;
    bool operator==(const SubscriberSpec&) const = default;
};

struct CoreSpec
{
    bool sliced_amf{false};
    std::vector<SubscriberSpec> subscribers;
    bool operator==(const CoreSpec&) const = default;
};

struct SliceSpecJson
{
    std::string name;
    std::uint32_t sst{1};
    std::uint32_t sd{0};
    double radio_share{1.0};
    double min_share{0.0};
    std::string qos_label;
    std::string provision{"e2"}; // e2 | static
    bool operator==(const SliceSpecJson&) const = default;
};

struct RicSpec
{
    bool enabled{false};
    std::uint64_t report_period_ms{100};
    std::vector<std::string> subscribe;
    bool twin{false};
    std::uint64_t twin_window{50};
    bool operator==(const RicSpec&) const = default;
};

struct TrafficSpec
{
    std::string id;
    std::string kind; // udp_cbr | tcp_fullbuffer | ping
    std::string src;  // UE id or "server"
    std::string dst;
    double rate_mbps{0.0};
    std::uint64_t interval_ms{10};
    std::uint64_t start_ms{0};
    std::uint64_t stop_ms{0};
    bool operator==(const TrafficSpec&) const = default;
};

struct EventSpec
{
    std::uint64_t at_ms{0};
    std::string action; // attach | detach | create_slice | set_shares | inject_fault | node_up | node_down
    std::string ue;
    std::string slice;
    std::string du;
    std::string node;
    std::string fault; // ue_drop | throughput_degradation | e2_control_drop
    double factor{0.5};
    std::uint64_t duration_ms{0};
    std::map<std::string, double> shares;
    bool operator==(const EventSpec&) const = default;
};

/// Named interval over which the summary reports mean slice throughput.
struct WindowSpec
{
    std::string name;
    std::uint64_t start_ms{0};
    std::uint64_t stop_ms{0};
    bool operator==(const WindowSpec&) const = default;
};

struct Scenario
{
    Meta meta;
    radio::RadioCalibration calibration{radio::RadioCalibration::reference()};
    LinkSpec links;
    std::map<std::string, ProfileSpec> profiles;
    std::vector<NodeSpec> nodes;
    CoreSpec core;
    std::vector<SliceSpecJson> slices;
    RicSpec ric;
    std::vector<TrafficSpec> traffic;
    std::vector<EventSpec> events;
    std::vector<WindowSpec> windows;
    bool operator==(const Scenario&) const = default;

    const NodeSpec* node(std::string_view id) const;
    const SliceSpecJson* slice(std::string_view name) const;
    bool is_ue(std::string_view id) const;
};

class ParseError : public std::runtime_error
{
  public:
    ParseError(const std::string& what, std::size_t line, std::size_t column)
        : std::runtime_error(what), line_(line), column_(column)
    {
    }
    std::size_t line() const noexcept { return line_; }
    std::size_t column() const noexcept { return column_; }

  private:
    std::size_t line_;
    std::size_t column_;
};

class ScenarioInvalid : public std::runtime_error
{
  public:
    explicit ScenarioInvalid(std::vector<std::string> violations);
    const std::vector<std::string>& violations() const noexcept { return violations_; }

  private:
    std::vector<std::string> violations_;
};

/// Schema-level decode. Malformed JSON throws ParseError; type and key
/// problems are appended to `violations` (fields keep their defaults).
Scenario parse_scenario(const std::string& text, std::vector<std::string>& violations);

/// Referential and range checks on a decoded scenario.
std::vector<std::string> validate(const Scenario& s);

/// parse + validate; throws ScenarioInvalid listing every violation.
Scenario load_scenario_text(const std::string& text);
Scenario load_scenario_file(const std::string& path);

std::string to_json(const Scenario& s);

/// Profile resolution shared by validation and the runner.
bool profile_known(const Scenario& s, std::string_view name);
} // namespace slicesim::harness
