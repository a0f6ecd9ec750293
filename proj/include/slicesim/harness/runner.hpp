#pragma once

#include "slicesim/harness/scenario.hpp"

#include <filesystem>
#include <optional>
#include <string>

namespace slicesim::harness
{
struct RunOptions
{
    std::optional<std::uint64_t> seed;
    bool trace{false};
};

/// In-memory contents of a run's output files.
struct RunArtifacts
{
    std::string metrics_csv;
    std::string anomalies_csv;
    std::string events_log;
    std::string summary_json;
    std::string trace; // empty unless RunOptions::trace
};

inline constexpr const char* kMetricsFile = "metrics.csv";
inline constexpr const char* kAnomaliesFile = "anomalies.csv";
inline constexpr const char* kEventsFile = "events.log";
inline constexpr const char* kSummaryFile = "summary.json";
inline constexpr const char* kTraceFile = "trace.log";

class SimulationFault : public std::runtime_error
{
  public:
    using std::runtime_error::runtime_error;
};

/// Runs a validated scenario. Any exception escaping the simulation is
/// rethrown as SimulationFault carrying the simulated time.
RunArtifacts simulate(const Scenario& scenario, const RunOptions& options = {});

void write_artifacts(const RunArtifacts& artifacts, const std::filesystem::path& dir);

/// $SLICESIM_OUT if set, else "./out".
std::filesystem::path default_out_root();
} // namespace slicesim::harness
