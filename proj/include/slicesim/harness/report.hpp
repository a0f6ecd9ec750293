#pragma once

#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace slicesim::harness
{
class MissingArtifacts : public std::runtime_error
{
  public:
    using std::runtime_error::runtime_error;
};

struct Check
{
    std::string name;
    std::string line; // measured vs expected, tolerance
    bool pass{false};
};

struct Report
{
    std::string scenario;
    /// Shown when the scenario has no reference values.
    std::vector<std::string> notes;
    std::vector<Check> checks;

    bool all_pass() const;
    std::string render() const;
};

struct MetricRow
{
    std::uint64_t time_us{0};
    std::string entity;
    std::string metric;
    double value{0.0};
};

/// Strict parse of a metrics.csv body; throws std::runtime_error on a bad
/// header or row.
std::vector<MetricRow> parse_metrics_csv(const std::string& text);

/// Recomputes the reference comparisons from the artifacts in `dir`. Values
/// are taken from metrics.csv and anomalies.csv; summary.json only supplies
/// the scenario identity, windows, fault ground truth and end state.
Report build_report(const std::filesystem::path& dir);
} // namespace slicesim::harness
