#pragma once

#include "slicesim/sim/time.hpp"

#include <string>
#include <vector>

namespace slicesim::sim
{
struct MetricsRecord
{
    SimTime at;
    std::string entity;
    std::string metric;
    double value{0.0};
};

struct EventLogRecord
{
    SimTime at;
    std::string entity;
    std::string text;
};

struct AnomalyRecord
{
    SimTime at;
    std::string ue;
    std::string kind;
    double score{0.0};
};

/// Append-only in-memory sink for a run's outputs. Rows are appended at the
/// current simulated time, so they come out time-ordered.
class Recorder
{
  public:
    void metric(SimTime at, std::string entity, std::string metric, double value)
    {
        metrics_.push_back({at, std::move(entity), std::move(metric), value});
    }
    void event(SimTime at, std::string entity, std::string text)
    {
        events_.push_back({at, std::move(entity), std::move(text)});
    }
    void anomaly(SimTime at, std::string ue, std::string kind, double score)
    {
        anomalies_.push_back({at, std::move(ue), std::move(kind), score});
    }

    const std::vector<MetricsRecord>& metrics() const noexcept { return metrics_; }
    const std::vector<EventLogRecord>& events() const noexcept { return events_; }
    const std::vector<AnomalyRecord>& anomalies() const noexcept { return anomalies_; }

  private:
    std::vector<MetricsRecord> metrics_;
    std::vector<EventLogRecord> events_;
    std::vector<AnomalyRecord> anomalies_;
};
} // namespace slicesim::sim
