#pragma once

#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

namespace crl {

/// One line of metrics.jsonl:
///   {"wall_step": learner steps, "env_steps": ..., "name": ..., "value": ..., "seed": ...}
/// Non-finite values are written as null.
struct MetricsRecord {
    std::int64_t wall_step = 0;
    std::int64_t env_steps = 0;
    std::string name;
    double value = 0.0;
    std::uint64_t seed = 0;

    std::string to_json() const;
    static MetricsRecord from_json(const std::string& line);
};

class MetricsWriter {
public:
    /// Opens `path` for appending after truncating it to its first
    /// `keep_records` lines (used when resuming a run).
    MetricsWriter(const std::string& path, std::int64_t keep_records = 0);

    void write(const MetricsRecord& record);
    std::int64_t records_written() const { return count_; }

private:
    std::ofstream out_;
    std::int64_t count_ = 0;
};

std::vector<MetricsRecord> read_metrics(const std::string& path);

}  // namespace crl
