#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace pmrl {

/// One training round's measurements. Which fields are populated depends on
/// the algorithm (baselines carry no bound columns). Wall-clock time is kept
/// for display but never serialized, so written files stay byte-reproducible.
struct MetricsRecord {
    std::uint64_t seed = 0;
    int round = 0;
    std::vector<double> personalized_returns;  // per task
    std::vector<double> meta_returns;          // per task
    std::optional<double> grad_norm_sq;
    std::optional<double> dist_lhs;
    std::optional<double> bound_rhs;
    std::optional<bool> bound_ok;
    std::optional<double> delta_est;
    std::optional<double> sigma_sq;
    std::optional<double> sigma2_sq;
    std::optional<double> telescope_residual;
    double wall_ms = 0.0;

    double mean_personalized_return() const;
    double mean_meta_return() const;

    friend bool operator==(const MetricsRecord& a, const MetricsRecord& b);
};

using MetricsSink = std::function<void(const MetricsRecord&)>;

/// Writes records as tab-separated rows under a fixed, documented header.
/// All records must expose the same column set.
void write_metrics(const std::vector<MetricsRecord>& records, const std::string& path);

/// Parses a file produced by write_metrics back into equal records
/// (wall-clock excluded, which is not serialized).
std::vector<MetricsRecord> read_metrics(const std::string& path);

/// Emits (series, round, mean, std) rows aggregated across seeds, one line
/// per series per round, using the population standard deviation. Throws on
/// an empty record list.
void emit_plot_data(const std::vector<MetricsRecord>& records, const std::string& path);

}  // namespace pmrl
