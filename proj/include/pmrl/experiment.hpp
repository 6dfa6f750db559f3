#pragma once

#include <string>
#include <vector>

#include "pmrl/config.hpp"
#include "pmrl/metrics.hpp"

namespace pmrl {

struct SeedOutcome {
    std::uint64_t seed = 0;
    std::vector<MetricsRecord> metrics;
};

struct ExperimentResult {
    std::vector<SeedOutcome> per_seed;
    bool bound_checked = false;
    bool bound_violated = false;

    const MetricsRecord& final_record(std::size_t seed_index) const {
        return per_seed[seed_index].metrics.back();
    }
};

/// Runs the configured trainer once per seed, writing per-seed metrics
/// files, checkpoints and the aggregated plot-data file under out_dir. On
/// failure every partially written file of the run is removed before the
/// error propagates.
ExperimentResult run_experiment(const ExperimentConfig& config);

struct LambdaRow {
    double lambda = 0.0;
    double pers_mean = 0.0;
    double pers_std = 0.0;
    double meta_mean = 0.0;
    double meta_std = 0.0;
    bool best = false;
};

/// Reruns the experiment once per lambda with shared seeds and writes the
/// final-round comparison table to out_dir/lambda_sweep.tsv.
std::vector<LambdaRow> sweep_lambda(const ExperimentConfig& config,
                                    const std::vector<double>& lambdas);

}  // namespace pmrl
