#pragma once

#include <functional>
#include <vector>

#include "pmrl/metrics.hpp"
#include "pmrl/task.hpp"
#include "pmrl/trainer.hpp"

namespace pmrl {

enum class Algorithm { PMeta, ModelAverage, Independent, Joint };

struct TrainResult {
    TrainingState state;
    std::vector<MetricsRecord> metrics;
};

using CheckpointFn = std::function<void(int round, const TrainingState&)>;

/// Runs C rounds of the selected trainer. All four algorithms share the
/// same loop skeleton, data collection and random-stream discipline
/// (per-task child streams of (seed, task, round)), so results are
/// deterministic for a given seed regardless of the execution mode, and the
/// lambda = 0 personalized trainer reproduces independent Q-learning
/// bit for bit.
///
///   PMeta        - broadcast meta into each auxiliary table, R alternations
///                  of K collected units of personalized TD steps followed by
///                  an auxiliary step, then aggregate the auxiliary tables.
///   ModelAverage - broadcast meta into each personalized table, plain
///                  Q-learning, aggregate the personalized tables.
///   Independent  - plain Q-learning per task, no coupling.
///   Joint        - one shared union-key table trained on all tasks,
///                  interleaved round-robin.
TrainResult run_algorithm(const TaskFamily& family, const PersonalizationConfig& config,
                          Algorithm algorithm, Exec exec = Exec::Serial,
                          const MetricsSink& sink = nullptr,
                          const CheckpointFn& checkpoint = nullptr);

/// The personalized meta trainer (alternating optimization + aggregation).
TrainResult run_training(const TaskFamily& family, const PersonalizationConfig& config,
                         Exec exec = Exec::Serial, const MetricsSink& sink = nullptr,
                         const CheckpointFn& checkpoint = nullptr);

/// Per-task Q-learning with meta broadcast and Q-table averaging.
TrainResult train_model_average(const TaskFamily& family, const PersonalizationConfig& config,
                                Exec exec = Exec::Serial, const MetricsSink& sink = nullptr);

/// Uncoupled per-task Q-learning.
TrainResult train_independent(const TaskFamily& family, const PersonalizationConfig& config,
                              Exec exec = Exec::Serial, const MetricsSink& sink = nullptr);

/// A single shared table trained on all tasks' transitions.
TrainResult train_joint(const TaskFamily& family, const PersonalizationConfig& config,
                        Exec exec = Exec::Serial, const MetricsSink& sink = nullptr);

}  // namespace pmrl
