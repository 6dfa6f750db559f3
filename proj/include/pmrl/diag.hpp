#pragma once

#include <optional>
#include <vector>

#include "pmrl/backup.hpp"
#include "pmrl/qtable.hpp"
#include "pmrl/rng.hpp"
#include "pmrl/task.hpp"
#include "pmrl/trainer.hpp"

namespace pmrl {

/// Task-diversity bounds and the variance constants derived from them.
/// sigma2_sq is only defined for lambda^2 > 8.
struct DiversityConstants {
    std::vector<double> sigma1;   // per-task reward deviation bound
    std::vector<double> sigma2;   // per-task transition deviation bound
    double sigma_sq = 0.0;
    std::optional<double> sigma2_sq;
    double r_max = 0.0;
    double gamma = 0.0;
    double lambda = 0.0;
};

/// One evaluation of the personalized-vs-meta distance bound.
struct BoundReport {
    int round = 0;
    double lhs = 0.0;
    double rhs = 0.0;
    bool satisfied = false;
    double grad_norm_sq = 0.0;
    double delta_est = 0.0;
};

/// Gradient of the per-task objective at the meta table:
/// lambda * (Q_meta(s,a) - Q*(s,a)) with Q* the regularized fixed point of
/// the task against that meta slice. Requires lambda > 0.
QTable grad_task_objective(const QTable& meta_slice, const TabularTask& task, double lambda,
                           double tol = 1e-10, Exec exec = Exec::Serial);

/// Squared Euclidean norm of the task-averaged gradient, each task's
/// gradient embedded into union-key space with zeros on keys it lacks.
double grad_objective_norm_sq(const MetaQTable& meta, const TaskFamily& family, double lambda,
                              double tol = 1e-10, Exec exec = Exec::Serial);

/// Tightest deviation constants over the keys every task possesses, plus the
/// derived variance constants. Setting require_sigma2 throws BoundUndefined
/// when lambda^2 <= 8; otherwise sigma2_sq is simply left empty.
DiversityConstants diversity_constants(const TaskFamily& family, double lambda,
                                       bool require_sigma2 = false);

/// Empirical contraction factor of the regularized backup: max over random
/// table pairs of ||B^Q1 - B^Q2||_inf / ||Q1 - Q2||_inf. Entries are drawn
/// uniformly from [-r_max/(1-gamma), r_max/(1-gamma)].
double check_contraction(const TabularTask& task, const QTable& meta_slice, double lambda,
                         int n_trials, RngStream& rng, Exec exec = Exec::Serial);

/// Runs the exact-expectation iteration and the sampled iteration (M draws
/// per target) in lockstep against a fixed meta slice, sweeping every (s, a)
/// each step for R*K steps. Returns the per-step sup-norm discrepancy.
std::vector<double> sampled_gap_series(const TabularTask& task, const QTable& meta_slice,
                                       const PersonalizationConfig& config, RngStream& rng);

/// Max final-step gap over n_repeats independent sampled_gap_series runs.
double estimate_delta(const TabularTask& task, const QTable& meta_slice,
                      const PersonalizationConfig& config, RngStream& rng, int n_repeats);

/// Checks the distance bound: per-key mean of (personalized - meta)^2
/// averaged over tasks against 2*delta^2 + 2/(lambda^2-8)*||grad||^2 +
/// 2*sigma2^2/lambda^2. Requires lambda^2 > 8.
BoundReport distance_bound_check(const TrainingState& state, const TaskFamily& family,
                                 const PersonalizationConfig& config, double delta_est,
                                 double tol = 1e-10, Exec exec = Exec::Serial);

/// The bound's left-hand side alone (defined for every lambda).
double personalized_meta_distance(const TrainingState& state, const TaskFamily& family);

}  // namespace pmrl
