#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "pmrl/backup.hpp"
#include "pmrl/policy.hpp"
#include "pmrl/qtable.hpp"
#include "pmrl/task.hpp"

namespace pmrl {

/// What one collection call gathers: whole episodes (capped at the explore
/// horizon) or single environment transitions from a persistent episode.
enum class CollectUnit { Episodes, Transitions };

/// Hyperparameters of the personalized training loop and its baselines.
///
/// The personalized step size follows eta_k = eta_personalized /
/// (1 + k * eta_decay) with k counting a task's TD steps from 1, so the
/// first (largest) step must satisfy eta_1 * (1 + lambda) <= 1. Exploration
/// epsilon anneals linearly from eps_start to eps_finish across rounds.
struct PersonalizationConfig {
    double lambda = 10.0;
    double eta_personalized = 1e-3;
    double eta_decay = 0.0;
    double eta_aux = 1e-3;
    double beta = 1.0;
    int rounds = 10;           // C
    int alternations = 3;      // R
    int steps_per_alt = 1;     // K
    int samples_per_step = 1;  // M
    CollectUnit collect = CollectUnit::Episodes;
    int explore_horizon = 50;
    PolicyKind explore_kind = PolicyKind::EpsilonGreedy;
    double eps_start = 0.3;
    double eps_finish = 0.01;
    double temperature = 1.0;
    int eval_episodes = 100;
    int eval_horizon = 50;
    std::uint64_t seed = 0;
    bool theory_diagnostics = false;
    int delta_repeats = 1;
    double fixed_point_tol = 1e-10;
    int checkpoint_every = 0;  // rounds; 0 disables

    friend bool operator==(const PersonalizationConfig&, const PersonalizationConfig&) = default;

    double eta_at(std::int64_t k) const {
        return eta_personalized / (1.0 + static_cast<double>(k) * eta_decay);
    }
    double max_eta() const { return eta_at(1); }

    /// Per-round exploration policy with the annealed epsilon.
    PolicySpec exploration_at(int round) const;

    void validate() const;
};

/// Meta table plus the per-task personalized and auxiliary tables.
struct TrainingState {
    MetaQTable meta;
    std::vector<QTable> personalized;
    std::vector<QTable> auxiliary;
    int round = 0;

    static TrainingState zeros(const TaskFamily& family);
    void validate(const TaskFamily& family) const;
};

/// One collected environment transition; next_states holds the M next-state
/// draws averaged in the TD target (a single observed draw during training).
struct Sample {
    int s = 0;
    int a = 0;
    double r = 0.0;
    std::vector<int> next_states;
};

/// The sampled personalized TD step. With target
/// T = r + gamma * mean_m max_a' Q(s'_m, a'), the (s, a) entry moves by
/// eta * (T - Q(s,a)) + eta * lambda * (Q_aux(s,a) - Q(s,a)); nothing else
/// changes. Requires eta * (1 + lambda) <= 1. Returns the new entry value.
double personalized_step_sampled(const TabularTask& task, QTable& pers, const QTable& aux,
                                 const Sample& sample, double eta, double lambda);

/// Same step with the exact next-state expectation from the transition table.
double personalized_step_exact(const TabularTask& task, QTable& pers, const QTable& aux, int s,
                               int a, double eta, double lambda);

/// Moves every auxiliary entry toward the personalized table:
/// Q_aux += eta_aux * lambda * (Q_pers - Q_aux). Requires eta_aux*lambda <= 1.
void auxiliary_step(QTable& aux, const QTable& pers, double eta_aux, double lambda);

/// Blends the meta table with the membership-indicator mean of the per-task
/// tables: meta(k) = (1-beta)*meta(k) + beta/N_k * sum over member tasks.
/// Member sums reduce in ascending task order.
void aggregate(MetaQTable& meta, std::span<const QTable> tables, const TaskFamily& family,
               double beta);

}  // namespace pmrl
