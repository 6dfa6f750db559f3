#pragma once

#include "pmrl/qtable.hpp"
#include "pmrl/rng.hpp"
#include "pmrl/task.hpp"

namespace pmrl {

enum class PolicyKind { Greedy, EpsilonGreedy, Boltzmann };

/// How actions are drawn from a Q-table.
struct PolicySpec {
    PolicyKind kind = PolicyKind::Greedy;
    double epsilon = 0.0;      // EpsilonGreedy only, in [0, 1]
    double temperature = 1.0;  // Boltzmann only, > 0

    static PolicySpec greedy() { return {}; }
    static PolicySpec epsilon_greedy(double eps) {
        return {PolicyKind::EpsilonGreedy, eps, 1.0};
    }
    static PolicySpec boltzmann(double temp) { return {PolicyKind::Boltzmann, 0.0, temp}; }

    void validate() const;
};

/// Greedy argmax over Q(s, .), ties broken by the lowest action index.
int greedy_action(const QTable& q, int s);

/// Draws an action at state s under the policy spec.
int select_action(const QTable& q, int s, const PolicySpec& spec, RngStream& rng);

struct ReturnEstimate {
    double mean = 0.0;
    double std_error = 0.0;  // population std over episodes / sqrt(n)
};

/// Rolls out n_episodes episodes (start from rho0, stop at the horizon or an
/// absorbing state) and reports the mean undiscounted return.
ReturnEstimate evaluate_return(const TabularTask& task, const QTable& q, const PolicySpec& spec,
                               int n_episodes, int horizon, RngStream& rng);

}  // namespace pmrl
