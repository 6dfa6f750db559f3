#pragma once

// Test-only oracles, kept independent of the library's solver path: plain
// value iteration over Q(s,a) and a brute-force episode return. These are
// the reference implementations unit and acceptance tests compare against.

#include <cmath>
#include <vector>

#include "pmrl/qtable.hpp"
#include "pmrl/task.hpp"

namespace pmrl::testing {

/// Straight Q-value iteration: Q <- R + gamma * P max_a' Q, iterated until
/// the sup change drops below tol. Independent of solve_fixed_point.
inline QTable value_iteration_oracle(const TabularTask& task, double tol = 1e-12,
                                     int max_iter = 1000000) {
    std::vector<double> q(static_cast<std::size_t>(task.n_entries()), 0.0);
    std::vector<double> next(q.size(), 0.0);
    for (int it = 0; it < max_iter; ++it) {
        double change = 0.0;
        for (int s = 0; s < task.n_states(); ++s) {
            for (int a = 0; a < task.n_actions(); ++a) {
                double exp_max = 0.0;
                for (const auto& e : task.transitions(s, a)) {
                    double best = q[static_cast<std::size_t>(e.next_state) *
                                    static_cast<std::size_t>(task.n_actions())];
                    for (int b = 1; b < task.n_actions(); ++b)
                        best = std::max(best, q[static_cast<std::size_t>(e.next_state) *
                                                    static_cast<std::size_t>(task.n_actions()) +
                                                static_cast<std::size_t>(b)]);
                    exp_max += e.prob * best;
                }
                const std::size_t idx = static_cast<std::size_t>(s) *
                                            static_cast<std::size_t>(task.n_actions()) +
                                        static_cast<std::size_t>(a);
                next[idx] = task.reward(s, a) + task.gamma() * exp_max;
                change = std::max(change, std::abs(next[idx] - q[idx]));
            }
        }
        std::swap(q, next);
        if (change <= tol) break;
    }
    QTable out = QTable::zeros_like(task);
    for (int s = 0; s < task.n_states(); ++s)
        for (int a = 0; a < task.n_actions(); ++a)
            out(s, a) = q[static_cast<std::size_t>(s) * static_cast<std::size_t>(task.n_actions()) +
                          static_cast<std::size_t>(a)];
    return out;
}

/// Exact greedy return from one start state on a deterministic task.
inline double deterministic_greedy_return(const TabularTask& task, const QTable& q, int start,
                                          int horizon) {
    int s = start;
    double ret = 0.0;
    for (int t = 0; t < horizon && !task.is_terminal(s); ++t) {
        auto row = q.row(s);
        int best = 0;
        for (int a = 1; a < task.n_actions(); ++a)
            if (row[static_cast<std::size_t>(a)] > row[static_cast<std::size_t>(best)]) best = a;
        ret += task.reward(s, best);
        s = task.transitions(s, best).front().next_state;
    }
    return ret;
}

}  // namespace pmrl::testing
