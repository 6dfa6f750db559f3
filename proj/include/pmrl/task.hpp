#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include "pmrl/errors.hpp"
#include "pmrl/rng.hpp"

namespace pmrl {

/// Canonical discrete coordinates identifying a state across tasks of a
/// family (grid cell, bin pair, ...). Two states in different tasks denote
/// the same union state iff their keys compare equal.
struct StateKey {
    std::int32_t x = 0;
    std::int32_t y = 0;

    friend bool operator==(const StateKey&, const StateKey&) = default;
    friend auto operator<=>(const StateKey&, const StateKey&) = default;
};

/// One (state-key, action) pair of the union key space.
struct UnionKey {
    StateKey state;
    std::int32_t action = 0;

    friend bool operator==(const UnionKey&, const UnionKey&) = default;
    friend auto operator<=>(const UnionKey&, const UnionKey&) = default;
};

/// One outcome of a categorical transition distribution.
struct TransitionEntry {
    int next_state;
    double prob;
};

/// A finite MDP with tabular transitions and rewards.
///
/// Transition rows are stored sparsely as (next state, probability) lists;
/// every row sums to one. `terminal` marks absorbing goal states where
/// episodes end. `keys[s]` gives the canonical coordinates of state s.
class TabularTask {
  public:
    TabularTask(int id, int n_states, int n_actions, double gamma, double r_max,
                std::vector<StateKey> keys);

    int id() const { return id_; }
    int n_states() const { return n_states_; }
    int n_actions() const { return n_actions_; }
    int n_entries() const { return n_states_ * n_actions_; }
    double gamma() const { return gamma_; }
    double r_max() const { return r_max_; }

    const StateKey& key_of(int s) const { return keys_[static_cast<std::size_t>(s)]; }
    bool is_terminal(int s) const { return terminal_[static_cast<std::size_t>(s)] != 0; }
    void set_terminal(int s, bool v) { terminal_[static_cast<std::size_t>(s)] = v ? 1 : 0; }

    void set_reward(int s, int a, double r);
    double reward(int s, int a) const { return rewards_[flat(s, a)]; }

    /// Replaces the transition row of (s, a). Probabilities must be
    /// nonnegative and sum to one within 1e-12; zero-mass entries are dropped.
    void set_transitions(int s, int a, std::vector<TransitionEntry> row);
    std::span<const TransitionEntry> transitions(int s, int a) const {
        return rows_[flat(s, a)];
    }

    void set_rho0(std::vector<double> dist);
    std::span<const double> rho0() const { return rho0_; }

    int sample_initial(RngStream& rng) const;

    /// Checks the row-normalization, reward-bound and discount invariants,
    /// throwing InvalidState on the first violation.
    void validate() const;

    std::size_t flat(int s, int a) const {
        check_index(s, a);
        return static_cast<std::size_t>(s) * static_cast<std::size_t>(n_actions_) +
               static_cast<std::size_t>(a);
    }

  private:
    void check_index(int s, int a) const {
        if (s < 0 || s >= n_states_ || a < 0 || a >= n_actions_)
            throw InvalidIndex("state/action out of range for task " + std::to_string(id_));
    }

    int id_;
    int n_states_;
    int n_actions_;
    double gamma_;
    double r_max_;
    std::vector<StateKey> keys_;
    std::vector<double> rewards_;
    std::vector<std::vector<TransitionEntry>> rows_;
    std::vector<std::uint8_t> terminal_;
    std::vector<double> rho0_;
};

/// Samples one environment step: next state from the stored transition row,
/// reward from the reward table.
std::pair<int, double> step(const TabularTask& task, int s, int a, RngStream& rng);

/// The stored categorical distribution of (s, a); zero-mass outcomes omitted.
std::vector<TransitionEntry> transition_dist(const TabularTask& task, int s, int a);

/// N tasks plus the canonical union key space they span.
///
/// `union_keys` enumerates every (state-key, action) pair appearing in any
/// member, sorted; `membership(i, k)` maps union index k to the flat (s, a)
/// index of task i, or -1 when task i lacks that key.
class TaskFamily {
  public:
    explicit TaskFamily(std::vector<TabularTask> tasks);

    int n_tasks() const { return static_cast<int>(tasks_.size()); }
    const TabularTask& task(int i) const { return tasks_[static_cast<std::size_t>(i)]; }
    const std::vector<TabularTask>& tasks() const { return tasks_; }

    std::size_t n_union_keys() const { return union_keys_.size(); }
    const std::vector<UnionKey>& union_keys() const { return union_keys_; }

    /// Flat (s, a) index of union key k in task i, or -1.
    int membership(int i, std::size_t k) const {
        return member_flat_[static_cast<std::size_t>(i)][k];
    }
    bool has_key(int i, std::size_t k) const { return membership(i, k) >= 0; }

    /// Union index of (s, a) of task i.
    std::size_t union_index(int i, int s, int a) const {
        return union_of_flat_[static_cast<std::size_t>(i)][tasks_[static_cast<std::size_t>(i)].flat(s, a)];
    }

    /// Number of member tasks possessing union key k (always >= 1).
    int key_multiplicity(std::size_t k) const { return multiplicity_[k]; }

    double max_r_max() const;
    double shared_gamma() const;

  private:
    std::vector<TabularTask> tasks_;
    std::vector<UnionKey> union_keys_;
    std::vector<std::vector<int>> member_flat_;        // [task][union index] -> flat or -1
    std::vector<std::vector<std::size_t>> union_of_flat_;  // [task][flat] -> union index
    std::vector<int> multiplicity_;
};

}  // namespace pmrl
