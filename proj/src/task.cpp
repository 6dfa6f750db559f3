#include "pmrl/task.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace pmrl {

namespace {
constexpr double kRowSumTol = 1e-12;
}

TabularTask::TabularTask(int id, int n_states, int n_actions, double gamma, double r_max,
                         std::vector<StateKey> keys)
    : id_(id),
      n_states_(n_states),
      n_actions_(n_actions),
      gamma_(gamma),
      r_max_(r_max),
      keys_(std::move(keys)) {
    if (n_states_ <= 0 || n_actions_ <= 0)
        throw InvalidTaskParameter("task needs at least one state and one action");
    if (!(gamma_ >= 0.0 && gamma_ < 1.0))
        throw InvalidTaskParameter("discount must lie in [0,1)");
    if (r_max_ < 0.0) throw InvalidTaskParameter("reward bound must be nonnegative");
    if (keys_.size() != static_cast<std::size_t>(n_states_))
        throw InvalidTaskParameter("one state key required per state");
    rewards_.assign(static_cast<std::size_t>(n_entries()), 0.0);
    rows_.resize(static_cast<std::size_t>(n_entries()));
    terminal_.assign(static_cast<std::size_t>(n_states_), 0);
    rho0_.assign(static_cast<std::size_t>(n_states_), 1.0 / n_states_);
}

void TabularTask::set_reward(int s, int a, double r) {
    if (std::abs(r) > r_max_ + kRowSumTol)
        throw InvalidTaskParameter("reward exceeds the declared bound");
    rewards_[flat(s, a)] = r;
}

void TabularTask::set_transitions(int s, int a, std::vector<TransitionEntry> row) {
    double sum = 0.0;
    std::vector<TransitionEntry> kept;
    kept.reserve(row.size());
    for (const auto& e : row) {
        if (e.next_state < 0 || e.next_state >= n_states_)
            throw InvalidIndex("transition target out of range");
        if (e.prob < 0.0) throw InvalidTaskParameter("negative transition mass");
        sum += e.prob;
        if (e.prob > 0.0) kept.push_back(e);
    }
    if (std::abs(sum - 1.0) > kRowSumTol)
        throw InvalidTaskParameter("transition row does not sum to one");
    rows_[flat(s, a)] = std::move(kept);
}

void TabularTask::set_rho0(std::vector<double> dist) {
    if (dist.size() != static_cast<std::size_t>(n_states_))
        throw InvalidTaskParameter("initial distribution size mismatch");
    double sum = 0.0;
    for (double p : dist) {
        if (p < 0.0) throw InvalidTaskParameter("negative initial mass");
        sum += p;
    }
    if (std::abs(sum - 1.0) > kRowSumTol)
        throw InvalidTaskParameter("initial distribution does not sum to one");
    rho0_ = std::move(dist);
}

int TabularTask::sample_initial(RngStream& rng) const { return rng.sample_categorical(rho0_); }

void TabularTask::validate() const {
    for (int s = 0; s < n_states_; ++s) {
        for (int a = 0; a < n_actions_; ++a) {
            const auto& row = rows_[flat(s, a)];
            if (row.empty()) throw InvalidState("missing transition row");
            double sum = 0.0;
            for (const auto& e : row) {
                if (e.prob < 0.0) throw InvalidState("negative transition mass");
                sum += e.prob;
            }
            if (std::abs(sum - 1.0) > kRowSumTol) throw InvalidState("transition row sum != 1");
            if (std::abs(rewards_[flat(s, a)]) > r_max_ + kRowSumTol)
                throw InvalidState("reward outside the declared bound");
        }
    }
}

std::pair<int, double> step(const TabularTask& task, int s, int a, RngStream& rng) {
    auto row = task.transitions(s, a);
    double u = rng.uniform01();
    double acc = 0.0;
    int next = row.back().next_state;
    for (const auto& e : row) {
        acc += e.prob;
        if (u < acc) {
            next = e.next_state;
            break;
        }
    }
    return {next, task.reward(s, a)};
}

std::vector<TransitionEntry> transition_dist(const TabularTask& task, int s, int a) {
    auto row = task.transitions(s, a);
    return {row.begin(), row.end()};
}

TaskFamily::TaskFamily(std::vector<TabularTask> tasks) : tasks_(std::move(tasks)) {
    if (tasks_.empty()) throw InvalidTaskParameter("family needs at least one task");
    for (const auto& t : tasks_) {
        t.validate();
        std::map<StateKey, int> seen;
        for (int s = 0; s < t.n_states(); ++s)
            if (!seen.emplace(t.key_of(s), s).second)
                throw InvalidState("duplicate state key within task " + std::to_string(t.id()));
    }

    std::map<UnionKey, int> index_of;
    for (const auto& t : tasks_) {
        for (int s = 0; s < t.n_states(); ++s)
            for (int a = 0; a < t.n_actions(); ++a)
                index_of.emplace(UnionKey{t.key_of(s), a}, 0);
    }
    union_keys_.reserve(index_of.size());
    for (auto& [key, idx] : index_of) {
        idx = static_cast<int>(union_keys_.size());
        union_keys_.push_back(key);
    }

    member_flat_.assign(tasks_.size(), std::vector<int>(union_keys_.size(), -1));
    union_of_flat_.resize(tasks_.size());
    multiplicity_.assign(union_keys_.size(), 0);
    for (std::size_t i = 0; i < tasks_.size(); ++i) {
        const auto& t = tasks_[i];
        union_of_flat_[i].assign(static_cast<std::size_t>(t.n_entries()), 0);
        for (int s = 0; s < t.n_states(); ++s) {
            for (int a = 0; a < t.n_actions(); ++a) {
                auto it = index_of.find(UnionKey{t.key_of(s), a});
                std::size_t k = static_cast<std::size_t>(it->second);
                member_flat_[i][k] = static_cast<int>(t.flat(s, a));
                union_of_flat_[i][t.flat(s, a)] = k;
                ++multiplicity_[k];
            }
        }
    }
}

double TaskFamily::max_r_max() const {
    double m = 0.0;
    for (const auto& t : tasks_) m = std::max(m, t.r_max());
    return m;
}

double TaskFamily::shared_gamma() const {
    double g = tasks_.front().gamma();
    for (const auto& t : tasks_)
        if (t.gamma() != g) throw InvalidState("family tasks disagree on the discount");
    return g;
}

}  // namespace pmrl
