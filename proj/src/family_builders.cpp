#include "pmrl/family_builders.hpp"

#include <algorithm>
#include <cmath>

namespace pmrl {

namespace {

int manhattan(StateKey a, StateKey b) { return std::abs(a.x - b.x) + std::abs(a.y - b.y); }

TabularTask build_gridworld_task(int id, int size, StateKey landmark, double gamma) {
    const int n_states = size * size;
    std::vector<StateKey> keys(static_cast<std::size_t>(n_states));
    for (int y = 0; y < size; ++y)
        for (int x = 0; x < size; ++x)
            keys[static_cast<std::size_t>(y * size + x)] = StateKey{x, y};

    TabularTask task(id, n_states, 4, gamma, 1.0, std::move(keys));

    int d_max = 0;
    for (int s = 0; s < n_states; ++s)
        d_max = std::max(d_max, manhattan(task.key_of(s), landmark));

    const int landmark_state = landmark.y * size + landmark.x;
    task.set_terminal(landmark_state, true);

    // Action order: up, down, left, right. Off-grid moves stay in place.
    constexpr int dx[4] = {0, 0, -1, 1};
    constexpr int dy[4] = {-1, 1, 0, 0};
    for (int s = 0; s < n_states; ++s) {
        const StateKey cell = task.key_of(s);
        for (int a = 0; a < 4; ++a) {
            if (s == landmark_state) {
                task.set_transitions(s, a, {{s, 1.0}});
                task.set_reward(s, a, 0.0);
                continue;
            }
            int nx = cell.x + dx[a];
            int ny = cell.y + dy[a];
            if (nx < 0 || nx >= size || ny < 0 || ny >= size) {
                nx = cell.x;
                ny = cell.y;
            }
            const int dest = ny * size + nx;
            task.set_transitions(s, a, {{dest, 1.0}});
            task.set_reward(s, a, -static_cast<double>(manhattan(StateKey{nx, ny}, landmark)) /
                                      static_cast<double>(d_max));
        }
    }
    return task;
}

}  // namespace

TaskFamily make_gridworld_family(const std::vector<int>& sizes, std::uint64_t seed,
                                 double gamma) {
    if (sizes.empty()) throw InvalidTaskParameter("gridworld family needs at least one size");
    std::vector<TabularTask> tasks;
    tasks.reserve(sizes.size());
    for (std::size_t i = 0; i < sizes.size(); ++i) {
        const int size = sizes[i];
        if (size < 2) throw InvalidTaskParameter("gridworld side length must be at least 2");
        RngStream rng = RngStream::child(seed, {0x67726964ULL, i});
        // Landmarks live on the border, so interior dynamics are identical
        // across tasks and only the goals differ.
        std::vector<StateKey> border;
        for (int y = 0; y < size; ++y)
            for (int x = 0; x < size; ++x)
                if (x == 0 || y == 0 || x == size - 1 || y == size - 1)
                    border.push_back(StateKey{x, y});
        const StateKey landmark = border[static_cast<std::size_t>(
            rng.uniform_int(static_cast<int>(border.size())))];
        tasks.push_back(build_gridworld_task(static_cast<int>(i), size, landmark, gamma));
    }
    return TaskFamily(std::move(tasks));
}

namespace {

constexpr double kForce = 0.001;
constexpr double kGravity = 0.0025;
constexpr double kPosMin = -1.2;
constexpr double kPosMax = 0.6;
constexpr double kVelMin = -0.07;
constexpr double kVelMax = 0.07;
constexpr double kGoalPos = 0.5;

double clip(double v, double lo, double hi) { return std::min(std::max(v, lo), hi); }

int bin_of(double v, double lo, double hi, int n) {
    const double w = (hi - lo) / n;
    int b = static_cast<int>(std::floor((v - lo) / w));
    return std::clamp(b, 0, n - 1);
}

}  // namespace

TaskFamily make_mountaincar_family(const std::vector<double>& inclines,
                                   std::pair<int, int> bins, double gamma) {
    if (inclines.empty())
        throw InvalidTaskParameter("mountain-car family needs at least one incline");
    const auto [np, nv] = bins;
    if (np < 2 || nv < 2) throw InvalidTaskParameter("mountain-car needs at least 2 bins per axis");

    const double dp = (kPosMax - kPosMin) / np;
    const double dv = (kVelMax - kVelMin) / nv;
    const int n_states = np * nv;

    std::vector<TabularTask> tasks;
    tasks.reserve(inclines.size());
    for (std::size_t i = 0; i < inclines.size(); ++i) {
        const double zeta = inclines[i];
        std::vector<StateKey> keys(static_cast<std::size_t>(n_states));
        for (int pb = 0; pb < np; ++pb)
            for (int vb = 0; vb < nv; ++vb)
                keys[static_cast<std::size_t>(pb * nv + vb)] = StateKey{pb, vb};
        TabularTask task(static_cast<int>(i), n_states, 3, gamma, 1.0, std::move(keys));

        for (int pb = 0; pb < np; ++pb) {
            const double p = kPosMin + (pb + 0.5) * dp;
            for (int vb = 0; vb < nv; ++vb) {
                const double v = kVelMin + (vb + 0.5) * dv;
                const int s = pb * nv + vb;
                if (p >= kGoalPos) {
                    task.set_terminal(s, true);
                    for (int a = 0; a < 3; ++a) {
                        task.set_transitions(s, a, {{s, 1.0}});
                        task.set_reward(s, a, 0.0);
                    }
                    continue;
                }
                for (int a = 0; a < 3; ++a) {
                    const double v2 = clip(v + (a - 1) * kForce - kGravity * std::cos(zeta * p),
                                           kVelMin, kVelMax);
                    const double p2 = clip(p + v2, kPosMin, kPosMax);
                    const int dest = bin_of(p2, kPosMin, kPosMax, np) * nv +
                                     bin_of(v2, kVelMin, kVelMax, nv);
                    task.set_transitions(s, a, {{dest, 1.0}});
                    task.set_reward(s, a, -1.0);
                }
            }
        }

        // Exploring starts: uniform over non-goal bins. A point start at the
        // valley bottom leaves the goal unreachable by epsilon-greedy
        // exploration at tabular scale.
        std::vector<double> rho0(static_cast<std::size_t>(n_states), 0.0);
        int live = 0;
        for (int s = 0; s < n_states; ++s)
            if (!task.is_terminal(s)) ++live;
        for (int s = 0; s < n_states; ++s)
            if (!task.is_terminal(s)) rho0[static_cast<std::size_t>(s)] = 1.0 / live;
        task.set_rho0(std::move(rho0));

        tasks.push_back(std::move(task));
    }
    return TaskFamily(std::move(tasks));
}

TaskFamily make_bandit_family(const std::vector<std::vector<double>>& arm_rewards, double gamma) {
    if (arm_rewards.empty()) throw InvalidTaskParameter("bandit family needs at least one task");
    std::vector<TabularTask> tasks;
    tasks.reserve(arm_rewards.size());
    for (std::size_t i = 0; i < arm_rewards.size(); ++i) {
        const auto& arms = arm_rewards[i];
        if (arms.empty()) throw InvalidTaskParameter("bandit task needs at least one arm");
        double r_max = 0.0;
        for (double r : arms) r_max = std::max(r_max, std::abs(r));
        TabularTask task(static_cast<int>(i), 1, static_cast<int>(arms.size()), gamma, r_max,
                         {StateKey{0, 0}});
        for (std::size_t a = 0; a < arms.size(); ++a) {
            task.set_transitions(0, static_cast<int>(a), {{0, 1.0}});
            task.set_reward(0, static_cast<int>(a), arms[a]);
        }
        tasks.push_back(std::move(task));
    }
    return TaskFamily(std::move(tasks));
}

TabularTask make_random_task(int id, int n_states, int n_actions, double gamma, double r_max,
                             RngStream& rng) {
    std::vector<StateKey> keys(static_cast<std::size_t>(n_states));
    for (int s = 0; s < n_states; ++s) keys[static_cast<std::size_t>(s)] = StateKey{s, 0};
    TabularTask task(id, n_states, n_actions, gamma, r_max, std::move(keys));
    std::vector<TransitionEntry> row(static_cast<std::size_t>(n_states));
    for (int s = 0; s < n_states; ++s) {
        for (int a = 0; a < n_actions; ++a) {
            double sum = 0.0;
            for (int t = 0; t < n_states; ++t) {
                row[static_cast<std::size_t>(t)] = {t, rng.uniform01() + 1e-3};
                sum += row[static_cast<std::size_t>(t)].prob;
            }
            for (auto& e : row) e.prob /= sum;
            task.set_transitions(s, a, row);
            task.set_reward(s, a, rng.uniform(-r_max, r_max));
        }
    }
    return task;
}

TaskFamily make_random_family(int n_tasks, int n_states, int n_actions, double gamma,
                              double r_max, std::uint64_t seed) {
    std::vector<TabularTask> tasks;
    tasks.reserve(static_cast<std::size_t>(n_tasks));
    for (int i = 0; i < n_tasks; ++i) {
        RngStream rng = RngStream::child(seed, {0x726e64ULL, static_cast<std::uint64_t>(i)});
        tasks.push_back(make_random_task(i, n_states, n_actions, gamma, r_max, rng));
    }
    return TaskFamily(std::move(tasks));
}

}  // namespace pmrl
