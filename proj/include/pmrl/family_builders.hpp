#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "pmrl/task.hpp"

namespace pmrl {

/// Builds one gridworld task per side length. States are cells (x, y) keyed
/// by their coordinates (small grids embed in larger ones at the origin
/// corner); 4 actions (up/down/left/right); moves off the grid leave the
/// state unchanged. A seeded generator places one landmark per task; the
/// landmark cell is absorbing with reward 0 and every other step pays the
/// negative Manhattan distance of the destination to the landmark,
/// normalized by the task's maximum distance, so rewards lie in [-1, 0].
TaskFamily make_gridworld_family(const std::vector<int>& sizes, std::uint64_t seed,
                                 double gamma = 0.99);

/// Builds one mountain-car task per track inclination. The continuous
/// dynamics v' = v + (a-1)*0.001 - 0.0025*cos(incline*p), p' = p + v' are
/// discretized on a (position-bins x velocity-bins) grid by mapping each bin
/// center through the dynamics and assigning full mass to the destination
/// bin. Positions live in [-1.2, 0.6], velocities in [-0.07, 0.07], both
/// clipped; 3 actions (push left, none, push right); reward -1 per step;
/// bins whose center position reaches 0.5 are absorbing with reward 0.
TaskFamily make_mountaincar_family(const std::vector<double>& inclines,
                                   std::pair<int, int> bins, double gamma = 0.99);

/// Builds single-state bandit tasks, one per reward vector: arm a of task i
/// pays arm_rewards[i][a] deterministically and self-loops. All tasks share
/// the one state key, so the union key space is the arm set.
TaskFamily make_bandit_family(const std::vector<std::vector<double>>& arm_rewards,
                              double gamma = 0.0);

/// Generates a random task for test and diagnostic use: uniformly random
/// rewards in [-r_max, r_max], dense random transition rows, no terminal
/// states. Keys are (state index, task id) so distinct tasks never alias.
TabularTask make_random_task(int id, int n_states, int n_actions, double gamma, double r_max,
                             RngStream& rng);

/// A family of random tasks over a shared key space (state index, 0), all
/// with identical shapes, independently random tables.
TaskFamily make_random_family(int n_tasks, int n_states, int n_actions, double gamma,
                              double r_max, std::uint64_t seed);

}  // namespace pmrl
