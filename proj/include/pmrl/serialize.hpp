#pragma once

#include <iosfwd>
#include <string>

#include "pmrl/qtable.hpp"
#include "pmrl/task.hpp"
#include "pmrl/trainer.hpp"

namespace pmrl {

// Plain-text tabular serialization. Values are printed with %.17g so writes
// and reads round-trip doubles exactly; equal inputs produce byte-identical
// files. The task format is one `row` line per (s, a):
//
//   pmrl-task 1
//   id 0 states 9 actions 4 gamma 0.99 rmax 1
//   keys (0,0) (1,0) ...            one per state, index order
//   terminal 4 ...                  indices of absorbing states
//   rho0 0:0.111 ...                nonzero initial mass
//   row (x,y)/a reward (x',y'):p ...
//   end

void write_task(std::ostream& out, const TabularTask& task);
TabularTask read_task(std::istream& in);

void write_family(std::ostream& out, const TaskFamily& family);
TaskFamily read_family(std::istream& in);

/// Q-tables serialize against their task so entries carry state keys.
void write_qtable(std::ostream& out, const TabularTask& task, const QTable& q);
QTable read_qtable(std::istream& in, const TabularTask& task);

void write_meta(std::ostream& out, const TaskFamily& family, const MetaQTable& meta);
MetaQTable read_meta(std::istream& in, const TaskFamily& family);

/// Full training-state checkpoint (meta plus per-task tables).
void write_checkpoint(std::ostream& out, const TaskFamily& family, const TrainingState& state);
TrainingState read_checkpoint(std::istream& in, const TaskFamily& family);

std::string to_string(const TabularTask& task);
std::string to_string(const TaskFamily& family);
std::string to_string(const TabularTask& task, const QTable& q);

}  // namespace pmrl
