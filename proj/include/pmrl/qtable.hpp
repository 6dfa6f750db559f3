#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "pmrl/errors.hpp"
#include "pmrl/task.hpp"

namespace pmrl {

/// Dense per-task Q-values, laid out as n_states x n_actions.
class QTable {
  public:
    QTable() = default;
    QTable(int task_id, int n_states, int n_actions, double fill = 0.0)
        : task_id_(task_id),
          n_states_(n_states),
          n_actions_(n_actions),
          values_(static_cast<std::size_t>(n_states) * static_cast<std::size_t>(n_actions),
                  fill) {}

    static QTable zeros_like(const TabularTask& task) {
        return QTable(task.id(), task.n_states(), task.n_actions());
    }

    int task_id() const { return task_id_; }
    int n_states() const { return n_states_; }
    int n_actions() const { return n_actions_; }

    double operator()(int s, int a) const { return values_[index(s, a)]; }
    double& operator()(int s, int a) { return values_[index(s, a)]; }

    std::span<const double> values() const { return values_; }
    std::span<double> values() { return values_; }
    std::span<const double> row(int s) const {
        return std::span<const double>(values_).subspan(index(s, 0),
                                                        static_cast<std::size_t>(n_actions_));
    }

    double max_in_state(int s) const {
        auto r = row(s);
        double m = r[0];
        for (double v : r) m = std::max(m, v);
        return m;
    }

    bool matches(const TabularTask& task) const {
        return n_states_ == task.n_states() && n_actions_ == task.n_actions();
    }

    /// Finite-entries invariant; throws InvalidState on NaN or infinity.
    void validate() const {
        for (double v : values_)
            if (!std::isfinite(v)) throw InvalidState("non-finite Q-value");
    }

  private:
    std::size_t index(int s, int a) const {
        if (s < 0 || s >= n_states_ || a < 0 || a >= n_actions_)
            throw InvalidIndex("Q-table index out of range");
        return static_cast<std::size_t>(s) * static_cast<std::size_t>(n_actions_) +
               static_cast<std::size_t>(a);
    }

    int task_id_ = -1;
    int n_states_ = 0;
    int n_actions_ = 0;
    std::vector<double> values_;
};

/// Q-values over the union key space of a family, indexed by union key.
class MetaQTable {
  public:
    MetaQTable() = default;
    explicit MetaQTable(const TaskFamily& family)
        : values_(family.n_union_keys(), 0.0) {}

    std::size_t size() const { return values_.size(); }
    double operator[](std::size_t k) const { return values_[k]; }
    double& operator[](std::size_t k) { return values_[k]; }
    std::span<const double> values() const { return values_; }
    std::span<double> values() { return values_; }

    /// Extracts the dense per-task view of this table for task i.
    QTable slice(const TaskFamily& family, int i) const {
        const auto& task = family.task(i);
        QTable q = QTable::zeros_like(task);
        for (int s = 0; s < task.n_states(); ++s)
            for (int a = 0; a < task.n_actions(); ++a)
                q(s, a) = values_[family.union_index(i, s, a)];
        return q;
    }

    void validate() const {
        for (double v : values_)
            if (!std::isfinite(v)) throw InvalidState("non-finite meta Q-value");
    }

  private:
    std::vector<double> values_;
};

inline double sup_norm_diff(const QTable& a, const QTable& b) {
    double m = 0.0;
    auto va = a.values();
    auto vb = b.values();
    for (std::size_t i = 0; i < va.size(); ++i) m = std::max(m, std::abs(va[i] - vb[i]));
    return m;
}

}  // namespace pmrl
