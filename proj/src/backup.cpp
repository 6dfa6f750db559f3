#include "pmrl/backup.hpp"

#include <cmath>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace pmrl {

double bellman_backup(const TabularTask& task, const QTable& q, int s, int a) {
    if (!q.matches(task)) throw InvalidState("Q-table does not match the task");
    double expected_max = 0.0;
    for (const auto& e : task.transitions(s, a))
        expected_max += e.prob * q.max_in_state(e.next_state);
    return task.reward(s, a) + task.gamma() * expected_max;
}

double regularized_backup(const TabularTask& task, const QTable& q, const QTable& meta_slice,
                          double lambda, int s, int a) {
    if (lambda < 0.0) throw InvalidParameter("lambda must be nonnegative");
    return lambda / (1.0 + lambda) * meta_slice(s, a) +
           1.0 / (1.0 + lambda) * bellman_backup(task, q, s, a);
}

namespace {

void sweep_range(const TabularTask& task, const QTable& q, const QTable& meta_slice,
                 double lambda, QTable& out, int s_begin, int s_end) {
    const double w_meta = lambda / (1.0 + lambda);
    const double w_bellman = 1.0 / (1.0 + lambda);
    const double gamma = task.gamma();
    for (int s = s_begin; s < s_end; ++s) {
        for (int a = 0; a < task.n_actions(); ++a) {
            double expected_max = 0.0;
            for (const auto& e : task.transitions(s, a))
                expected_max += e.prob * q.max_in_state(e.next_state);
            out(s, a) = w_meta * meta_slice(s, a) +
                        w_bellman * (task.reward(s, a) + gamma * expected_max);
        }
    }
}

}  // namespace

void regularized_sweep(const TabularTask& task, const QTable& q, const QTable& meta_slice,
                       double lambda, QTable& out, Exec exec) {
    if (lambda < 0.0) throw InvalidParameter("lambda must be nonnegative");
    if (!q.matches(task) || !out.matches(task) || !meta_slice.matches(task))
        throw InvalidState("table shape mismatch in sweep");
    if (exec == Exec::OpenMP) {
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
        for (int s = 0; s < task.n_states(); ++s)
            sweep_range(task, q, meta_slice, lambda, out, s, s + 1);
        return;
#endif
    }
    sweep_range(task, q, meta_slice, lambda, out, 0, task.n_states());
}

FixedPointResult solve_fixed_point(const TabularTask& task, const QTable& meta_slice,
                                   double lambda, double tol, int max_iter, Exec exec,
                                   const QTable* init) {
    if (tol <= 0.0) throw InvalidParameter("tolerance must be positive");
    if (lambda < 0.0) throw InvalidParameter("lambda must be nonnegative");

    QTable cur = init ? *init : QTable::zeros_like(task);
    QTable next = QTable::zeros_like(task);
    for (int it = 1; it <= max_iter; ++it) {
        regularized_sweep(task, cur, meta_slice, lambda, next, exec);
        const double residual = sup_norm_diff(cur, next);
        std::swap(cur, next);
        if (residual <= tol) return {std::move(cur), it, residual};
    }
    throw NonConvergence("regularized fixed point did not reach tolerance " +
                         std::to_string(tol) + " in " + std::to_string(max_iter) +
                         " iterations");
}

}  // namespace pmrl
