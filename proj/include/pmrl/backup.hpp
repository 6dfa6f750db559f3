#pragma once

#include "pmrl/qtable.hpp"
#include "pmrl/task.hpp"

namespace pmrl {

/// Execution mode for whole-table kernels. Serial is the reference
/// implementation; OpenMP parallelizes over states and produces bit-identical
/// results (entries are independent, no reductions).
enum class Exec { Serial, OpenMP };

/// One Bellman optimality backup:
/// R(s,a) + gamma * sum_s' P(s'|s,a) * max_a' Q(s',a').
double bellman_backup(const TabularTask& task, const QTable& q, int s, int a);

/// The regularized backup blending the meta value with the Bellman backup:
/// lambda/(1+lambda) * meta(s,a) + 1/(1+lambda) * bellman_backup(s,a).
double regularized_backup(const TabularTask& task, const QTable& q, const QTable& meta_slice,
                          double lambda, int s, int a);

/// Applies the regularized backup to every (s, a) of `q` into `out`
/// (synchronous sweep). `out` must not alias `q`.
void regularized_sweep(const TabularTask& task, const QTable& q, const QTable& meta_slice,
                       double lambda, QTable& out, Exec exec = Exec::Serial);

struct FixedPointResult {
    QTable q;
    int iterations = 0;
    double residual = 0.0;
};

/// Iterates the regularized backup to its fixed point Q* with
/// ||B^Q* - Q*||_inf <= tol. The operator contracts at gamma/(1+lambda), so
/// failure to converge within max_iter signals a bug and throws.
FixedPointResult solve_fixed_point(const TabularTask& task, const QTable& meta_slice,
                                   double lambda, double tol = 1e-10, int max_iter = 200000,
                                   Exec exec = Exec::Serial, const QTable* init = nullptr);

}  // namespace pmrl
