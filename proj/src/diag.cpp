#include "pmrl/diag.hpp"

#include <cmath>
#include <map>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace pmrl {

QTable grad_task_objective(const QTable& meta_slice, const TabularTask& task, double lambda,
                           double tol, Exec exec) {
    if (lambda <= 0.0) throw InvalidParameter("gradient requires lambda > 0");
    const QTable fixed = solve_fixed_point(task, meta_slice, lambda, tol, 200000, exec).q;
    QTable grad = QTable::zeros_like(task);
    auto g = grad.values();
    auto m = meta_slice.values();
    auto f = fixed.values();
    for (std::size_t i = 0; i < g.size(); ++i) g[i] = lambda * (m[i] - f[i]);
    return grad;
}

double grad_objective_norm_sq(const MetaQTable& meta, const TaskFamily& family, double lambda,
                              double tol, Exec exec) {
    if (lambda <= 0.0) throw InvalidParameter("gradient requires lambda > 0");
    const int n = family.n_tasks();
    std::vector<QTable> grads(static_cast<std::size_t>(n));
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic) if (exec == Exec::OpenMP)
#endif
    for (int i = 0; i < n; ++i) {
        grads[static_cast<std::size_t>(i)] =
            grad_task_objective(meta.slice(family, i), family.task(i), lambda, tol, Exec::Serial);
    }
    double norm_sq = 0.0;
    for (std::size_t k = 0; k < family.n_union_keys(); ++k) {
        double sum = 0.0;
        for (int i = 0; i < n; ++i) {
            const int flat = family.membership(i, k);
            if (flat >= 0)
                sum += grads[static_cast<std::size_t>(i)].values()[static_cast<std::size_t>(flat)];
        }
        const double mean = sum / static_cast<double>(n);
        norm_sq += mean * mean;
    }
    return norm_sq;
}

DiversityConstants diversity_constants(const TaskFamily& family, double lambda,
                                       bool require_sigma2) {
    const int n = family.n_tasks();
    DiversityConstants out;
    out.lambda = lambda;
    out.gamma = family.shared_gamma();
    out.r_max = family.max_r_max();
    out.sigma1.assign(static_cast<std::size_t>(n), 0.0);
    out.sigma2.assign(static_cast<std::size_t>(n), 0.0);

    for (std::size_t k = 0; k < family.n_union_keys(); ++k) {
        if (family.key_multiplicity(k) != n) continue;  // intersection keys only

        double mean_reward = 0.0;
        std::map<StateKey, double> mean_next;  // key -> mean transition mass
        for (int i = 0; i < n; ++i) {
            const auto& task = family.task(i);
            const int flat = family.membership(i, k);
            const int s = flat / task.n_actions();
            const int a = flat % task.n_actions();
            mean_reward += task.reward(s, a);
            for (const auto& e : task.transitions(s, a))
                mean_next[task.key_of(e.next_state)] += e.prob;
        }
        mean_reward /= n;
        for (auto& [key, mass] : mean_next) mass /= n;

        for (int i = 0; i < n; ++i) {
            const auto& task = family.task(i);
            const int flat = family.membership(i, k);
            const int s = flat / task.n_actions();
            const int a = flat % task.n_actions();
            out.sigma1[static_cast<std::size_t>(i)] =
                std::max(out.sigma1[static_cast<std::size_t>(i)],
                         std::abs(task.reward(s, a) - mean_reward));
            std::map<StateKey, double> own;
            for (const auto& e : task.transitions(s, a)) own[task.key_of(e.next_state)] += e.prob;
            for (const auto& [key, mean_mass] : mean_next) {
                const auto it = own.find(key);
                const double own_mass = it == own.end() ? 0.0 : it->second;
                out.sigma2[static_cast<std::size_t>(i)] =
                    std::max(out.sigma2[static_cast<std::size_t>(i)],
                             std::abs(own_mass - mean_mass));
            }
        }
    }

    const double horizon_fac = out.gamma * out.r_max / (1.0 - out.gamma);
    double acc = 0.0;
    for (int i = 0; i < n; ++i) {
        const double v = out.sigma1[static_cast<std::size_t>(i)] +
                         out.sigma2[static_cast<std::size_t>(i)] * horizon_fac;
        acc += v * v;
    }
    out.sigma_sq = acc / n;

    const double lam_sq = lambda * lambda;
    if (lam_sq > 8.0) {
        out.sigma2_sq = 2.0 * lam_sq * out.sigma_sq / (lam_sq - 8.0) +
                        2.0 * lam_sq * out.gamma * out.r_max / ((lam_sq - 8.0) * (1.0 - out.gamma));
    } else if (require_sigma2) {
        throw BoundUndefined("sigma2^2 requires lambda^2 > 8");
    }
    return out;
}

double check_contraction(const TabularTask& task, const QTable& meta_slice, double lambda,
                         int n_trials, RngStream& rng, Exec exec) {
    if (n_trials < 1) throw InvalidParameter("contraction check needs at least one trial");
    const double bound = task.r_max() / (1.0 - task.gamma());
    QTable q1 = QTable::zeros_like(task);
    QTable q2 = QTable::zeros_like(task);
    QTable b1 = QTable::zeros_like(task);
    QTable b2 = QTable::zeros_like(task);
    double worst = 0.0;
    for (int t = 0; t < n_trials; ++t) {
        for (double& v : q1.values()) v = rng.uniform(-bound, bound);
        for (double& v : q2.values()) v = rng.uniform(-bound, bound);
        const double denom = sup_norm_diff(q1, q2);
        if (denom == 0.0) continue;
        regularized_sweep(task, q1, meta_slice, lambda, b1, exec);
        regularized_sweep(task, q2, meta_slice, lambda, b2, exec);
        worst = std::max(worst, sup_norm_diff(b1, b2) / denom);
    }
    return worst;
}

std::vector<double> sampled_gap_series(const TabularTask& task, const QTable& meta_slice,
                                       const PersonalizationConfig& config, RngStream& rng) {
    config.validate();
    const int steps = config.alternations * config.steps_per_alt;
    const int m_draws = config.samples_per_step;

    QTable exact = QTable::zeros_like(task);
    QTable sampled = QTable::zeros_like(task);
    QTable exact_next = QTable::zeros_like(task);
    QTable sampled_next = QTable::zeros_like(task);

    std::vector<double> gaps;
    gaps.reserve(static_cast<std::size_t>(steps));
    Sample sample;
    sample.next_states.resize(static_cast<std::size_t>(m_draws));
    for (int k = 1; k <= steps; ++k) {
        const double eta = config.eta_at(k);
        // Synchronous sweep: both iterates read their step-k tables.
        exact_next = exact;
        sampled_next = sampled;
        for (int s = 0; s < task.n_states(); ++s) {
            for (int a = 0; a < task.n_actions(); ++a) {
                double expected_max = 0.0;
                for (const auto& e : task.transitions(s, a))
                    expected_max += e.prob * exact.max_in_state(e.next_state);
                const double target_e = task.reward(s, a) + task.gamma() * expected_max;
                exact_next(s, a) += eta * (target_e - exact(s, a)) +
                                    eta * config.lambda * (meta_slice(s, a) - exact(s, a));

                double mean_max = 0.0;
                for (int m = 0; m < m_draws; ++m) {
                    auto row = task.transitions(s, a);
                    double u = rng.uniform01();
                    double accp = 0.0;
                    int next = row.back().next_state;
                    for (const auto& e : row) {
                        accp += e.prob;
                        if (u < accp) {
                            next = e.next_state;
                            break;
                        }
                    }
                    mean_max += sampled.max_in_state(next);
                }
                mean_max /= static_cast<double>(m_draws);
                const double target_s = task.reward(s, a) + task.gamma() * mean_max;
                sampled_next(s, a) += eta * (target_s - sampled(s, a)) +
                                      eta * config.lambda * (meta_slice(s, a) - sampled(s, a));
            }
        }
        std::swap(exact, exact_next);
        std::swap(sampled, sampled_next);
        gaps.push_back(sup_norm_diff(exact, sampled));
    }
    return gaps;
}

double estimate_delta(const TabularTask& task, const QTable& meta_slice,
                      const PersonalizationConfig& config, RngStream& rng, int n_repeats) {
    if (n_repeats < 1) throw InvalidParameter("delta estimation needs at least one repeat");
    double worst = 0.0;
    for (int rep = 0; rep < n_repeats; ++rep) {
        const auto gaps = sampled_gap_series(task, meta_slice, config, rng);
        worst = std::max(worst, gaps.back());
    }
    return worst;
}

double personalized_meta_distance(const TrainingState& state, const TaskFamily& family) {
    const int n = family.n_tasks();
    double acc = 0.0;
    for (int i = 0; i < n; ++i) {
        const auto& pers = state.personalized[static_cast<std::size_t>(i)];
        const auto& task = family.task(i);
        double task_acc = 0.0;
        for (int s = 0; s < task.n_states(); ++s)
            for (int a = 0; a < task.n_actions(); ++a) {
                const double d = pers(s, a) - state.meta[family.union_index(i, s, a)];
                task_acc += d * d;
            }
        acc += task_acc / static_cast<double>(task.n_entries());
    }
    return acc / static_cast<double>(n);
}

BoundReport distance_bound_check(const TrainingState& state, const TaskFamily& family,
                                 const PersonalizationConfig& config, double delta_est,
                                 double tol, Exec exec) {
    const double lam_sq = config.lambda * config.lambda;
    if (lam_sq <= 8.0) throw BoundUndefined("distance bound requires lambda^2 > 8");
    if (delta_est < 0.0) throw InvalidParameter("delta estimate must be nonnegative");
    state.validate(family);

    BoundReport report;
    report.round = state.round;
    report.delta_est = delta_est;
    report.lhs = personalized_meta_distance(state, family);
    report.grad_norm_sq = grad_objective_norm_sq(state.meta, family, config.lambda, tol, exec);
    const auto constants = diversity_constants(family, config.lambda, true);
    report.rhs = 2.0 * delta_est * delta_est + 2.0 / (lam_sq - 8.0) * report.grad_norm_sq +
                 2.0 * constants.sigma2_sq.value() / lam_sq;
    report.satisfied = report.lhs <= report.rhs;
    return report;
}

}  // namespace pmrl
