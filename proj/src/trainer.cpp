#include "pmrl/trainer.hpp"

#include <cmath>

namespace pmrl {

namespace {
constexpr double kStepTol = 1e-12;

// Shared TD update expression so every trainer (including the lambda = 0
// baselines) follows the identical floating-point path.
inline double td_update(double q, double target, double eta, double lambda, double aux) {
    return q + eta * (target - q) + eta * lambda * (aux - q);
}

void check_step_size(double eta, double lambda) {
    if (lambda < 0.0) throw InvalidParameter("lambda must be nonnegative");
    if (eta < 0.0 || eta * (1.0 + lambda) > 1.0 + kStepTol)
        throw InvalidParameter("personalized step size must satisfy eta*(1+lambda) <= 1");
}

}  // namespace

PolicySpec PersonalizationConfig::exploration_at(int round) const {
    switch (explore_kind) {
        case PolicyKind::Greedy:
            return PolicySpec::greedy();
        case PolicyKind::Boltzmann:
            return PolicySpec::boltzmann(temperature);
        case PolicyKind::EpsilonGreedy: {
            double frac = rounds > 1 ? static_cast<double>(round - 1) / (rounds - 1) : 0.0;
            return PolicySpec::epsilon_greedy(eps_start + (eps_finish - eps_start) * frac);
        }
    }
    throw InvalidParameter("unknown exploration kind");
}

void PersonalizationConfig::validate() const {
    if (lambda < 0.0) throw InvalidParameter("lambda must be nonnegative");
    check_step_size(max_eta(), lambda);
    if (eta_aux < 0.0 || eta_aux * lambda > 1.0 + kStepTol)
        throw InvalidParameter("auxiliary step must satisfy eta_aux*lambda <= 1");
    if (beta < 0.0 || beta > 1.0) throw InvalidParameter("beta must lie in [0,1]");
    if (rounds < 0) throw InvalidParameter("rounds must be nonnegative");
    if (alternations < 1 || steps_per_alt < 1 || samples_per_step < 1)
        throw InvalidParameter("R, K and M must be at least 1");
    if (explore_horizon < 1 || eval_horizon < 1 || eval_episodes < 1)
        throw InvalidParameter("horizons and evaluation episodes must be at least 1");
    if (eta_decay < 0.0) throw InvalidParameter("eta decay must be nonnegative");
    if (eps_start < 0.0 || eps_start > 1.0 || eps_finish < 0.0 || eps_finish > 1.0)
        throw InvalidParameter("epsilon schedule must lie in [0,1]");
    if (delta_repeats < 1) throw InvalidParameter("delta estimation needs at least one repeat");
    if (fixed_point_tol <= 0.0) throw InvalidParameter("fixed point tolerance must be positive");
    if (checkpoint_every < 0) throw InvalidParameter("checkpoint interval must be nonnegative");
}

TrainingState TrainingState::zeros(const TaskFamily& family) {
    TrainingState st;
    st.meta = MetaQTable(family);
    st.personalized.reserve(static_cast<std::size_t>(family.n_tasks()));
    st.auxiliary.reserve(static_cast<std::size_t>(family.n_tasks()));
    for (int i = 0; i < family.n_tasks(); ++i) {
        st.personalized.push_back(QTable::zeros_like(family.task(i)));
        st.auxiliary.push_back(QTable::zeros_like(family.task(i)));
    }
    return st;
}

void TrainingState::validate(const TaskFamily& family) const {
    if (personalized.size() != static_cast<std::size_t>(family.n_tasks()) ||
        auxiliary.size() != static_cast<std::size_t>(family.n_tasks()))
        throw InvalidState("training state table count mismatch");
    if (meta.size() != family.n_union_keys()) throw InvalidState("meta table size mismatch");
    for (int i = 0; i < family.n_tasks(); ++i) {
        if (!personalized[static_cast<std::size_t>(i)].matches(family.task(i)) ||
            !auxiliary[static_cast<std::size_t>(i)].matches(family.task(i)))
            throw InvalidState("training state table shape mismatch");
        personalized[static_cast<std::size_t>(i)].validate();
        auxiliary[static_cast<std::size_t>(i)].validate();
    }
    meta.validate();
}

double personalized_step_sampled(const TabularTask& task, QTable& pers, const QTable& aux,
                                 const Sample& sample, double eta, double lambda) {
    check_step_size(eta, lambda);
    if (sample.next_states.empty()) throw InvalidParameter("sample carries no next states");
    double mean_max = 0.0;
    for (int next : sample.next_states) mean_max += pers.max_in_state(next);
    mean_max /= static_cast<double>(sample.next_states.size());
    const double target = sample.r + task.gamma() * mean_max;
    double& q = pers(sample.s, sample.a);
    q = td_update(q, target, eta, lambda, aux(sample.s, sample.a));
    return q;
}

double personalized_step_exact(const TabularTask& task, QTable& pers, const QTable& aux, int s,
                               int a, double eta, double lambda) {
    check_step_size(eta, lambda);
    double expected_max = 0.0;
    for (const auto& e : task.transitions(s, a)) expected_max += e.prob * pers.max_in_state(e.next_state);
    const double target = task.reward(s, a) + task.gamma() * expected_max;
    double& q = pers(s, a);
    q = td_update(q, target, eta, lambda, aux(s, a));
    return q;
}

void auxiliary_step(QTable& aux, const QTable& pers, double eta_aux, double lambda) {
    if (lambda < 0.0) throw InvalidParameter("lambda must be nonnegative");
    if (eta_aux < 0.0 || eta_aux * lambda > 1.0 + kStepTol)
        throw InvalidParameter("auxiliary step must satisfy eta_aux*lambda <= 1");
    auto va = aux.values();
    auto vp = pers.values();
    if (va.size() != vp.size()) throw InvalidState("auxiliary/personalized shape mismatch");
    const double w = eta_aux * lambda;
    for (std::size_t i = 0; i < va.size(); ++i) va[i] += w * (vp[i] - va[i]);
}

void aggregate(MetaQTable& meta, std::span<const QTable> tables, const TaskFamily& family,
               double beta) {
    if (beta < 0.0 || beta > 1.0) throw InvalidParameter("beta must lie in [0,1]");
    if (meta.size() != family.n_union_keys() ||
        tables.size() != static_cast<std::size_t>(family.n_tasks()))
        throw InvalidState("aggregation dimension mismatch");
    for (std::size_t i = 0; i < tables.size(); ++i)
        if (!tables[i].matches(family.task(static_cast<int>(i))))
            throw InvalidState("aggregation table shape mismatch");

    const std::size_t n_keys = family.n_union_keys();
    for (std::size_t k = 0; k < n_keys; ++k) {
        // Mean anchored at the first member so equal tables aggregate to
        // exactly their common value.
        double anchor = 0.0;
        double delta_sum = 0.0;
        int count = 0;
        for (int i = 0; i < family.n_tasks(); ++i) {
            const int flat = family.membership(i, k);
            if (flat < 0) continue;
            const double v =
                tables[static_cast<std::size_t>(i)].values()[static_cast<std::size_t>(flat)];
            if (count == 0)
                anchor = v;
            else
                delta_sum += v - anchor;
            ++count;
        }
        const double mean = anchor + delta_sum / static_cast<double>(count);
        meta[k] = (1.0 - beta) * meta[k] + beta * mean;
    }
}

}  // namespace pmrl
