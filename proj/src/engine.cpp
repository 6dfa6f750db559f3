#include "pmrl/engine.hpp"

#include <chrono>
#include <cmath>

#include "pmrl/diag.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace pmrl {

namespace {

// Stream tags; every (seed, tag, task, round) names an independent stream so
// adding a consumer never perturbs the others.
constexpr std::uint64_t kTrainTag = 1;
constexpr std::uint64_t kEvalPersTag = 2;
constexpr std::uint64_t kEvalMetaTag = 3;
constexpr std::uint64_t kDiagTag = 4;

RngStream round_stream(std::uint64_t seed, std::uint64_t tag, int task, int round) {
    return RngStream::child(seed, {tag, static_cast<std::uint64_t>(task),
                                   static_cast<std::uint64_t>(round)});
}

// Persistent episode position for transition-unit collection.
struct EpisodeCursor {
    int s = 0;
    int steps = 0;
    bool live = false;
};

void append_transition(const TabularTask& task, int s, int a, int m_draws, RngStream& rng,
                       std::vector<Sample>& out, int& next_state) {
    Sample sample;
    sample.s = s;
    sample.a = a;
    auto [observed, r] = step(task, s, a, rng);
    sample.r = r;
    sample.next_states.reserve(static_cast<std::size_t>(m_draws));
    sample.next_states.push_back(observed);
    for (int m = 1; m < m_draws; ++m)
        sample.next_states.push_back(step(task, s, a, rng).first);
    out.push_back(std::move(sample));
    next_state = observed;
}

/// Collects K units (episodes or transitions) under the exploration policy
/// read from `policy_table`, which stays frozen during the call.
std::vector<Sample> collect_units(const TabularTask& task, const QTable& policy_table,
                                  const PolicySpec& spec, const PersonalizationConfig& cfg,
                                  RngStream& rng, EpisodeCursor& cursor) {
    std::vector<Sample> out;
    if (cfg.collect == CollectUnit::Episodes) {
        for (int k = 0; k < cfg.steps_per_alt; ++k) {
            int s = task.sample_initial(rng);
            for (int t = 0; t < cfg.explore_horizon && !task.is_terminal(s); ++t) {
                const int a = select_action(policy_table, s, spec, rng);
                int next = s;
                append_transition(task, s, a, cfg.samples_per_step, rng, out, next);
                s = next;
            }
        }
    } else {
        int resets = 0;
        for (int k = 0; k < cfg.steps_per_alt; ++k) {
            if (!cursor.live || task.is_terminal(cursor.s) || cursor.steps >= cfg.explore_horizon) {
                if (++resets > 100 * cfg.steps_per_alt + 100)
                    throw InvalidState("initial distribution only reaches absorbing states");
                cursor.s = task.sample_initial(rng);
                cursor.steps = 0;
                cursor.live = true;
                if (task.is_terminal(cursor.s)) {
                    --k;  // terminal start yields no transition; try a fresh episode
                    continue;
                }
            }
            const int a = select_action(policy_table, cursor.s, spec, rng);
            int next = cursor.s;
            append_transition(task, cursor.s, a, cfg.samples_per_step, rng, out, next);
            cursor.s = next;
            ++cursor.steps;
        }
    }
    return out;
}

double max_over_actions(const MetaQTable& meta, const TaskFamily& family, int i, int s) {
    const auto& task = family.task(i);
    double m = meta[family.union_index(i, s, 0)];
    for (int a = 1; a < task.n_actions(); ++a)
        m = std::max(m, meta[family.union_index(i, s, a)]);
    return m;
}

struct TaskRoundOutcome {
    double telescope_residual = 0.0;
    double pers_return = 0.0;
    double meta_return = 0.0;
};

}  // namespace

TrainResult run_algorithm(const TaskFamily& family, const PersonalizationConfig& config,
                          Algorithm algorithm, Exec exec, const MetricsSink& sink,
                          const CheckpointFn& checkpoint) {
    config.validate();
    const int n = family.n_tasks();
    const double lambda = algorithm == Algorithm::PMeta ? config.lambda : 0.0;

    TrainResult result;
    result.state = TrainingState::zeros(family);
    TrainingState& st = result.state;

    std::vector<EpisodeCursor> cursors(static_cast<std::size_t>(n));
    std::vector<std::int64_t> step_index(static_cast<std::size_t>(n), 0);

    // The derived variance constants depend only on the family; compute once.
    std::optional<DiversityConstants> constants;
    const bool bound_applicable = algorithm == Algorithm::PMeta && config.theory_diagnostics &&
                                  config.lambda * config.lambda > 8.0;
    if (bound_applicable) constants = diversity_constants(family, config.lambda, true);

    for (int c = 1; c <= config.rounds; ++c) {
        const auto t0 = std::chrono::steady_clock::now();
        const PolicySpec explore = config.exploration_at(c);
        std::vector<TaskRoundOutcome> outcomes(static_cast<std::size_t>(n));
        for (auto& k : step_index) k = 0;  // eta schedule restarts with each round

        if (algorithm == Algorithm::Joint) {
            // Round-robin over tasks inside each alternation, one task's K
            // units at a time, updating the shared table in place.
            std::vector<RngStream> streams;
            streams.reserve(static_cast<std::size_t>(n));
            for (int i = 0; i < n; ++i)
                streams.push_back(round_stream(config.seed, kTrainTag, family.task(i).id(), c));
            for (int r = 1; r <= config.alternations; ++r) {
                for (int i = 0; i < n; ++i) {
                    const auto& task = family.task(i);
                    const QTable slice = st.meta.slice(family, i);
                    auto samples = collect_units(task, slice, explore, config, streams[static_cast<std::size_t>(i)],
                                                 cursors[static_cast<std::size_t>(i)]);
                    for (const auto& sample : samples) {
                        const double eta = config.eta_at(++step_index[static_cast<std::size_t>(i)]);
                        double mean_max = 0.0;
                        for (int next : sample.next_states)
                            mean_max += max_over_actions(st.meta, family, i, next);
                        mean_max /= static_cast<double>(sample.next_states.size());
                        const double target = sample.r + task.gamma() * mean_max;
                        double& q = st.meta[family.union_index(i, sample.s, sample.a)];
                        // Same floating-point expression as the personalized
                        // step at lambda = 0: a single-task joint run must
                        // reproduce independent training exactly.
                        q = q + eta * (target - q) + eta * 0.0 * (0.0 - q);
                    }
                }
            }
        } else {
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic) if (exec == Exec::OpenMP)
#endif
            for (int i = 0; i < n; ++i) {
                const auto& task = family.task(i);
                QTable& pers = st.personalized[static_cast<std::size_t>(i)];
                QTable& aux = st.auxiliary[static_cast<std::size_t>(i)];
                RngStream rng = round_stream(config.seed, kTrainTag, task.id(), c);

                QTable meta_slice = st.meta.slice(family, i);
                if (algorithm == Algorithm::PMeta)
                    aux = meta_slice;  // round start: auxiliary tracks the broadcast meta
                else if (algorithm == Algorithm::ModelAverage)
                    pers = meta_slice;

                QTable z_sum = QTable::zeros_like(task);
                for (int r = 1; r <= config.alternations; ++r) {
                    auto samples = collect_units(task, pers, explore, config, rng,
                                                 cursors[static_cast<std::size_t>(i)]);
                    for (const auto& sample : samples) {
                        const double eta = config.eta_at(++step_index[static_cast<std::size_t>(i)]);
                        personalized_step_sampled(task, pers, aux, sample, eta, lambda);
                    }
                    if (algorithm == Algorithm::PMeta) {
                        auto z = z_sum.values();
                        auto va = aux.values();
                        auto vp = pers.values();
                        for (std::size_t e = 0; e < z.size(); ++e)
                            z[e] += config.lambda * (va[e] - vp[e]);
                        auxiliary_step(aux, pers, config.eta_aux, config.lambda);
                    }
                }

                auto& outcome = outcomes[static_cast<std::size_t>(i)];
                if (algorithm == Algorithm::PMeta) {
                    // Telescoping identity: meta - aux_R equals eta_aux * sum of Z terms.
                    double residual = 0.0;
                    auto ms = meta_slice.values();
                    auto va = aux.values();
                    auto z = z_sum.values();
                    for (std::size_t e = 0; e < z.size(); ++e)
                        residual = std::max(residual,
                                            std::abs((ms[e] - va[e]) - config.eta_aux * z[e]));
                    outcome.telescope_residual = residual;
                }

                RngStream eval_rng = round_stream(config.seed, kEvalPersTag, task.id(), c);
                outcome.pers_return = evaluate_return(task, pers, PolicySpec::greedy(),
                                                      config.eval_episodes, config.eval_horizon,
                                                      eval_rng)
                                          .mean;
            }
        }

        switch (algorithm) {
            case Algorithm::PMeta:
                aggregate(st.meta, st.auxiliary, family, config.beta);
                break;
            case Algorithm::ModelAverage:
                aggregate(st.meta, st.personalized, family, config.beta);
                break;
            case Algorithm::Independent:
            case Algorithm::Joint:
                break;
        }
        st.round = c;

        const bool has_meta = algorithm != Algorithm::Independent;
        if (has_meta) {
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic) if (exec == Exec::OpenMP)
#endif
            for (int i = 0; i < n; ++i) {
                RngStream eval_rng =
                    round_stream(config.seed, kEvalMetaTag, family.task(i).id(), c);
                outcomes[static_cast<std::size_t>(i)].meta_return =
                    evaluate_return(family.task(i), st.meta.slice(family, i),
                                    PolicySpec::greedy(), config.eval_episodes,
                                    config.eval_horizon, eval_rng)
                        .mean;
            }
        }

        MetricsRecord record;
        record.seed = config.seed;
        record.round = c;
        if (algorithm != Algorithm::Joint)
            for (const auto& o : outcomes) record.personalized_returns.push_back(o.pers_return);
        if (has_meta)
            for (const auto& o : outcomes) record.meta_returns.push_back(o.meta_return);

        if (algorithm == Algorithm::PMeta) {
            double residual = 0.0;
            for (const auto& o : outcomes)
                residual = std::max(residual, o.telescope_residual);
            record.telescope_residual = residual;
            record.dist_lhs = personalized_meta_distance(st, family);
            if (config.lambda > 0.0)
                record.grad_norm_sq = grad_objective_norm_sq(st.meta, family, config.lambda,
                                                             config.fixed_point_tol, exec);
            if (bound_applicable) {
                std::vector<double> deltas(static_cast<std::size_t>(n), 0.0);
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic) if (exec == Exec::OpenMP)
#endif
                for (int i = 0; i < n; ++i) {
                    RngStream diag_rng =
                        round_stream(config.seed, kDiagTag, family.task(i).id(), c);
                    deltas[static_cast<std::size_t>(i)] =
                        estimate_delta(family.task(i), st.meta.slice(family, i), config, diag_rng,
                                       config.delta_repeats);
                }
                double delta = 0.0;
                for (double d : deltas) delta = std::max(delta, d);
                record.delta_est = delta;
                record.sigma_sq = constants->sigma_sq;
                record.sigma2_sq = constants->sigma2_sq;
                const double lam_sq = config.lambda * config.lambda;
                record.bound_rhs = 2.0 * delta * delta +
                                   2.0 / (lam_sq - 8.0) * *record.grad_norm_sq +
                                   2.0 * constants->sigma2_sq.value() / lam_sq;
                record.bound_ok = *record.dist_lhs <= *record.bound_rhs;
            }
        }

        record.wall_ms = std::chrono::duration<double, std::milli>(
                             std::chrono::steady_clock::now() - t0)
                             .count();
        if (sink) sink(record);
        result.metrics.push_back(std::move(record));
        if (checkpoint && ((config.checkpoint_every > 0 && c % config.checkpoint_every == 0) ||
                           c == config.rounds))
            checkpoint(c, st);
    }
    return result;
}

TrainResult run_training(const TaskFamily& family, const PersonalizationConfig& config,
                         Exec exec, const MetricsSink& sink, const CheckpointFn& checkpoint) {
    return run_algorithm(family, config, Algorithm::PMeta, exec, sink, checkpoint);
}

TrainResult train_model_average(const TaskFamily& family, const PersonalizationConfig& config,
                                Exec exec, const MetricsSink& sink) {
    return run_algorithm(family, config, Algorithm::ModelAverage, exec, sink);
}

TrainResult train_independent(const TaskFamily& family, const PersonalizationConfig& config,
                              Exec exec, const MetricsSink& sink) {
    return run_algorithm(family, config, Algorithm::Independent, exec, sink);
}

TrainResult train_joint(const TaskFamily& family, const PersonalizationConfig& config, Exec exec,
                        const MetricsSink& sink) {
    return run_algorithm(family, config, Algorithm::Joint, exec, sink);
}

}  // namespace pmrl
