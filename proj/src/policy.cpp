#include "pmrl/policy.hpp"

#include <cmath>
#include <vector>

namespace pmrl {

void PolicySpec::validate() const {
    if (kind == PolicyKind::EpsilonGreedy && (epsilon < 0.0 || epsilon > 1.0))
        throw InvalidParameter("epsilon must lie in [0,1]");
    if (kind == PolicyKind::Boltzmann && !(temperature > 0.0))
        throw InvalidParameter("temperature must be positive");
}

int greedy_action(const QTable& q, int s) {
    auto row = q.row(s);
    int best = 0;
    for (int a = 1; a < static_cast<int>(row.size()); ++a)
        if (row[static_cast<std::size_t>(a)] > row[static_cast<std::size_t>(best)]) best = a;
    return best;
}

int select_action(const QTable& q, int s, const PolicySpec& spec, RngStream& rng) {
    spec.validate();
    switch (spec.kind) {
        case PolicyKind::Greedy:
            return greedy_action(q, s);
        case PolicyKind::EpsilonGreedy: {
            if (rng.uniform01() < spec.epsilon) return rng.uniform_int(q.n_actions());
            return greedy_action(q, s);
        }
        case PolicyKind::Boltzmann: {
            auto row = q.row(s);
            double m = row[0];
            for (double v : row) m = std::max(m, v);
            std::vector<double> probs(row.size());
            double z = 0.0;
            for (std::size_t a = 0; a < row.size(); ++a) {
                probs[a] = std::exp((row[a] - m) / spec.temperature);
                z += probs[a];
            }
            for (double& p : probs) p /= z;
            return rng.sample_categorical(probs);
        }
    }
    throw InvalidParameter("unknown policy kind");
}

ReturnEstimate evaluate_return(const TabularTask& task, const QTable& q, const PolicySpec& spec,
                               int n_episodes, int horizon, RngStream& rng) {
    if (n_episodes < 1 || horizon < 1)
        throw InvalidParameter("evaluation needs at least one episode and one step");
    double sum = 0.0;
    double sum_sq = 0.0;
    for (int ep = 0; ep < n_episodes; ++ep) {
        int s = task.sample_initial(rng);
        double ret = 0.0;
        for (int t = 0; t < horizon && !task.is_terminal(s); ++t) {
            const int a = select_action(q, s, spec, rng);
            auto [next, r] = step(task, s, a, rng);
            ret += r;
            s = next;
        }
        sum += ret;
        sum_sq += ret * ret;
    }
    const double n = static_cast<double>(n_episodes);
    const double mean = sum / n;
    const double var = std::max(0.0, sum_sq / n - mean * mean);
    return {.mean = mean, .std_error = std::sqrt(var / n)};
}

}  // namespace pmrl
