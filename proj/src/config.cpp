#include "pmrl/config.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "pmrl/family_builders.hpp"

namespace pmrl {

namespace {

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double parse_double(const std::string& key, const std::string& value) {
    try {
        std::size_t used = 0;
        const double v = std::stod(value, &used);
        if (used != value.size()) throw std::invalid_argument(value);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("key '" + key + "' expects a number, got '" + value + "'");
    }
}

long long parse_int(const std::string& key, const std::string& value) {
    try {
        std::size_t used = 0;
        const long long v = std::stoll(value, &used);
        if (used != value.size()) throw std::invalid_argument(value);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("key '" + key + "' expects an integer, got '" + value + "'");
    }
}

template <typename T, typename Parse>
std::vector<T> parse_list(const std::string& key, const std::string& value, Parse parse) {
    std::istringstream vs(value);
    std::vector<T> out;
    std::string tok;
    while (vs >> tok) out.push_back(parse(key, tok));
    if (out.empty()) throw ConfigError("key '" + key + "' expects a nonempty list");
    return out;
}

PolicyKind parse_policy_kind(const std::string& key, const std::string& value) {
    if (value == "epsilon-greedy") return PolicyKind::EpsilonGreedy;
    if (value == "greedy") return PolicyKind::Greedy;
    if (value == "boltzmann") return PolicyKind::Boltzmann;
    throw ConfigError("key '" + key + "' expects epsilon-greedy|greedy|boltzmann, got '" +
                      value + "'");
}

std::string policy_kind_name(PolicyKind kind) {
    switch (kind) {
        case PolicyKind::EpsilonGreedy: return "epsilon-greedy";
        case PolicyKind::Greedy: return "greedy";
        case PolicyKind::Boltzmann: return "boltzmann";
    }
    return "epsilon-greedy";
}

}  // namespace

Algorithm ExperimentConfig::algorithm_id() const {
    if (algorithm == "pmeta") return Algorithm::PMeta;
    if (algorithm == "model-average") return Algorithm::ModelAverage;
    if (algorithm == "independent") return Algorithm::Independent;
    if (algorithm == "joint") return Algorithm::Joint;
    throw ConfigError("unknown algorithm '" + algorithm + "'");
}

TaskFamily ExperimentConfig::build_family() const {
    if (family == "gridworld") return make_gridworld_family(sizes, family_seed, gamma);
    if (family == "mountaincar") return make_mountaincar_family(inclines, bins, gamma);
    if (family == "bandit") return make_bandit_family(arms, gamma);
    if (family == "random")
        return make_random_family(random_tasks, random_states, random_actions, gamma, 1.0,
                                  family_seed);
    throw ConfigError("unknown family '" + family + "'");
}

void ExperimentConfig::validate() const {
    (void)algorithm_id();
    if (family != "gridworld" && family != "mountaincar" && family != "bandit" &&
        family != "random")
        throw ConfigError("unknown family '" + family + "'");
    if (seeds.empty()) throw ConfigError("at least one seed is required");
    if (!(gamma >= 0.0 && gamma < 1.0)) throw ConfigError("gamma must lie in [0,1)");
    if (threads < 0) throw ConfigError("threads must be nonnegative");
    try {
        train.validate();
    } catch (const InvalidParameter& e) {
        throw ConfigError(e.what());
    }
}

ExperimentConfig parse_config(const std::string& text) {
    ExperimentConfig cfg;
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(line_no) + " is not 'key = value'");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (value.empty()) throw ConfigError("key '" + key + "' has no value");

        if (key == "family") cfg.family = value;
        else if (key == "sizes")
            cfg.sizes = parse_list<int>(key, value, [](const std::string& k, const std::string& v) {
                return static_cast<int>(parse_int(k, v));
            });
        else if (key == "inclines")
            cfg.inclines = parse_list<double>(key, value, parse_double);
        else if (key == "bins") {
            auto v = parse_list<int>(key, value, [](const std::string& k, const std::string& t) {
                return static_cast<int>(parse_int(k, t));
            });
            if (v.size() != 2) throw ConfigError("key 'bins' expects two integers");
            cfg.bins = {v[0], v[1]};
        } else if (key == "arms") {
            cfg.arms.clear();
            std::istringstream ts(value);
            std::string task_part;
            while (std::getline(ts, task_part, ';')) {
                std::vector<double> arms;
                std::istringstream as(task_part);
                std::string arm;
                while (std::getline(as, arm, ',')) {
                    const std::string t = trim(arm);
                    if (!t.empty()) arms.push_back(parse_double(key, t));
                }
                if (!arms.empty()) cfg.arms.push_back(std::move(arms));
            }
            if (cfg.arms.empty()) throw ConfigError("key 'arms' expects tasks separated by ';'");
        } else if (key == "random_tasks") cfg.random_tasks = static_cast<int>(parse_int(key, value));
        else if (key == "random_states") cfg.random_states = static_cast<int>(parse_int(key, value));
        else if (key == "random_actions") cfg.random_actions = static_cast<int>(parse_int(key, value));
        else if (key == "family_seed") cfg.family_seed = static_cast<std::uint64_t>(parse_int(key, value));
        else if (key == "gamma") cfg.gamma = parse_double(key, value);
        else if (key == "algorithm") cfg.algorithm = value;
        else if (key == "lambda") cfg.train.lambda = parse_double(key, value);
        else if (key == "eta") cfg.train.eta_personalized = parse_double(key, value);
        else if (key == "eta_decay") cfg.train.eta_decay = parse_double(key, value);
        else if (key == "eta_aux") cfg.train.eta_aux = parse_double(key, value);
        else if (key == "beta") cfg.train.beta = parse_double(key, value);
        else if (key == "rounds") cfg.train.rounds = static_cast<int>(parse_int(key, value));
        else if (key == "alternations") cfg.train.alternations = static_cast<int>(parse_int(key, value));
        else if (key == "steps") cfg.train.steps_per_alt = static_cast<int>(parse_int(key, value));
        else if (key == "samples") cfg.train.samples_per_step = static_cast<int>(parse_int(key, value));
        else if (key == "collect") {
            if (value == "episodes") cfg.train.collect = CollectUnit::Episodes;
            else if (value == "transitions") cfg.train.collect = CollectUnit::Transitions;
            else throw ConfigError("key 'collect' expects episodes|transitions, got '" + value + "'");
        } else if (key == "explore") cfg.train.explore_kind = parse_policy_kind(key, value);
        else if (key == "eps_start") cfg.train.eps_start = parse_double(key, value);
        else if (key == "eps_finish") cfg.train.eps_finish = parse_double(key, value);
        else if (key == "temperature") cfg.train.temperature = parse_double(key, value);
        else if (key == "explore_horizon") cfg.train.explore_horizon = static_cast<int>(parse_int(key, value));
        else if (key == "eval_episodes") cfg.train.eval_episodes = static_cast<int>(parse_int(key, value));
        else if (key == "eval_horizon") cfg.train.eval_horizon = static_cast<int>(parse_int(key, value));
        else if (key == "delta_repeats") cfg.train.delta_repeats = static_cast<int>(parse_int(key, value));
        else if (key == "fixed_point_tol") cfg.train.fixed_point_tol = parse_double(key, value);
        else if (key == "checkpoint_every") cfg.train.checkpoint_every = static_cast<int>(parse_int(key, value));
        else if (key == "seeds")
            cfg.seeds = parse_list<std::uint64_t>(key, value,
                                                  [](const std::string& k, const std::string& v) {
                                                      return static_cast<std::uint64_t>(parse_int(k, v));
                                                  });
        else if (key == "out_dir") cfg.out_dir = value;
        else if (key == "threads") cfg.threads = static_cast<int>(parse_int(key, value));
        else throw ConfigError("unknown config key '" + key + "'");
    }
    cfg.validate();
    return cfg;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

std::string write_config(const ExperimentConfig& cfg) {
    std::ostringstream out;
    out << "family = " << cfg.family << "\n";
    out << "sizes =";
    for (int s : cfg.sizes) out << ' ' << s;
    out << "\n";
    out << "inclines =";
    for (double v : cfg.inclines) out << ' ' << fmt(v);
    out << "\n";
    out << "bins = " << cfg.bins.first << ' ' << cfg.bins.second << "\n";
    out << "arms = ";
    for (std::size_t i = 0; i < cfg.arms.size(); ++i) {
        if (i) out << " ; ";
        for (std::size_t a = 0; a < cfg.arms[i].size(); ++a) {
            if (a) out << ", ";
            out << fmt(cfg.arms[i][a]);
        }
    }
    out << "\n";
    out << "random_tasks = " << cfg.random_tasks << "\n";
    out << "random_states = " << cfg.random_states << "\n";
    out << "random_actions = " << cfg.random_actions << "\n";
    out << "family_seed = " << cfg.family_seed << "\n";
    out << "gamma = " << fmt(cfg.gamma) << "\n";
    out << "algorithm = " << cfg.algorithm << "\n";
    out << "lambda = " << fmt(cfg.train.lambda) << "\n";
    out << "eta = " << fmt(cfg.train.eta_personalized) << "\n";
    out << "eta_decay = " << fmt(cfg.train.eta_decay) << "\n";
    out << "eta_aux = " << fmt(cfg.train.eta_aux) << "\n";
    out << "beta = " << fmt(cfg.train.beta) << "\n";
    out << "rounds = " << cfg.train.rounds << "\n";
    out << "alternations = " << cfg.train.alternations << "\n";
    out << "steps = " << cfg.train.steps_per_alt << "\n";
    out << "samples = " << cfg.train.samples_per_step << "\n";
    out << "collect = "
        << (cfg.train.collect == CollectUnit::Episodes ? "episodes" : "transitions") << "\n";
    out << "explore = " << policy_kind_name(cfg.train.explore_kind) << "\n";
    out << "eps_start = " << fmt(cfg.train.eps_start) << "\n";
    out << "eps_finish = " << fmt(cfg.train.eps_finish) << "\n";
    out << "temperature = " << fmt(cfg.train.temperature) << "\n";
    out << "explore_horizon = " << cfg.train.explore_horizon << "\n";
    out << "eval_episodes = " << cfg.train.eval_episodes << "\n";
    out << "eval_horizon = " << cfg.train.eval_horizon << "\n";
    out << "delta_repeats = " << cfg.train.delta_repeats << "\n";
    out << "fixed_point_tol = " << fmt(cfg.train.fixed_point_tol) << "\n";
    out << "checkpoint_every = " << cfg.train.checkpoint_every << "\n";
    out << "seeds =";
    for (auto s : cfg.seeds) out << ' ' << s;
    out << "\n";
    out << "out_dir = " << cfg.out_dir << "\n";
    out << "threads = " << cfg.threads << "\n";
    return out.str();
}

void save_config(const ExperimentConfig& config, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open config file for writing: " + path);
    out << write_config(config);
    if (!out) throw IoError("failed writing config file: " + path);
}

}  // namespace pmrl
