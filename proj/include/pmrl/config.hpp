#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "pmrl/engine.hpp"
#include "pmrl/task.hpp"
#include "pmrl/trainer.hpp"

namespace pmrl {

/// A full experiment description: which family to build, which trainer to
/// run, its hyperparameters, the evaluation protocol and the seed list.
/// Unset keys take the documented defaults (lambda=10, C=10, R=3, K=1,
/// beta=1, eta=1e-3, gamma=0.99, epsilon 0.3 -> 0.01).
struct ExperimentConfig {
    std::string family = "gridworld";  // gridworld | mountaincar | bandit | random
    std::vector<int> sizes = {4, 5, 6, 7, 8};
    std::vector<double> inclines = {3.0, 3.5, 4.0, 4.5, 5.0};
    std::pair<int, int> bins = {32, 32};
    std::vector<std::vector<double>> arms = {{1.0, 0.0}, {0.0, 1.0}};
    int random_tasks = 5;
    int random_states = 8;
    int random_actions = 3;
    std::uint64_t family_seed = 0;
    double gamma = 0.99;

    std::string algorithm = "pmeta";  // pmeta | model-average | independent | joint
    PersonalizationConfig train;

    std::vector<std::uint64_t> seeds = {0, 1, 2, 3, 4};
    std::string out_dir = "out";
    int threads = 0;  // 0 = serial reference path

    Algorithm algorithm_id() const;
    TaskFamily build_family() const;
    Exec exec() const { return threads > 0 ? Exec::OpenMP : Exec::Serial; }
    void validate() const;

    friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

/// Parses the plain-text `key = value` format (one pair per line, # starts a
/// comment). Unknown keys and malformed values raise ConfigError naming the
/// offending key.
ExperimentConfig parse_config(const std::string& text);

ExperimentConfig load_config(const std::string& path);

/// Canonical text form; parse_config(write_config(c)) == c.
std::string write_config(const ExperimentConfig& config);

void save_config(const ExperimentConfig& config, const std::string& path);

}  // namespace pmrl
