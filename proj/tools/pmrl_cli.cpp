#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "pmrl/experiment.hpp"
#include "pmrl/metrics.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitRuntime = 2;
constexpr int kExitBoundViolation = 3;

struct CommonOpts {
    std::string config_path;
    std::string out_dir;
    std::int64_t seed = -1;
    int threads = -1;
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
    cmd->add_option("-c,--config", opts.config_path, "experiment config file")->required();
    cmd->add_option("-o,--out", opts.out_dir, "output directory override");
    cmd->add_option("-s,--seed", opts.seed, "single-seed override");
    cmd->add_option("-t,--threads", opts.threads, "worker threads (0 = serial)");
}

pmrl::ExperimentConfig resolve(const CommonOpts& opts) {
    pmrl::ExperimentConfig cfg = pmrl::load_config(opts.config_path);
    if (!opts.out_dir.empty()) cfg.out_dir = opts.out_dir;
    if (opts.seed >= 0) cfg.seeds = {static_cast<std::uint64_t>(opts.seed)};
    if (opts.threads >= 0) cfg.threads = opts.threads;
#ifdef _OPENMP
    if (cfg.threads > 0) omp_set_num_threads(cfg.threads);
#endif
    return cfg;
}

void print_summary(const pmrl::ExperimentResult& result, const std::string& label) {
    for (const auto& seed_run : result.per_seed) {
        if (seed_run.metrics.empty()) continue;
        const auto& rec = seed_run.metrics.back();
        std::printf("%s seed=%llu round=%d", label.c_str(),
                    static_cast<unsigned long long>(rec.seed), rec.round);
        if (!rec.personalized_returns.empty())
            std::printf(" pers_return=%.4f", rec.mean_personalized_return());
        if (!rec.meta_returns.empty()) std::printf(" meta_return=%.4f", rec.mean_meta_return());
        if (rec.grad_norm_sq) std::printf(" grad_norm_sq=%.6g", *rec.grad_norm_sq);
        if (rec.bound_ok) std::printf(" bound_ok=%d", *rec.bound_ok ? 1 : 0);
        std::printf("\n");
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Personalized meta Q-learning for tabular task families"};
    app.require_subcommand(1);

    CommonOpts train_opts, sweep_opts, verify_opts, base_opts;
    std::vector<double> lambdas = {5.0, 10.0, 20.0, 50.0};

    CLI::App* train_cmd = app.add_subcommand("train", "run the configured trainer");
    add_common(train_cmd, train_opts);

    CLI::App* sweep_cmd =
        app.add_subcommand("sweep-lambda", "rerun per lambda and tabulate final returns");
    add_common(sweep_cmd, sweep_opts);
    sweep_cmd->add_option("-l,--lambdas", lambdas, "lambda values to sweep");

    CLI::App* verify_cmd = app.add_subcommand(
        "verify-theory", "train with diagnostics on and fail on a distance-bound violation");
    add_common(verify_cmd, verify_opts);

    CLI::App* base_cmd =
        app.add_subcommand("baselines", "run the model-average, independent and joint trainers");
    add_common(base_cmd, base_opts);

    CLI11_PARSE(app, argc, argv);

    try {
        if (train_cmd->parsed()) {
            const auto cfg = resolve(train_opts);
            print_summary(pmrl::run_experiment(cfg), cfg.algorithm);
            return kExitOk;
        }
        if (sweep_cmd->parsed()) {
            const auto cfg = resolve(sweep_opts);
            const auto rows = pmrl::sweep_lambda(cfg, lambdas);
            std::printf("lambda\tpers_mean\tpers_std\tmeta_mean\tmeta_std\tbest\n");
            for (const auto& r : rows)
                std::printf("%g\t%.4f\t%.4f\t%.4f\t%.4f\t%d\n", r.lambda, r.pers_mean,
                            r.pers_std, r.meta_mean, r.meta_std, r.best ? 1 : 0);
            return kExitOk;
        }
        if (verify_cmd->parsed()) {
            auto cfg = resolve(verify_opts);
            cfg.algorithm = "pmeta";
            cfg.train.theory_diagnostics = true;
            const auto result = pmrl::run_experiment(cfg);
            print_summary(result, "verify-theory");
            if (result.bound_violated) {
                std::fprintf(stderr, "distance bound violated\n");
                return kExitBoundViolation;
            }
            return kExitOk;
        }
        if (base_cmd->parsed()) {
            const auto cfg = resolve(base_opts);
            for (const std::string algo : {"model-average", "independent", "joint"}) {
                pmrl::ExperimentConfig sub = cfg;
                sub.algorithm = algo;
                sub.out_dir = (std::filesystem::path(cfg.out_dir) / algo).string();
                print_summary(pmrl::run_experiment(sub), algo);
            }
            return kExitOk;
        }
    } catch (const pmrl::ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return kExitConfig;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitRuntime;
    }
    return kExitConfig;
}
