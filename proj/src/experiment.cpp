#include "pmrl/experiment.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "pmrl/serialize.hpp"

namespace pmrl {

namespace fs = std::filesystem;

namespace {

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

struct OutputTracker {
    std::vector<fs::path> written;

    void track(const fs::path& p) { written.push_back(p); }
    void discard_all() {
        for (const auto& p : written) {
            std::error_code ec;
            fs::remove(p, ec);
        }
    }
};

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& config) {
    config.validate();
    const TaskFamily family = config.build_family();
    const Algorithm algorithm = config.algorithm_id();
    const Exec exec = config.exec();

    fs::create_directories(config.out_dir);
    OutputTracker tracker;
    ExperimentResult result;
    try {
        std::vector<MetricsRecord> all_records;
        for (const std::uint64_t seed : config.seeds) {
            PersonalizationConfig train = config.train;
            train.seed = seed;
            train.theory_diagnostics = algorithm == Algorithm::PMeta;

            const fs::path checkpoint_base =
                fs::path(config.out_dir) / ("checkpoint_seed" + std::to_string(seed));
            CheckpointFn checkpoint = [&](int round, const TrainingState& state) {
                const fs::path p = checkpoint_base.string() + "_round" + std::to_string(round) +
                                   ".txt";
                std::ofstream out(p);
                if (!out) throw IoError("cannot write checkpoint: " + p.string());
                write_checkpoint(out, family, state);
                tracker.track(p);
            };

            TrainResult run = run_algorithm(family, train, algorithm, exec, nullptr,
                                            algorithm == Algorithm::PMeta ? checkpoint
                                                                          : CheckpointFn());
            if (train.theory_diagnostics && algorithm == Algorithm::PMeta) {
                if (train.lambda * train.lambda > 8.0) {
                    result.bound_checked = true;
                    for (const auto& r : run.metrics)
                        if (r.bound_ok.has_value() && !*r.bound_ok) result.bound_violated = true;
                } else {
                    std::fprintf(stderr,
                                 "notice: lambda^2 <= 8, distance bound undefined; check skipped\n");
                }
            }

            const fs::path metrics_path =
                fs::path(config.out_dir) / ("metrics_seed" + std::to_string(seed) + ".tsv");
            write_metrics(run.metrics, metrics_path.string());
            tracker.track(metrics_path);

            all_records.insert(all_records.end(), run.metrics.begin(), run.metrics.end());
            result.per_seed.push_back({seed, std::move(run.metrics)});
        }
        if (!all_records.empty()) {
            const fs::path plot_path = fs::path(config.out_dir) / "plot_data.tsv";
            emit_plot_data(all_records, plot_path.string());
            tracker.track(plot_path);
        }
    } catch (...) {
        tracker.discard_all();
        throw;
    }
    return result;
}

std::vector<LambdaRow> sweep_lambda(const ExperimentConfig& config,
                                    const std::vector<double>& lambdas) {
    if (lambdas.empty()) throw InvalidParameter("lambda sweep needs at least one value");
    config.validate();

    std::vector<LambdaRow> rows;
    for (const double lambda : lambdas) {
        ExperimentConfig sub = config;
        sub.train.lambda = lambda;
        sub.out_dir = (fs::path(config.out_dir) / ("lambda_" + fmt(lambda))).string();
        const ExperimentResult res = run_experiment(sub);

        LambdaRow row;
        row.lambda = lambda;
        std::vector<double> pers, meta;
        for (std::size_t i = 0; i < res.per_seed.size(); ++i) {
            const auto& rec = res.final_record(i);
            pers.push_back(rec.mean_personalized_return());
            meta.push_back(rec.mean_meta_return());
        }
        auto mean_std = [](const std::vector<double>& v) {
            double m = 0.0;
            for (double x : v) m += x;
            m /= static_cast<double>(v.size());
            double var = 0.0;
            for (double x : v) var += (x - m) * (x - m);
            return std::pair<double, double>(m, std::sqrt(var / static_cast<double>(v.size())));
        };
        std::tie(row.pers_mean, row.pers_std) = mean_std(pers);
        std::tie(row.meta_mean, row.meta_std) = mean_std(meta);
        rows.push_back(row);
    }

    std::size_t best = 0;
    for (std::size_t i = 1; i < rows.size(); ++i)
        if (rows[i].pers_mean > rows[best].pers_mean) best = i;
    rows[best].best = true;

    fs::create_directories(config.out_dir);
    const fs::path table_path = fs::path(config.out_dir) / "lambda_sweep.tsv";
    std::ofstream out(table_path);
    if (!out) throw IoError("cannot write sweep table: " + table_path.string());
    out << "lambda\tpers_mean\tpers_std\tmeta_mean\tmeta_std\tbest\n";
    for (const auto& r : rows)
        out << fmt(r.lambda) << '\t' << fmt(r.pers_mean) << '\t' << fmt(r.pers_std) << '\t'
            << fmt(r.meta_mean) << '\t' << fmt(r.meta_std) << '\t' << (r.best ? 1 : 0) << "\n";
    if (!out) throw IoError("failed writing sweep table: " + table_path.string());
    return rows;
}

}  // namespace pmrl
