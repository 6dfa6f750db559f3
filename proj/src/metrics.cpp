#include "pmrl/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "pmrl/errors.hpp"

namespace pmrl {

namespace {

std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

double mean_of(const std::vector<double>& v) {
    if (v.empty()) return 0.0;
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

}  // namespace

double MetricsRecord::mean_personalized_return() const { return mean_of(personalized_returns); }
double MetricsRecord::mean_meta_return() const { return mean_of(meta_returns); }

bool operator==(const MetricsRecord& a, const MetricsRecord& b) {
    return a.seed == b.seed && a.round == b.round &&
           a.personalized_returns == b.personalized_returns && a.meta_returns == b.meta_returns &&
           a.grad_norm_sq == b.grad_norm_sq && a.dist_lhs == b.dist_lhs &&
           a.bound_rhs == b.bound_rhs && a.bound_ok == b.bound_ok &&
           a.delta_est == b.delta_est && a.sigma_sq == b.sigma_sq &&
           a.sigma2_sq == b.sigma2_sq && a.telescope_residual == b.telescope_residual;
}

namespace {

struct ColumnLayout {
    std::size_t n_pers = 0;
    std::size_t n_meta = 0;
    bool grad = false, lhs = false, rhs = false, ok = false, delta = false, sigma = false,
         sigma2 = false, telescope = false;

    static ColumnLayout of(const MetricsRecord& r) {
        return {r.personalized_returns.size(),
                r.meta_returns.size(),
                r.grad_norm_sq.has_value(),
                r.dist_lhs.has_value(),
                r.bound_rhs.has_value(),
                r.bound_ok.has_value(),
                r.delta_est.has_value(),
                r.sigma_sq.has_value(),
                r.sigma2_sq.has_value(),
                r.telescope_residual.has_value()};
    }
    bool operator==(const ColumnLayout&) const = default;
};

}  // namespace

void write_metrics(const std::vector<MetricsRecord>& records, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open metrics file for writing: " + path);

    const ColumnLayout layout =
        records.empty() ? ColumnLayout{} : ColumnLayout::of(records.front());
    for (const auto& r : records)
        if (!(ColumnLayout::of(r) == layout))
            throw InvalidState("metrics records disagree on their column set");

    out << "seed\tround";
    for (std::size_t i = 0; i < layout.n_pers; ++i) out << "\tpers_return_" << i;
    for (std::size_t i = 0; i < layout.n_meta; ++i) out << "\tmeta_return_" << i;
    if (layout.grad) out << "\tgrad_norm_sq";
    if (layout.lhs) out << "\tdist_lhs";
    if (layout.rhs) out << "\tbound_rhs";
    if (layout.ok) out << "\tbound_ok";
    if (layout.delta) out << "\tdelta_est";
    if (layout.sigma) out << "\tsigma_sq";
    if (layout.sigma2) out << "\tsigma2_sq";
    if (layout.telescope) out << "\ttelescope_resid";
    out << "\n";

    for (const auto& r : records) {
        out << r.seed << '\t' << r.round;
        for (double v : r.personalized_returns) out << '\t' << fmt_double(v);
        for (double v : r.meta_returns) out << '\t' << fmt_double(v);
        if (layout.grad) out << '\t' << fmt_double(*r.grad_norm_sq);
        if (layout.lhs) out << '\t' << fmt_double(*r.dist_lhs);
        if (layout.rhs) out << '\t' << fmt_double(*r.bound_rhs);
        if (layout.ok) out << '\t' << (*r.bound_ok ? 1 : 0);
        if (layout.delta) out << '\t' << fmt_double(*r.delta_est);
        if (layout.sigma) out << '\t' << fmt_double(*r.sigma_sq);
        if (layout.sigma2) out << '\t' << fmt_double(*r.sigma2_sq);
        if (layout.telescope) out << '\t' << fmt_double(*r.telescope_residual);
        out << "\n";
    }
    if (!out) throw IoError("failed writing metrics file: " + path);
}

std::vector<MetricsRecord> read_metrics(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open metrics file: " + path);
    std::string header;
    if (!std::getline(in, header)) throw IoError("empty metrics file: " + path);

    std::vector<std::string> columns;
    {
        std::istringstream hs(header);
        std::string col;
        while (std::getline(hs, col, '\t')) columns.push_back(col);
    }
    if (columns.size() < 2 || columns[0] != "seed" || columns[1] != "round")
        throw IoError("unrecognized metrics header in " + path);

    std::vector<MetricsRecord> records;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string cell;
        MetricsRecord r;
        for (const auto& col : columns) {
            if (!std::getline(ls, cell, '\t'))
                throw IoError("truncated metrics row in " + path);
            if (col == "seed")
                r.seed = std::stoull(cell);
            else if (col == "round")
                r.round = std::stoi(cell);
            else if (col.starts_with("pers_return_"))
                r.personalized_returns.push_back(std::stod(cell));
            else if (col.starts_with("meta_return_"))
                r.meta_returns.push_back(std::stod(cell));
            else if (col == "grad_norm_sq")
                r.grad_norm_sq = std::stod(cell);
            else if (col == "dist_lhs")
                r.dist_lhs = std::stod(cell);
            else if (col == "bound_rhs")
                r.bound_rhs = std::stod(cell);
            else if (col == "bound_ok")
                r.bound_ok = cell != "0";
            else if (col == "delta_est")
                r.delta_est = std::stod(cell);
            else if (col == "sigma_sq")
                r.sigma_sq = std::stod(cell);
            else if (col == "sigma2_sq")
                r.sigma2_sq = std::stod(cell);
            else if (col == "telescope_resid")
                r.telescope_residual = std::stod(cell);
            else
                throw IoError("unknown metrics column '" + col + "' in " + path);
        }
        records.push_back(std::move(r));
    }
    return records;
}

void emit_plot_data(const std::vector<MetricsRecord>& records, const std::string& path) {
    if (records.empty()) throw InvalidParameter("no records to plot");
    std::ofstream out(path);
    if (!out) throw IoError("cannot open plot file for writing: " + path);

    struct Series {
        std::string name;
        std::function<std::optional<double>(const MetricsRecord&)> get;
    };
    const std::vector<Series> series = {
        {"personalized_return",
         [](const MetricsRecord& r) -> std::optional<double> {
             if (r.personalized_returns.empty()) return std::nullopt;
             return r.mean_personalized_return();
         }},
        {"meta_return",
         [](const MetricsRecord& r) -> std::optional<double> {
             if (r.meta_returns.empty()) return std::nullopt;
             return r.mean_meta_return();
         }},
        {"grad_norm_sq", [](const MetricsRecord& r) { return r.grad_norm_sq; }},
        {"dist_lhs", [](const MetricsRecord& r) { return r.dist_lhs; }},
        {"bound_rhs", [](const MetricsRecord& r) { return r.bound_rhs; }},
    };

    out << "series\tround\tmean\tstd\n";
    for (const auto& s : series) {
        std::map<int, std::vector<double>> by_round;
        for (const auto& r : records) {
            if (auto v = s.get(r)) by_round[r.round].push_back(*v);
        }
        for (const auto& [round, values] : by_round) {
            const double mean = mean_of(values);
            double var = 0.0;
            for (double v : values) var += (v - mean) * (v - mean);
            var /= static_cast<double>(values.size());  // population std
            out << s.name << '\t' << round << '\t' << fmt_double(mean) << '\t'
                << fmt_double(std::sqrt(var)) << "\n";
        }
    }
    if (!out) throw IoError("failed writing plot file: " + path);
}

}  // namespace pmrl
