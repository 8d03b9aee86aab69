#include "lrm/reports.hpp"

#include <fstream>

#include <json.hpp>

#include "lrm/csv.hpp"

namespace lrm {

namespace {

using nlohmann::json;

json estimate_json(const McEstimate& e) {
    return {{"mean", e.mean}, {"std_error", e.std_error}, {"samples", e.samples}};
}

std::ofstream open_output(const std::filesystem::path& p) {
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + p.string());
    return out;
}

}  // namespace

std::string summary_json(const EnsembleSummary& s) {
    json doc;
    doc["contract"] = to_string(s.contract);
    doc["n_paths"] = s.n_paths;
    doc["seed"] = s.seed;
    doc["initial_value"] = s.initial_value;
    doc["cost_drift"] = estimate_json(s.cost_drift);
    doc["orthogonality_covariance"] = estimate_json(s.orthogonality);
    doc["mmm_weighted_payoff"] = estimate_json(s.mmm_weighted_payoff);
    doc["payoff"] = estimate_json(s.payoff);
    doc["terminal_cost_lag1_autocorrelation"] = estimate_json(s.cost_autocorrelation);
    doc["replication_error_over_s0"] = {{"max", s.replication.max},
                                        {"p50", s.replication.p50},
                                        {"p95", s.replication.p95},
                                        {"p99", s.replication.p99}};
    doc["filter_vs_oracle_tv"] = {{"paths", s.filter_oracle.max_tv.size()},
                                  {"cell", s.filter_oracle.step},
                                  {"max", s.filter_oracle.worst},
                                  {"per_path", s.filter_oracle.max_tv}};
    doc["checks"] = {
        {"mean_self_financing", s.cost_drift.within(0.0)},
        {"orthogonality", s.orthogonality.within(0.0)},
        {"mmm_initial_value", s.mmm_weighted_payoff.within(s.initial_value)},
        {"seed_independence", s.cost_autocorrelation.within(0.0)},
    };
    return doc.dump(2) + "\n";
}

void emit_reports(const EnsembleSummary& summary, const std::filesystem::path& dir,
                  bool overwrite) {
    namespace fs = std::filesystem;
    if (fs::exists(dir)) {
        if (!fs::is_directory(dir)) throw OutputExistsError(dir.string() + " is not a directory");
        if (!fs::is_empty(dir) && !overwrite) {
            throw OutputExistsError("output directory " + dir.string() +
                                    " is not empty; pass --overwrite to replace it");
        }
    } else {
        fs::create_directories(dir);
    }

    open_output(dir / "summary.json") << summary_json(summary);

    {
        auto out = open_output(dir / "terminal.csv");
        out << csv_header(kTerminalColumns) << '\n';
        for (std::size_t i = 0; i < summary.paths.size(); ++i) {
            const PathSummary& p = summary.paths[i];
            out << i;
            for (double x : {p.payoff, p.terminal_value, p.cost_drift, p.martingale_sum,
                             p.mmm_density}) {
                out << ',' << format_number(x);
            }
            out << ',' << p.n_dead << '\n';
        }
    }
    {
        auto out = open_output(dir / "aggregate.csv");
        out << csv_header(kAggregateColumns) << '\n';
        for (std::size_t g = 0; g < summary.grid.size(); ++g) {
            const Band& v = summary.value_band[g];
            const Band& c = summary.cost_band[g];
            out << format_number(summary.grid[g]);
            for (double x : {v.mean, v.mean - 3.0 * v.std_error, v.mean + 3.0 * v.std_error, c.mean,
                             c.mean - 3.0 * c.std_error, c.mean + 3.0 * c.std_error}) {
                out << ',' << format_number(x);
            }
            out << '\n';
        }
    }
    {
        auto out = open_output(dir / "paths.csv");
        out << csv_header(kPathColumns) << '\n';
        for (std::size_t i = 0; i < summary.sample_results.size(); ++i) {
            for (const HedgeRecord& r : summary.sample_results[i].records) {
                out << i;
                for (double x : {r.time, r.theta, r.eta, r.value, r.cost, r.stock}) {
                    out << ',' << format_number(x);
                }
                out << ',' << r.n_dead << '\n';
            }
        }
    }
    {
        auto out = open_output(dir / "filter_path0.csv");
        write_filter_csv(out, summary.sample_filter);
    }
    if (summary.contract == ContractKind::pure_endowment) {
        if (!summary.tables.empty()) {
            auto out = open_output(dir / "projection.csv");
            write_projection_csv(out, summary.tables.front());
        }
    } else {
        auto out = open_output(dir / "term_kernels.csv");
        const Eigen::Index n = summary.tables.empty() ? 0 : summary.tables.front().at_index(0).size();
        out << "node,time";
        for (Eigen::Index x = 0; x < n; ++x) out << ",m_" << x;
        out << '\n';
        for (const ProjectionTable& t : summary.tables) {
            for (std::size_t i = 0; i < t.size(); ++i) {
                out << format_number(t.maturity()) << ',' << format_number(t.grid()[i]);
                for (Eigen::Index x = 0; x < n; ++x) out << ',' << format_number(t.at_index(i)[x]);
                out << '\n';
            }
        }
    }
}

}  // namespace lrm
