#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "lrm/filter.hpp"
#include "lrm/hedging.hpp"
#include "lrm/scenario.hpp"
#include "lrm/stats.hpp"

namespace lrm {

/// Terminal quantities of one simulated path.
struct PathSummary {
    double payoff = 0.0;          ///< G_T
    double terminal_value = 0.0;  ///< V_T
    double cost_drift = 0.0;      ///< C_T - C_0
    double martingale_sum = 0.0;  ///< sum of Delta M
    double mmm_density = 1.0;     ///< L_T
    int n_dead = 0;
};

/// Mean and standard error of a process on the base grid across paths.
struct Band {
    double mean = 0.0;
    double std_error = 0.0;
};

struct ReplicationStats {
    double max = 0.0;
    double p50 = 0.0;
    double p95 = 0.0;
    double p99 = 0.0;
};

struct FilterOracleReport {
    std::vector<double> max_tv;  ///< per checked death history
    double worst = 0.0;
    double step = 0.0;
};

struct EnsembleSummary {
    ContractKind contract = ContractKind::pure_endowment;
    std::size_t n_paths = 0;
    std::uint64_t seed = 0;
    double s0 = 0.0;
    double initial_value = 0.0;       ///< V_0 = G_0
    McEstimate cost_drift;            ///< mean of C_T - C_0
    McEstimate orthogonality;         ///< cov(C_T - C_0, sum Delta M)
    McEstimate mmm_weighted_payoff;   ///< mean of L_T G_T, estimates G_0
    McEstimate payoff;                ///< mean of G_T
    McEstimate cost_autocorrelation;  ///< lag-1 product of standardized terminal costs
    ReplicationStats replication;     ///< |V_T - G_T| / s0
    FilterOracleReport filter_oracle;

    std::vector<double> grid;
    std::vector<Band> value_band;
    std::vector<Band> cost_band;
    std::vector<PathSummary> paths;
    std::vector<ScenarioResult> sample_results;  ///< first report.path_csv_limit paths
    FilterTrajectory sample_filter;             ///< filter of path 0 on its merged grid
    std::vector<ProjectionTable> tables;        ///< pure table, or term kernels per node
};

/// Simulates the whole ensemble. Path i uses seeds derived from
/// (config.seed, i); paths are processed in fixed-size blocks whose partial
/// sums are combined in block order, so the result does not depend on
/// `threads` (0 means hardware concurrency).
EnsembleSummary run_ensemble(const ScenarioConfig& config, unsigned threads = 0);

/// Runs the filter and the discrete reference filter (cell width
/// step_fraction * T) on the death histories of the first `histories` paths.
FilterOracleReport filter_oracle_check(const ScenarioConfig& config, std::size_t histories,
                                       double step_fraction = 1e-4);

}  // namespace lrm
