#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "lrm/filter.hpp"
#include "lrm/hazard.hpp"
#include "lrm/market.hpp"
#include "lrm/projection.hpp"
#include "lrm/stats.hpp"

namespace lrm {

/// Marker for time points that are not on the shared base grid.
inline constexpr std::size_t kOffGrid = std::numeric_limits<std::size_t>::max();

/// Term-insurance kernels m_u on a uniform node set u_j = j T / (n - 1).
struct TermTables {
    HazardModel model;
    std::vector<double> nodes;
    std::vector<ProjectionTable> tables;
};

/// Requires at least two nodes.
TermTables build_term_tables(const HazardModel& model, std::span<const double> base_grid,
                             int n_nodes, double h_max = kDefaultMaxStep);

// Pointwise strategy and value formulas. `left` is the filter just before t
// (before any death at t), `right` the filter at t. `hint` is the base-grid
// index of t, or kOffGrid.

/// theta_t = beta_t * (cohort - N_{t-}) * pi_{t-}(h).
double pure_endowment_strategy(const MarketModel& market, const Payoff& payoff, double t,
                               double s, const FilterState& left, const ProjectionTable& table,
                               std::size_t hint = kOffGrid);

/// V_t = U_t * B_t with U_t the zero-drift price of the payoff.
double pure_endowment_value(const MarketModel& market, const Payoff& payoff, double t, double s,
                            const FilterState& right, const ProjectionTable& table,
                            std::size_t hint = kOffGrid);

/// theta_t = int_t^T B_{t-}(u) beta_t(u) du, trapezoidal on {t} and the nodes above t.
double term_strategy(const MarketModel& market, const Payoff& payoff, double t, double s,
                     const FilterState& left, const TermTables& tables,
                     std::size_t hint = kOffGrid);

/// V_t = realized + int_t^T V(u, t) B_t(u) du.
double term_value(const MarketModel& market, const Payoff& payoff, double t, double s,
                  double realized, const FilterState& right, const TermTables& tables,
                  std::size_t hint = kOffGrid);

struct HedgeRecord {
    double time = 0.0;
    double theta = 0.0;  ///< risky units held over the next step
    double eta = 0.0;    ///< riskless units, value - theta * stock
    double value = 0.0;
    double cost = 0.0;
    double stock = 0.0;
    int n_dead = 0;

    friend bool operator==(const HedgeRecord&, const HedgeRecord&) = default;
};

struct ScenarioResult {
    std::vector<HedgeRecord> records;
    double payoff = 0.0;             ///< G_T
    double terminal_cost = 0.0;      ///< C_T
    double integral_theta_ds = 0.0;  ///< left-point sum of theta dS
    double cost_drift = 0.0;         ///< C_T - C_start
    double martingale_sum = 0.0;     ///< sum of Delta M over the path
    double mmm_density = 1.0;        ///< L_T / L_start
    double initial_value = 0.0;
    int n_dead = 0;                  ///< N_T
};

/// One time point of a simulated path.
struct TimePoint {
    double time = 0.0;
    std::size_t base_index = kOffGrid;
    int deaths = 0;
};

/// Simulated inputs for one hedging run: time points (base grid merged with
/// death times) and the asset price at each point.
struct PathInput {
    std::vector<TimePoint> points;
    std::vector<double> stock;
};

/// Hedging state at an intermediate time, used to restart a run.
struct Checkpoint {
    std::size_t base_index = 0;
    double stock = 0.0;
    double realized = 0.0;
    FilterState filter;
};

/// Shared, immutable setup for hedging runs: the base grid, the projection
/// tables and the model parameters. Runs for different paths are independent.
class HedgingEngine {
   public:
    HedgingEngine(HazardModel hazard, MarketModel market, ClaimSpec claim, int cohort,
                  int grid_steps, int quadrature_nodes, double h_max = kDefaultMaxStep);

    const HazardModel& hazard() const noexcept { return hazard_; }
    const MarketModel& market() const noexcept { return market_; }
    const ClaimSpec& claim() const noexcept { return claim_; }
    int cohort() const noexcept { return cohort_; }
    double horizon() const noexcept { return hazard_.horizon(); }
    const std::vector<double>& base_grid() const noexcept { return grid_; }
    const ProjectionTable& pure_table() const noexcept { return *pure_table_; }
    const TermTables& term_tables() const { return term_tables_.value(); }
    double h_max() const noexcept { return h_max_; }

    double strategy(double t, std::size_t hint, double s, const FilterState& left) const;
    double value(double t, std::size_t hint, double s, const FilterState& right,
                 double realized) const;

    /// G_0: the value at time zero before any observation.
    double initial_value() const;

    /// Samples chain, lifetimes and prices for path `path_index` from time 0.
    PathInput sample_path(std::uint64_t master_seed, std::uint64_t path_index,
                          ChainPath* chain_out = nullptr,
                          PortfolioPath* deaths_out = nullptr) const;

    /// Samples a future from `from`: hidden state drawn from the filter,
    /// fresh chain, residual lifetimes of the survivors and prices.
    PathInput sample_future(const Checkpoint& from, Rng& rng) const;

    /// Hedges along `path` starting from `start` (the filter at points[0]).
    ScenarioResult run(const PathInput& path, const FilterState& start,
                       double realized = 0.0) const;

    /// sample_path + run from the initial filter.
    ScenarioResult run_path(std::uint64_t master_seed, std::uint64_t path_index) const;

    /// State of a path at base-grid index `base_index`.
    Checkpoint checkpoint(const PathInput& path, std::size_t base_index) const;

   private:
    PathInput assemble(std::size_t first_index, double s_start, const PortfolioPath& deaths,
                       Rng& price_rng) const;

    HazardModel hazard_;
    MarketModel market_;
    ClaimSpec claim_;
    int cohort_;
    double h_max_;
    std::vector<double> grid_;
    std::optional<ProjectionTable> pure_table_;
    std::optional<TermTables> term_tables_;
};

/// run_hedge: full scenario for one path of a master seed.
ScenarioResult run_hedge(const HedgingEngine& engine, std::uint64_t master_seed,
                         std::uint64_t path_index);

struct RiskEstimate {
    double time = 0.0;
    McEstimate risk;  ///< E[(C_T - C_t)^2 | state at t]
};

/// Conditional Monte Carlo estimate of the risk process along the base path
/// (master_seed, path_index): at each checkpoint, futures are resimulated
/// from the observed state and hedged to T.
std::vector<RiskEstimate> risk_process_estimate(const HedgingEngine& engine,
                                                std::uint64_t master_seed,
                                                std::uint64_t path_index,
                                                std::span<const double> checkpoints,
                                                std::size_t n_paths);

/// Uniform grid of `steps` intervals on [0, horizon].
std::vector<double> uniform_grid(double horizon, int steps);

/// CSV with columns time,theta,eta,value,cost,stock,n_dead.
void write_hedge_csv(std::ostream& os, const ScenarioResult& result);

}  // namespace lrm
