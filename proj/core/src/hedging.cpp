#include "lrm/hedging.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

#include "lrm/csv.hpp"

namespace lrm {

namespace {

// B at time t from a table, avoiding a copy when t sits on the table grid.
double projected_from(const FilterState& filter, const ProjectionTable& table, double t,
                      std::size_t hint) {
    if (filter.survivors() == 0) return 0.0;
    if (hint < table.size() && table.grid()[hint] == t) {
        return projected_count(filter, table.at_index(hint));
    }
    return projected_count(filter, table.at(t));
}

struct TermIntegrals {
    double theta = 0.0;
    double prospective = 0.0;
};

// Trapezoidal rule over {t} and the nodes above t. At u = t the kernel is
// lambda(t-, .) itself, so the first node needs no table.
TermIntegrals term_integrals(const MarketModel& market, const Payoff& payoff, double t, double s,
                             const FilterState* left, const FilterState* right,
                             const TermTables& tables, std::size_t hint) {
    TermIntegrals out;
    if (tables.nodes.size() < 2) throw std::invalid_argument("term quadrature needs >= 2 nodes");
    if (t >= tables.nodes.back()) return out;
    const bool want_theta = left && left->survivors() > 0 && payoff.kind != PayoffKind::constant;
    const bool want_value = right && right->survivors() > 0;
    if (!want_theta && !want_value) return out;

    const Vector& rate_now = tables.model.rates_before(t);
    double prev_u = t;
    double prev_theta = 0.0;
    double prev_value = 0.0;
    {
        const PriceDelta pd = price_and_delta(market, payoff, t, s, t);
        if (want_theta) prev_theta = projected_count(*left, rate_now) * pd.delta;
        if (want_value) prev_value = projected_count(*right, rate_now) * pd.value;
    }
    auto first = std::upper_bound(tables.nodes.begin(), tables.nodes.end(), t);
    for (auto j = static_cast<std::size_t>(first - tables.nodes.begin());
         j < tables.nodes.size(); ++j) {
        const double u = tables.nodes[j];
        const ProjectionTable& table = tables.tables[j];
        const PriceDelta pd = price_and_delta(market, payoff, t, s, u);
        double f_theta = 0.0;
        double f_value = 0.0;
        if (want_theta) f_theta = projected_from(*left, table, t, hint) * pd.delta;
        if (want_value) f_value = projected_from(*right, table, t, hint) * pd.value;
        const double w = 0.5 * (u - prev_u);
        out.theta += w * (prev_theta + f_theta);
        out.prospective += w * (prev_value + f_value);
        prev_u = u;
        prev_theta = f_theta;
        prev_value = f_value;
    }
    return out;
}

}  // namespace

TermTables build_term_tables(const HazardModel& model, std::span<const double> base_grid,
                             int n_nodes, double h_max) {
    if (n_nodes < 2) throw std::invalid_argument("term quadrature needs at least 2 nodes");
    if (base_grid.empty()) throw std::invalid_argument("term tables need a grid");
    const double horizon = base_grid.back();
    TermTables out{model, {}, {}};
    out.nodes.reserve(static_cast<std::size_t>(n_nodes));
    for (int j = 0; j < n_nodes; ++j) {
        out.nodes.push_back(j + 1 == n_nodes ? horizon
                                             : horizon * static_cast<double>(j) / (n_nodes - 1));
    }
    out.tables.reserve(out.nodes.size());
    for (double u : out.nodes) {
        if (u == 0.0) {
            // Degenerate kernel at u = 0: only the terminal row.
            out.tables.emplace_back(model, ProjectionKind::term, 0.0, std::vector<double>{0.0},
                                    std::vector<Vector>{model.rates_before(0.0)}, h_max);
        } else {
            out.tables.push_back(solve_term(model, u, base_grid, h_max));
        }
    }
    return out;
}

double pure_endowment_strategy(const MarketModel& market, const Payoff& payoff, double t,
                               double s, const FilterState& left, const ProjectionTable& table,
                               std::size_t hint) {
    const PriceDelta pd = price_and_delta(market, payoff, t, s, table.maturity());
    if (pd.delta == 0.0 || left.survivors() == 0) return 0.0;
    return pd.delta * projected_from(left, table, t, hint);
}

double pure_endowment_value(const MarketModel& market, const Payoff& payoff, double t, double s,
                            const FilterState& right, const ProjectionTable& table,
                            std::size_t hint) {
    const PriceDelta pd = price_and_delta(market, payoff, t, s, table.maturity());
    return pd.value * projected_from(right, table, t, hint);
}

double term_strategy(const MarketModel& market, const Payoff& payoff, double t, double s,
                     const FilterState& left, const TermTables& tables, std::size_t hint) {
    return term_integrals(market, payoff, t, s, &left, nullptr, tables, hint).theta;
}

double term_value(const MarketModel& market, const Payoff& payoff, double t, double s,
                  double realized, const FilterState& right, const TermTables& tables,
                  std::size_t hint) {
    return realized + term_integrals(market, payoff, t, s, nullptr, &right, tables, hint).prospective;
}

std::vector<double> uniform_grid(double horizon, int steps) {
    if (steps < 1) throw std::invalid_argument("grid needs at least one step");
    std::vector<double> grid(static_cast<std::size_t>(steps) + 1);
    for (int i = 0; i <= steps; ++i) grid[static_cast<std::size_t>(i)] = horizon * i / steps;
    grid.back() = horizon;
    return grid;
}

HedgingEngine::HedgingEngine(HazardModel hazard, MarketModel market, ClaimSpec claim, int cohort,
                             int grid_steps, int quadrature_nodes, double h_max)
    : hazard_(std::move(hazard)),
      market_(market),
      claim_(claim),
      cohort_(cohort),
      h_max_(h_max),
      grid_(uniform_grid(hazard_.horizon(), grid_steps)) {
    market_.validate();
    claim_.validate();
    if (cohort_ < 1) throw std::invalid_argument("cohort must be positive");
    if (market_.horizon != hazard_.horizon()) {
        throw std::invalid_argument("market and hazard horizons differ");
    }
    if (claim_.contract == ContractKind::pure_endowment) {
        pure_table_.emplace(solve_pure_endowment(hazard_, grid_, h_max_));
    } else {
        term_tables_.emplace(build_term_tables(hazard_, grid_, quadrature_nodes, h_max_));
    }
}

double HedgingEngine::strategy(double t, std::size_t hint, double s,
                               const FilterState& left) const {
    if (claim_.contract == ContractKind::pure_endowment) {
        return pure_endowment_strategy(market_, claim_.payoff, t, s, left, *pure_table_, hint);
    }
    return term_strategy(market_, claim_.payoff, t, s, left, *term_tables_, hint);
}

double HedgingEngine::value(double t, std::size_t hint, double s, const FilterState& right,
                            double realized) const {
    if (claim_.contract == ContractKind::pure_endowment) {
        return pure_endowment_value(market_, claim_.payoff, t, s, right, *pure_table_, hint);
    }
    return term_value(market_, claim_.payoff, t, s, realized, right, *term_tables_, hint);
}

double HedgingEngine::initial_value() const {
    return value(0.0, 0, market_.s0, FilterState::initial(hazard_, cohort_), 0.0);
}

PathInput HedgingEngine::assemble(std::size_t first_index, double s_start,
                                  const PortfolioPath& deaths, Rng& price_rng) const {
    PathInput path;
    path.points.reserve(grid_.size() - first_index + deaths.death_times.size());
    const double start = grid_[first_index];
    auto d = deaths.death_times.begin();
    while (d != deaths.death_times.end() && *d <= start) ++d;
    for (std::size_t i = first_index; i < grid_.size(); ++i) {
        while (d != deaths.death_times.end() && *d < grid_[i]) {
            if (!path.points.empty() && path.points.back().time == *d) {
                ++path.points.back().deaths;
            } else {
                path.points.push_back({*d, kOffGrid, 1});
            }
            ++d;
        }
        TimePoint p{grid_[i], i, 0};
        while (d != deaths.death_times.end() && *d == grid_[i]) {
            ++p.deaths;
            ++d;
        }
        path.points.push_back(p);
    }
    std::vector<double> times(path.points.size());
    std::transform(path.points.begin(), path.points.end(), times.begin(),
                   [](const TimePoint& p) { return p.time; });
    path.stock = simulate_price(market_, times, s_start, price_rng);
    return path;
}

PathInput HedgingEngine::sample_path(std::uint64_t master_seed, std::uint64_t path_index,
                                     ChainPath* chain_out, PortfolioPath* deaths_out) const {
    Rng chain_rng(derive_seed(master_seed, path_index, Stream::chain));
    Rng life_rng(derive_seed(master_seed, path_index, Stream::lifetimes));
    Rng price_rng(derive_seed(master_seed, path_index, Stream::price));
    ChainPath chain = sample_chain_path(hazard_, horizon(), chain_rng);
    PortfolioPath deaths = sample_lifetimes(hazard_, chain, cohort_, life_rng);
    PathInput path = assemble(0, market_.s0, deaths, price_rng);
    if (chain_out) *chain_out = std::move(chain);
    if (deaths_out) *deaths_out = std::move(deaths);
    return path;
}

PathInput HedgingEngine::sample_future(const Checkpoint& from, Rng& rng) const {
    const double t0 = grid_.at(from.base_index);
    PortfolioPath deaths{from.filter.survivors(), {}};
    if (t0 < horizon()) {
        const int x0 = rng.categorical(from.filter.pi);
        const ChainPath chain = sample_chain_path(hazard_, t0, horizon(), x0, rng);
        deaths = sample_lifetimes(hazard_, chain, from.filter.survivors(), rng);
    }
    return assemble(from.base_index, from.stock, deaths, rng);
}

ScenarioResult HedgingEngine::run(const PathInput& path, const FilterState& start,
                                  double realized) const {
    if (path.points.empty() || path.points.size() != path.stock.size()) {
        throw std::invalid_argument("hedge path is empty or inconsistent");
    }
    if (start.time != path.points.front().time) {
        throw std::invalid_argument("start filter is not at the first path point");
    }
    const bool term = claim_.contract == ContractKind::term;
    ScenarioResult out;
    out.records.reserve(path.points.size());

    FilterState state = start;
    double gains = 0.0;
    auto record = [&](const TimePoint& p, double s, const FilterState& left) {
        HedgeRecord r;
        r.time = p.time;
        r.stock = s;
        if (term) {
            const TermIntegrals ti = term_integrals(market_, claim_.payoff, p.time, s, &left,
                                                    &state, *term_tables_, p.base_index);
            r.theta = ti.theta;
            r.value = realized + ti.prospective;
        } else {
            r.theta = strategy(p.time, p.base_index, s, left);
            r.value = value(p.time, p.base_index, s, state, realized);
        }
        r.eta = r.value - r.theta * s;
        r.cost = r.value - gains;
        r.n_dead = state.n_dead;
        out.records.push_back(r);
    };

    record(path.points.front(), path.stock.front(), state);
    out.initial_value = out.records.front().value;
    double log_density = 0.0;
    const double premium = market_.risk_premium();
    for (std::size_t k = 1; k < path.points.size(); ++k) {
        const TimePoint& p = path.points[k];
        const double s_prev = path.stock[k - 1];
        const double s = path.stock[k];
        const double dt = p.time - path.points[k - 1].time;
        const double theta = out.records.back().theta;
        gains += theta * (s - s_prev);
        out.martingale_sum += (s - s_prev) - market_.mu * s_prev * dt;
        const double dw = (std::log(s / s_prev) -
                           (market_.mu - 0.5 * market_.sigma * market_.sigma) * dt) /
                          market_.sigma;
        log_density += -premium * dw - 0.5 * premium * premium * dt;

        state = propagate(state, hazard_, p.time - state.time, h_max_);
        state.time = p.time;
        const FilterState left = state;
        for (int j = 0; j < p.deaths && state.survivors() > 0; ++j) {
            if (term) realized += claim_.payoff(s);
            state = jump_update(state, hazard_);
        }
        record(p, s, left);
    }

    const double s_end = path.stock.back();
    out.n_dead = state.n_dead;
    out.payoff = term ? realized : claim_.payoff(s_end) * static_cast<double>(state.survivors());
    out.integral_theta_ds = gains;
    out.terminal_cost = out.records.back().cost;
    out.cost_drift = out.terminal_cost - out.records.front().cost;
    out.mmm_density = premium == 0.0 ? 1.0 : std::exp(log_density);
    return out;
}

ScenarioResult HedgingEngine::run_path(std::uint64_t master_seed,
                                       std::uint64_t path_index) const {
    const PathInput path = sample_path(master_seed, path_index);
    return run(path, FilterState::initial(hazard_, cohort_), 0.0);
}

Checkpoint HedgingEngine::checkpoint(const PathInput& path, std::size_t base_index) const {
    Checkpoint cp;
    cp.base_index = base_index;
    cp.filter = FilterState::initial(hazard_, cohort_, path.points.front().time);
    const bool term = claim_.contract == ContractKind::term;
    for (std::size_t k = 0; k < path.points.size(); ++k) {
        const TimePoint& p = path.points[k];
        if (k > 0) {
            cp.filter = propagate(cp.filter, hazard_, p.time - cp.filter.time, h_max_);
            cp.filter.time = p.time;
            for (int j = 0; j < p.deaths && cp.filter.survivors() > 0; ++j) {
                if (term) cp.realized += claim_.payoff(path.stock[k]);
                cp.filter = jump_update(cp.filter, hazard_);
            }
        }
        if (p.base_index == base_index) {
            cp.stock = path.stock[k];
            return cp;
        }
    }
    throw std::out_of_range("checkpoint index not on the path");
}

ScenarioResult run_hedge(const HedgingEngine& engine, std::uint64_t master_seed,
                         std::uint64_t path_index) {
    return engine.run_path(master_seed, path_index);
}

std::vector<RiskEstimate> risk_process_estimate(const HedgingEngine& engine,
                                                std::uint64_t master_seed,
                                                std::uint64_t path_index,
                                                std::span<const double> checkpoints,
                                                std::size_t n_paths) {
    if (n_paths < 1) throw std::invalid_argument("risk estimate needs at least one path");
    const PathInput base = engine.sample_path(master_seed, path_index);
    const auto& grid = engine.base_grid();
    std::vector<RiskEstimate> out;
    for (double t : checkpoints) {
        auto it = std::lower_bound(grid.begin(), grid.end(), t);
        if (it == grid.end() || *it != t) {
            throw std::invalid_argument("risk checkpoints must lie on the base grid");
        }
        const auto index = static_cast<std::size_t>(it - grid.begin());
        RiskEstimate est{t, {0.0, 0.0, n_paths}};
        if (index + 1 == grid.size()) {
            out.push_back(est);  // nothing left to hedge: R_T = 0
            continue;
        }
        const Checkpoint cp = engine.checkpoint(base, index);
        Rng rng(derive_seed(master_seed ^ (index + 1), path_index, Stream::resample));
        RunningStats stats;
        for (std::size_t i = 0; i < n_paths; ++i) {
            const PathInput future = engine.sample_future(cp, rng);
            const ScenarioResult r = engine.run(future, cp.filter, cp.realized);
            stats.add(r.cost_drift * r.cost_drift);
        }
        est.risk = stats.estimate();
        out.push_back(est);
    }
    return out;
}

void write_hedge_csv(std::ostream& os, const ScenarioResult& result) {
    os << "time,theta,eta,value,cost,stock,n_dead\n";
    for (const HedgeRecord& r : result.records) {
        for (double x : {r.time, r.theta, r.eta, r.value, r.cost, r.stock}) {
            write_number(os, x);
            os << ',';
        }
        os << r.n_dead << '\n';
    }
}

}  // namespace lrm
