#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <vector>

#include <doctest.h>

#include "fixtures.hpp"
#include "lrm/filter.hpp"
#include "lrm/hedging.hpp"
#include "lrm/projection.hpp"
#include "lrm/rng.hpp"
#include "lrm/stats.hpp"

using namespace lrm;
using fixtures::vec;

namespace {

const Payoff kCall{PayoffKind::call, 100.0};
const Payoff kIdentity{PayoffKind::identity, 0.0};

HedgingEngine engine_for(const HazardModel& hazard, ContractKind kind, Payoff payoff, int cohort,
                         int steps, int nodes = 64, double mu = 0.05) {
    return HedgingEngine(hazard, MarketModel{100.0, mu, 0.2, hazard.horizon()}, ClaimSpec{kind, payoff},
                         cohort, steps, nodes);
}

/// Path on the engine grid with the given deaths and a flat asset price.
PathInput flat_path(const HedgingEngine& engine, const std::vector<double>& deaths, double s) {
    PathInput path;
    const auto& grid = engine.base_grid();
    auto d = deaths.begin();
    for (std::size_t i = 0; i < grid.size(); ++i) {
        while (d != deaths.end() && *d < grid[i]) path.points.push_back({*d++, kOffGrid, 1});
        TimePoint p{grid[i], i, 0};
        while (d != deaths.end() && *d == grid[i]) {
            ++p.deaths;
            ++d;
        }
        path.points.push_back(p);
    }
    path.stock.assign(path.points.size(), s);
    return path;
}

/// Hypothetical jump of B at a death from state s.
double gamma_pure(const FilterState& s, const HazardModel& model, const ProjectionTable& table) {
    if (s.survivors() == 0) return 0.0;
    return b_pure(jump_update(s, model), table) - b_pure(s, table);
}

double predicted_intensity(const FilterState& s, const HazardModel& model) {
    return s.survivors() * s.pi.dot(model.rates_before(s.time));
}

double simpson(double fa, double fm, double fb, double h) { return h * (fa + 4.0 * fm + fb) / 6.0; }

/// Right-limit filter state at every point of an engine path.
std::vector<FilterState> right_states(const HedgingEngine& engine, const PortfolioPath& deaths) {
    const auto traj = run_filter(engine.hazard(), deaths, engine.base_grid(), engine.h_max());
    std::vector<FilterState> out;
    for (std::size_t j = 0; j < traj.states.size(); ++j) {
        if (j + 1 == traj.states.size() || traj.states[j + 1].time > traj.states[j].time)
            out.push_back(traj.states[j]);
    }
    return out;
}

}  // namespace

TEST_CASE("pure endowment strategy examples") {
    const auto one = fixtures::one_state(0.05, 1.0);
    const auto table = solve_pure_endowment(one, fixtures::linspace(0.0, 1.0, 100));
    const MarketModel market{100.0, 0.05, 0.2, 1.0};
    auto f = FilterState::initial(one, 10);
    const double theta = pure_endowment_strategy(market, kCall, 0.0, 100.0, f, table, 0);
    CHECK(theta == doctest::Approx(10.0 * std::exp(-0.05) * fixtures::simpson_cdf(0.1)).epsilon(1e-12));
    CHECK(theta == doctest::Approx(5.135).epsilon(1e-3));
    CHECK(pure_endowment_strategy(market, Payoff{PayoffKind::constant, 5.0}, 0.3, 100.0, f, table) == 0.0);
    f.n_dead = 10;
    CHECK(pure_endowment_strategy(market, kCall, 0.3, 100.0, f, table) == 0.0);
    CHECK(pure_endowment_value(market, kCall, 0.3, 100.0, f, table) == 0.0);
}

TEST_CASE("pure endowment value examples") {
    const auto model = fixtures::reference_hazard();
    const auto table = solve_pure_endowment(model, fixtures::linspace(0.0, 5.0, 100));
    const MarketModel market = fixtures::reference_market();
    auto f = FilterState::initial(model, 10, 5.0);
    f.n_dead = 3;
    CHECK(pure_endowment_value(market, kCall, 5.0, 130.0, f, table) == doctest::Approx(7 * 30.0).epsilon(1e-15));
    auto g = FilterState::initial(model, 10, 2.0);
    const Payoff one{PayoffKind::constant, 1.0};
    CHECK(pure_endowment_value(market, one, 2.0, 77.0, g, table) == doctest::Approx(b_pure(g, table)).epsilon(1e-15));
}

TEST_CASE("term strategy examples") {
    const auto one = fixtures::one_state(0.05, 5.0);
    const auto grid = fixtures::linspace(0.0, 5.0, 500);
    const MarketModel market{100.0, 0.05, 0.2, 5.0};
    const auto tables = build_term_tables(one, grid, 64);
    auto f = FilterState::initial(one, 10, 0.0);
    CHECK(term_strategy(market, Payoff{PayoffKind::constant, 2.0}, 0.0, 100.0, f, tables, 0) == 0.0);
    f.n_dead = 10;
    CHECK(term_strategy(market, kCall, 0.0, 100.0, f, tables, 0) == 0.0);

    // Identity payout: delta(u) = 1, so theta = (cohort - n) (1 - exp(-lambda (T - t))).
    for (double t : {0.0, 1.3, 4.9}) {
        auto s = FilterState::initial(one, 10, t);
        s.n_dead = 3;
        const double exact = 7.0 * (1.0 - std::exp(-0.05 * (5.0 - t)));
        CHECK(term_strategy(market, kIdentity, t, 90.0, s, tables) == doctest::Approx(exact).epsilon(1e-5));
    }
    CHECK(term_strategy(market, kIdentity, 5.0, 90.0, FilterState::initial(one, 10, 5.0), tables) == 0.0);
    CHECK_THROWS_AS(build_term_tables(one, grid, 1), std::invalid_argument);
}

TEST_CASE("term quadrature converges at second order") {
    const auto one = fixtures::one_state(0.5, 5.0);
    const auto grid = fixtures::linspace(0.0, 5.0, 512);
    const MarketModel market{100.0, 0.0, 0.2, 5.0};
    const double exact = 10.0 * (1.0 - std::exp(-0.5 * 5.0));
    const auto f = FilterState::initial(one, 10);
    std::vector<double> errors;
    for (int nodes : {9, 17, 33, 65}) {
        const auto tables = build_term_tables(one, grid, nodes);
        errors.push_back(std::abs(term_strategy(market, kIdentity, 0.0, 100.0, f, tables, 0) - exact));
    }
    for (std::size_t i = 1; i < errors.size(); ++i) {
        INFO(errors[i - 1] << " -> " << errors[i]);
        CHECK(errors[i - 1] / errors[i] == doctest::Approx(4.0).epsilon(0.05));
    }
}

TEST_CASE("term value examples") {
    const auto model = fixtures::reference_hazard();
    const auto grid = fixtures::linspace(0.0, 5.0, 500);
    const MarketModel market = fixtures::reference_market();
    const auto tables = build_term_tables(model, grid, 64);
    const auto pure = solve_pure_endowment(model, grid);

    auto end = FilterState::initial(model, 10, 5.0);
    end.n_dead = 4;
    CHECK(term_value(market, kCall, 5.0, 120.0, 37.5, end, tables) == 37.5);

    // Unit payout: the prospective part is the expected number of future deaths.
    const Payoff one{PayoffKind::constant, 1.0};
    for (double t : {0.0, 1.0, 3.3}) {
        const auto f = FilterState::initial(model, 10, t);
        const double expected = 10.0 * (1.0 - p_hat(f, pure));
        CHECK(term_value(market, one, t, 100.0, 0.0, f, tables) == doctest::Approx(expected).epsilon(1e-4));
    }
}

TEST_CASE("engine construction errors") {
    const auto model = fixtures::reference_hazard();
    CHECK_THROWS_AS(HedgingEngine(model, MarketModel{100, 0.05, 0.2, 4.0},
                                  ClaimSpec{ContractKind::pure_endowment, kCall}, 10, 100, 64),
                    std::invalid_argument);
    CHECK_THROWS_AS(engine_for(model, ContractKind::pure_endowment, kCall, 0, 100), std::invalid_argument);
    CHECK_THROWS_AS(engine_for(model, ContractKind::term, kCall, 10, 100, 1), std::invalid_argument);
    CHECK_THROWS_AS(engine_for(model, ContractKind::term, Payoff{PayoffKind::put, 90.0}, 10, 100),
                    std::invalid_argument);
}

TEST_CASE("run_hedge record invariants and replication") {
    const auto model = fixtures::reference_hazard();
    for (ContractKind kind : {ContractKind::pure_endowment, ContractKind::term}) {
        const auto engine = engine_for(model, kind, kCall, 10, 400, 32);
        for (std::uint64_t i = 0; i < 20; ++i) {
            PortfolioPath deaths;
            const auto path = engine.sample_path(3, i, nullptr, &deaths);
            const auto r = engine.run(path, FilterState::initial(model, 10));
            REQUIRE(r.records.size() == path.points.size());
            double gains = 0.0;
            for (std::size_t k = 0; k < r.records.size(); ++k) {
                const auto& rec = r.records[k];
                CHECK(rec.value == doctest::Approx(rec.theta * rec.stock + rec.eta).epsilon(1e-12).scale(100.0));
                if (k > 0) gains += r.records[k - 1].theta * (rec.stock - r.records[k - 1].stock);
                CHECK(rec.cost == doctest::Approx(rec.value - gains).epsilon(1e-12).scale(100.0));
            }
            CHECK(r.n_dead == static_cast<int>(deaths.death_times.size()));
            CHECK(r.integral_theta_ds == doctest::Approx(gains).epsilon(1e-12));
            const double s_t = path.stock.back();
            if (kind == ContractKind::pure_endowment) {
                CHECK(r.payoff == kCall(s_t) * (10 - r.n_dead));
            }
            CHECK(std::abs(r.records.back().value - r.payoff) / 100.0 < 1e-8);
        }
        CHECK(run_hedge(engine, 3, 0).records == run_hedge(engine, 3, 0).records);
    }
}

TEST_CASE("run_hedge: constant benefit carries pure insurance risk") {
    const auto model = fixtures::reference_hazard();
    const Payoff c{PayoffKind::constant, 2.0};
    const auto engine = engine_for(model, ContractKind::pure_endowment, c, 10, 200);
    for (std::uint64_t i = 0; i < 10; ++i) {
        const auto r = run_hedge(engine, 8, i);
        for (const auto& rec : r.records) {
            CHECK(rec.theta == 0.0);
            CHECK(rec.cost == rec.value);
        }
    }
}

TEST_CASE("run_hedge: overwhelming mortality empties the cohort value") {
    const auto model = fixtures::one_state(50.0, 5.0);
    const auto engine = engine_for(model, ContractKind::pure_endowment, kCall, 10, 500);
    const auto r = run_hedge(engine, 1, 0);
    for (const auto& rec : r.records)
        if (rec.time >= 2.5) CHECK(rec.value < 1e-10);
}

TEST_CASE("known hazard gives the full-information strategy") {
    const auto model = fixtures::one_state(0.05, 5.0);
    const auto engine = engine_for(model, ContractKind::pure_endowment, kCall, 10, 500);
    const MarketModel& market = engine.market();
    for (std::uint64_t i = 0; i < 10; ++i) {
        const auto r = run_hedge(engine, 4, i);
        for (std::size_t k = 0; k < r.records.size(); ++k) {
            const auto& rec = r.records[k];
            const int alive_before = 10 - (k == 0 ? 0 : r.records[k - 1].n_dead);
            const double beta = price_and_delta(market, kCall, rec.time, rec.stock, 5.0).delta;
            const double expected = alive_before * std::exp(-0.05 * (5.0 - rec.time)) * beta;
            CHECK(rec.theta == doctest::Approx(expected).epsilon(1e-12));
        }
    }
}

TEST_CASE("B moves by its death jump against the predicted intensity") {
    // Between deaths dB/dt = -Gamma pi(Lambda), where Gamma is the jump B
    // would take at a death now.
    const auto model = fixtures::reference_hazard();
    const auto table = solve_pure_endowment(model, fixtures::linspace(0.0, 5.0, 5000));
    Rng rng(2);
    for (int trial = 0; trial < 50; ++trial) {
        auto s = FilterState::initial(model, 10, 4.0 * rng.uniform());
        const double p = rng.uniform();
        s.pi = vec({p, 1.0 - p});
        s.rho = s.pi;
        s.n_dead = static_cast<int>(10 * rng.uniform());
        const double h = 1e-4;
        const auto ahead = propagate(s, model, h);
        const double slope = (b_pure(ahead, table) - b_pure(s, table)) / h;
        const double predicted = -gamma_pure(s, model, table) * predicted_intensity(s, model);
        INFO("slope " << slope << " predicted " << predicted);
        CHECK(slope == doctest::Approx(predicted).epsilon(1e-3).scale(1e-3));
    }
}

TEST_CASE("cost reconstructs from the compensated death process") {
    // With a flat asset price and identity payout, U = s and theta dS = 0, so
    // C - C_0 = s (B - B_0) must equal s [sum of jumps Gamma - int Gamma pi(Lambda) dt].
    const auto model = fixtures::reference_hazard();
    const auto engine = engine_for(model, ContractKind::pure_endowment, kIdentity, 10, 2000);
    const auto& table = engine.pure_table();
    const std::vector<double> deaths{0.37, 1.25, 1.25 + 1e-7, 3.0, 4.4};
    const auto path = flat_path(engine, deaths, 100.0);
    const auto r = engine.run(path, FilterState::initial(model, 10));

    const auto traj = run_filter(model, PortfolioPath{10, deaths}, engine.base_grid());
    double k = 0.0;
    std::size_t record = 0;
    for (std::size_t j = 1; j < traj.states.size(); ++j) {
        const auto& a = traj.states[j - 1];
        const auto& b = traj.states[j];
        if (b.time == a.time) {
            const double jump = b_pure(b, table) - b_pure(a, table);
            CHECK(jump == doctest::Approx(gamma_pure(a, model, table)).epsilon(1e-12));
            k += 100.0 * jump;
        } else {
            auto rate = [&](const FilterState& s) {
                return gamma_pure(s, model, table) * predicted_intensity(s, model);
            };
            auto mid = propagate(a, model, 0.5 * (b.time - a.time));
            k -= 100.0 * simpson(rate(a), rate(mid), rate(b), b.time - a.time);
        }
        // Compare on the right-limit state of each time point.
        if (j + 1 == traj.states.size() || traj.states[j + 1].time > b.time) {
            while (record < r.records.size() && r.records[record].time < b.time) ++record;
            REQUIRE(record < r.records.size());
            CHECK(r.records[record].cost - r.records[0].cost == doctest::Approx(k).epsilon(1e-6).scale(1.0));
        }
    }
    CHECK(r.records.back().n_dead == 5);
}

TEST_CASE("cost converges to the integral of U against B") {
    // In a complete market C - C_0 = int U_{t-} dB_t. On a grid the two differ
    // by the discrete delta-hedging residual sum (B_k dU_k - theta_{k-1} dS_k),
    // which must vanish at order sqrt(dt).
    const auto model = fixtures::reference_hazard();
    std::vector<double> rms;
    for (int steps : {250, 1000, 4000}) {
        const auto engine = engine_for(model, ContractKind::pure_endowment, kCall, 10, steps);
        const auto& table = engine.pure_table();
        const MarketModel& market = engine.market();
        RunningStats sq;
        for (std::uint64_t i = 0; i < 200; ++i) {
            PortfolioPath deaths;
            const auto path = engine.sample_path(21, i, nullptr, &deaths);
            const auto r = engine.run(path, FilterState::initial(model, 10));
            const auto states = right_states(engine, deaths);
            REQUIRE(states.size() == r.records.size());
            double k = 0.0;
            double u_prev = price_and_delta(market, kCall, 0.0, path.stock[0], 5.0).value;
            double b_prev = b_pure(states[0], table);
            for (std::size_t j = 1; j < r.records.size(); ++j) {
                const double u = price_and_delta(market, kCall, r.records[j].time, r.records[j].stock, 5.0).value;
                const double b = b_pure(states[j], table);
                CHECK(r.records[j].value == doctest::Approx(u * b).epsilon(1e-12).scale(1e-9));
                k += u_prev * (b - b_prev);
                u_prev = u;
                b_prev = b;
            }
            const double residual = (r.records.back().cost - r.records.front().cost) - k;
            sq.add(residual * residual);
        }
        rms.push_back(std::sqrt(sq.mean()));
    }
    for (std::size_t i = 1; i < rms.size(); ++i) {
        INFO("rms residual " << rms[i - 1] << " -> " << rms[i]);
        CHECK(rms[i - 1] / rms[i] > 1.5);
        CHECK(rms[i - 1] / rms[i] < 2.7);
    }
}

TEST_CASE("term cost reconstructs from the compensated death process") {
    // Unit payout and flat price: V_t = E[N_T | observations], so a death moves
    // C by 1 plus the jump of the projected future deaths, and between deaths C
    // drifts by minus that jump times the predicted intensity. The prospective
    // part is a trapezoidal sum over payment dates, so the identity holds up to
    // a quadrature error that must fall at second order in the node spacing.
    const auto model = fixtures::reference_hazard();
    const Payoff one{PayoffKind::constant, 1.0};
    const std::vector<double> deaths{0.5, 2.25, 3.75};
    std::vector<double> gaps;
    for (int nodes : {17, 33, 65}) {
        const auto engine = engine_for(model, ContractKind::term, one, 10, 1024, nodes);
        const auto& tables = engine.term_tables();
        const MarketModel& market = engine.market();
        const auto r = engine.run(flat_path(engine, deaths, 100.0), FilterState::initial(model, 10));
        CHECK(r.payoff == 3.0);
        auto future = [&](const FilterState& s) {
            return term_value(market, one, s.time, 100.0, 0.0, s, tables, kOffGrid);
        };
        auto gamma = [&](const FilterState& s) {
            return s.survivors() == 0 ? 0.0 : 1.0 + future(jump_update(s, model)) - future(s);
        };
        auto rate = [&](const FilterState& s) { return gamma(s) * predicted_intensity(s, model); };
        const auto traj = run_filter(model, PortfolioPath{10, deaths}, engine.base_grid());
        double k = 0.0;
        for (std::size_t j = 1; j < traj.states.size(); ++j) {
            const auto& a = traj.states[j - 1];
            const auto& b = traj.states[j];
            if (b.time == a.time) {
                k += gamma(a);
            } else {
                const auto mid = propagate(a, model, 0.5 * (b.time - a.time));
                k -= simpson(rate(a), rate(mid), rate(b), b.time - a.time);
            }
        }
        gaps.push_back(std::abs(r.records.back().cost - r.records.front().cost - k));
    }
    CHECK(gaps.back() < 1e-3);
    for (std::size_t i = 1; i < gaps.size(); ++i) {
        INFO("gap " << gaps[i - 1] << " -> " << gaps[i]);
        CHECK(gaps[i - 1] / gaps[i] > 3.0);
    }
}

TEST_CASE("initial value matches the reweighted payoff") {
    const auto model = fixtures::reference_hazard();
    for (ContractKind kind : {ContractKind::pure_endowment, ContractKind::term}) {
        const auto engine = engine_for(model, kind, kCall, 10, 200, 16);
        RunningStats weighted;
        for (int i = 0; i < 10000; ++i) {
            const auto r = run_hedge(engine, 99, static_cast<std::uint64_t>(i));
            weighted.add(r.mmm_density * r.payoff);
        }
        INFO("G_0 " << engine.initial_value() << " mc " << weighted.mean() << " +- " << weighted.std_error());
        CHECK(weighted.estimate().within(engine.initial_value()));
    }
}

TEST_CASE("risk process: terminal value and binomial variance") {
    const auto model = fixtures::one_state(0.1, 5.0);
    const Payoff c{PayoffKind::constant, 2.0};
    const auto engine = engine_for(model, ContractKind::pure_endowment, c, 10, 100);
    const std::vector<double> checkpoints{0.0, 5.0};
    const auto est = risk_process_estimate(engine, 5, 0, checkpoints, 10000);
    REQUIRE(est.size() == 2);
    CHECK(est[1].risk.mean == 0.0);
    const double p = std::exp(-0.5);
    const double expected = 10.0 * p * (1.0 - p) * 4.0;
    INFO("R_0 " << est[0].risk.mean << " +- " << est[0].risk.std_error << " vs " << expected);
    CHECK(est[0].risk.within(expected));
    const std::vector<double> off{0.01};
    CHECK_THROWS_AS(risk_process_estimate(engine, 5, 0, off, 10), std::invalid_argument);
}

TEST_CASE("risk process: financial-only claim carries the delta-hedge residual") {
    const auto model = fixtures::one_state(1e-8, 0.25);
    const auto engine = engine_for(model, ContractKind::pure_endowment, kCall, 1, 100);
    const std::vector<double> checkpoints{0.0};
    const auto est = risk_process_estimate(engine, 6, 0, checkpoints, 20000);

    const auto& grid = engine.base_grid();
    const MarketModel& market = engine.market();
    RunningStats residual;
    for (int i = 0; i < 20000; ++i) {
        const auto p = simulate_price(market, grid, derive_seed(77, i, Stream::price));
        double v = price_and_delta(market, kCall, 0.0, p[0], 0.25).value;
        for (std::size_t k = 0; k + 1 < grid.size(); ++k)
            v += price_and_delta(market, kCall, grid[k], p[k], 0.25).delta * (p[k + 1] - p[k]);
        const double e = kCall(p.back()) - v;
        residual.add(e * e);
    }
    const double se = std::hypot(est[0].risk.std_error, residual.std_error());
    INFO("R_0 " << est[0].risk.mean << " oracle " << residual.mean() << " se " << se);
    CHECK(std::abs(est[0].risk.mean - residual.mean()) <= 3.0 * se);
}

TEST_CASE("hedge CSV layout") {
    const auto engine = engine_for(fixtures::reference_hazard(), ContractKind::pure_endowment, kCall, 10, 100);
    const auto r = run_hedge(engine, 1, 0);
    std::ostringstream os;
    write_hedge_csv(os, r);
    std::istringstream is(os.str());
    std::string line;
    std::getline(is, line);
    CHECK(line == "time,theta,eta,value,cost,stock,n_dead");
    int rows = 0;
    while (std::getline(is, line)) ++rows;
    CHECK(rows == static_cast<int>(r.records.size()));
}
