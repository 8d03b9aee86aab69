#include "lrm/filter.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

#include <unsupported/Eigen/MatrixFunctions>

#include "lrm/csv.hpp"

namespace lrm {

namespace {

constexpr double kNegativeTolerance = 1e-12;

// One RK4 step of y' = A y is y <- P y with P the degree-4 Taylor polynomial
// of exp(hA); forming P once per piece is algebraically the same integrator.
Matrix rk4_propagator(const Matrix& a, double h) {
    const Eigen::Index n = a.rows();
    const Matrix ha = h * a;
    Matrix p = Matrix::Identity(n, n);
    Matrix term = Matrix::Identity(n, n);
    for (int k = 1; k <= 4; ++k) {
        term = term * ha / static_cast<double>(k);
        p += term;
    }
    return p;
}

void renormalize(FilterState& s) {
    for (Eigen::Index i = 0; i < s.rho.size(); ++i) {
        if (s.rho[i] < -kNegativeTolerance) {
            throw std::runtime_error("filter mass became negative; step too large");
        }
        if (s.rho[i] < 0.0) s.rho[i] = 0.0;
    }
    const double mass = s.rho.sum();
    if (!(mass > 0.0) || !std::isfinite(mass)) {
        throw std::runtime_error("filter mass is not positive");
    }
    s.log_mass += std::log(mass);
    s.rho /= mass;
    s.pi = s.rho;
}

// Event times: grid points and deaths inside (grid.front(), grid.back()].
struct Event {
    double time;
    int deaths;
    bool on_grid;
};

std::vector<Event> merge_events(const PortfolioPath& portfolio, std::span<const double> grid) {
    std::vector<Event> events;
    events.reserve(grid.size() + portfolio.death_times.size());
    std::size_t d = 0;
    const auto& deaths = portfolio.death_times;
    while (d < deaths.size() && deaths[d] <= grid.front()) ++d;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        while (d < deaths.size() && deaths[d] < grid[i]) {
            if (!events.empty() && events.back().time == deaths[d]) {
                ++events.back().deaths;
            } else {
                events.push_back({deaths[d], 1, false});
            }
            ++d;
        }
        int at = 0;
        while (d < deaths.size() && deaths[d] == grid[i]) {
            ++at;
            ++d;
        }
        events.push_back({grid[i], at, true});
    }
    return events;
}

void check_grid(std::span<const double> grid) {
    if (grid.empty()) throw std::invalid_argument("filter grid is empty");
    for (std::size_t i = 1; i < grid.size(); ++i) {
        if (!(grid[i] > grid[i - 1])) throw std::invalid_argument("filter grid must increase");
    }
}

template <class Advance, class Jump>
FilterTrajectory drive(const HazardModel& model, const PortfolioPath& deaths,
                       std::span<const double> grid, Advance&& advance, Jump&& jump) {
    check_grid(grid);
    FilterTrajectory out;
    out.grid.assign(grid.begin(), grid.end());
    FilterState state = FilterState::initial(model, deaths.cohort, grid.front());
    out.states.push_back(state);
    const auto events = merge_events(deaths, grid);
    for (std::size_t k = 1; k < events.size(); ++k) {
        const Event& e = events[k];
        state = advance(state, e.time - state.time);
        state.time = e.time;
        if (e.deaths > 0) {
            out.states.push_back(state);
            for (int j = 0; j < e.deaths; ++j) state = jump(state);
        }
        out.states.push_back(state);
    }
    return out;
}

}  // namespace

FilterState FilterState::initial(const HazardModel& model, int cohort, double time) {
    FilterState s;
    s.time = time;
    s.cohort = cohort;
    s.n_dead = 0;
    s.pi = model.initial_dist();
    s.rho = s.pi;
    s.log_mass = 0.0;
    return s;
}

FilterState propagate(const FilterState& state, const HazardModel& model, double dt,
                      double h_max) {
    if (dt < 0.0) throw std::invalid_argument("propagate: negative dt");
    if (!(h_max > 0.0)) throw std::invalid_argument("propagate: h_max must be positive");
    FilterState out = state;
    if (dt == 0.0) return out;

    const double t0 = state.time;
    const double t1 = state.time + dt;
    std::vector<double> cuts{t0};
    for (double b : model.breakpoints_between(t0, t1)) cuts.push_back(b);
    cuts.push_back(t1);

    const Matrix qt = model.generator().transpose();
    const double survivors = static_cast<double>(state.survivors());
    for (std::size_t p = 0; p + 1 < cuts.size(); ++p) {
        const double len = cuts[p + 1] - cuts[p];
        if (len <= 0.0) continue;
        const auto steps = static_cast<long>(std::ceil(len / h_max - 1e-9));
        const double h = len / static_cast<double>(std::max(1L, steps));
        Matrix a = qt;
        a.diagonal() -= survivors * model.rates_at(cuts[p]);
        const Matrix prop = rk4_propagator(a, h);
        for (long k = 0; k < std::max(1L, steps); ++k) {
            out.rho = prop * out.rho;
            renormalize(out);
        }
    }
    out.time = t1;
    return out;
}

FilterState jump_update(const FilterState& state, const HazardModel& model) {
    if (state.n_dead >= state.cohort) {
        throw std::logic_error("jump_update: cohort already exhausted");
    }
    const Vector& rates = model.rates_before(state.time);
    Vector weighted = rates.cwiseProduct(state.pi);
    const double predicted = weighted.sum();
    if (!(predicted > 0.0)) throw std::runtime_error("jump_update: zero predicted intensity");
    FilterState out = state;
    out.pi = weighted / predicted;
    out.rho = out.pi;
    out.log_mass += std::log(static_cast<double>(state.survivors()) * predicted);
    out.n_dead += 1;
    return out;
}

FilterTrajectory run_filter(const HazardModel& model, const PortfolioPath& deaths,
                            std::span<const double> grid, double h_max) {
    return drive(
        model, deaths, grid,
        [&](const FilterState& s, double dt) { return propagate(s, model, dt, h_max); },
        [&](const FilterState& s) { return jump_update(s, model); });
}

FilterTrajectory discrete_oracle(const HazardModel& model, const PortfolioPath& deaths,
                                 double step, std::span<const double> grid) {
    if (!(step > 0.0)) throw std::invalid_argument("discrete_oracle: step must be positive");
    const Matrix qt = model.generator().transpose();
    const Matrix full_step = (qt * step).exp();

    auto cell = [&](FilterState& s, double dt) {
        const Matrix transition = (dt == step) ? full_step : Matrix((qt * dt).exp());
        s.rho = transition * s.rho;
        const Vector& rates = model.rates_at(s.time);
        const double survivors = static_cast<double>(s.survivors());
        for (Eigen::Index x = 0; x < s.rho.size(); ++x) {
            s.rho[x] *= std::exp(-survivors * rates[x] * dt);
        }
        renormalize(s);
        s.time += dt;
    };
    auto advance = [&](const FilterState& s, double dt) {
        FilterState out = s;
        const double end = s.time + dt;
        std::vector<double> cuts = model.breakpoints_between(s.time, end);
        cuts.push_back(end);
        for (double cut : cuts) {
            while (cut - out.time > 1e-15) {
                const double h = std::min(step, cut - out.time);
                cell(out, h);
            }
            out.time = cut;
        }
        return out;
    };
    auto jump = [&](const FilterState& s) {
        FilterState out = s;
        const Vector& rates = model.rates_before(s.time);
        const double survivors = static_cast<double>(s.survivors());
        for (Eigen::Index x = 0; x < out.rho.size(); ++x) out.rho[x] *= survivors * rates[x];
        renormalize(out);
        out.n_dead += 1;
        return out;
    };
    return drive(model, deaths, grid, advance, jump);
}

McEstimate feynman_kac_oracle(const HazardModel& model, const Vector& start_pi, double s,
                              double t, int cohort, int n_dead, const Vector& f,
                              std::size_t n_samples, std::uint64_t seed) {
    if (!(s < t)) throw std::invalid_argument("feynman_kac_oracle: need s < t");
    if (n_samples < 1) throw std::invalid_argument("feynman_kac_oracle: need n_samples >= 1");
    if (f.size() != model.n_states() || start_pi.size() != model.n_states()) {
        throw std::invalid_argument("feynman_kac_oracle: dimension mismatch");
    }
    Rng rng(seed);
    const double survivors = static_cast<double>(cohort - n_dead);
    RunningStats stats;
    for (std::size_t i = 0; i < n_samples; ++i) {
        const int x0 = rng.categorical(start_pi);
        const ChainPath path = sample_chain_path(model, s, t, x0, rng);
        const double weight = std::exp(-survivors * cumulative_hazard(model, path, s, t));
        stats.add(f[path.states.back()] * weight);
    }
    return stats.estimate();
}

double total_variation(const Vector& p, const Vector& q) { return 0.5 * (p - q).cwiseAbs().sum(); }

double max_total_variation(const FilterTrajectory& a, const FilterTrajectory& b) {
    if (a.states.size() != b.states.size()) {
        throw std::invalid_argument("trajectories have different lengths");
    }
    double worst = 0.0;
    for (std::size_t i = 0; i < a.states.size(); ++i) {
        if (a.states[i].time != b.states[i].time) {
            throw std::invalid_argument("trajectories are not aligned in time");
        }
        worst = std::max(worst, total_variation(a.states[i].pi, b.states[i].pi));
    }
    return worst;
}

void write_filter_csv(std::ostream& os, const FilterTrajectory& trajectory) {
    const Eigen::Index n = trajectory.states.empty() ? 0 : trajectory.states.front().pi.size();
    os << "time,n_dead";
    for (Eigen::Index x = 0; x < n; ++x) os << ",pi_" << x;
    os << ",log_mass\n";
    for (const FilterState& s : trajectory.states) {
        write_number(os, s.time);
        os << ',' << s.n_dead;
        for (Eigen::Index x = 0; x < n; ++x) {
            os << ',';
            write_number(os, s.pi[x]);
        }
        os << ',';
        write_number(os, s.log_mass);
        os << '\n';
    }
}

}  // namespace lrm
