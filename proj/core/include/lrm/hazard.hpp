#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "lrm/rng.hpp"

namespace lrm {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Hidden-state mortality model.
///
/// The hazard-driving factor is a continuous-time Markov chain on
/// {0, ..., n_states-1} with generator Q. Each individual of the cohort has
/// death intensity lambda(t, X_t), where lambda is piecewise constant in time:
/// on [rate_times[i], rate_times[i+1]) it equals rates[i] (one entry per
/// state). The last row extends past the horizon. Times are in years, rates
/// in 1/year.
class HazardModel {
   public:
    HazardModel(Matrix generator, std::vector<double> rate_times, std::vector<Vector> rates,
                double horizon, Vector initial_dist);

    /// Time-homogeneous hazard: one rate per state for all t.
    static HazardModel homogeneous(Matrix generator, Vector rates, double horizon,
                                   Vector initial_dist);

    int n_states() const noexcept { return static_cast<int>(generator_.rows()); }
    const Matrix& generator() const noexcept { return generator_; }
    double horizon() const noexcept { return horizon_; }
    const Vector& initial_dist() const noexcept { return initial_dist_; }
    const std::vector<double>& rate_times() const noexcept { return rate_times_; }
    const std::vector<Vector>& rate_table() const noexcept { return rates_; }

    /// lambda(t, .), right-continuous in t.
    const Vector& rates_at(double t) const noexcept;
    /// lambda(t-, .); differs from rates_at only at a rate breakpoint.
    const Vector& rates_before(double t) const noexcept;
    double rate(double t, int state) const noexcept { return rates_at(t)[state]; }

    /// Rate breakpoints lying strictly inside (a, b), ascending.
    std::vector<double> breakpoints_between(double a, double b) const;

    /// Total exit rate -Q(x,x).
    double exit_rate(int state) const noexcept { return -generator_(state, state); }

   private:
    std::size_t interval_index(double t) const noexcept;

    Matrix generator_;
    std::vector<double> rate_times_;
    std::vector<Vector> rates_;
    double horizon_;
    Vector initial_dist_;
};

/// Trajectory of the hidden chain on [t_start, t_end]. states[0] holds on
/// [t_start, jump_times[0]), states[k] on [jump_times[k-1], jump_times[k]).
struct ChainPath {
    std::vector<double> jump_times;
    std::vector<int> states;
    double t_start = 0.0;
    double t_end = 0.0;

    int state_at(double t) const noexcept;
    /// Left limit X_{t-}.
    int state_before(double t) const noexcept;

    friend bool operator==(const ChainPath&, const ChainPath&) = default;
};

/// Death record of a cohort of `cohort` individuals. Only deaths inside the
/// simulated window are listed; individuals surviving it are censored.
struct PortfolioPath {
    int cohort = 0;
    std::vector<double> death_times;

    friend bool operator==(const PortfolioPath&, const PortfolioPath&) = default;
};

ChainPath sample_chain_path(const HazardModel& model, double t_end, std::uint64_t seed);
/// Initial state drawn from model.initial_dist().
ChainPath sample_chain_path(const HazardModel& model, double t_end, Rng& rng);
/// Chain started in `initial_state` at `t_start`.
ChainPath sample_chain_path(const HazardModel& model, double t_start, double t_end,
                            int initial_state, Rng& rng);

/// Conditionally independent lifetimes given the chain path, sampled by
/// inverting the cumulative hazard along the path.
PortfolioPath sample_lifetimes(const HazardModel& model, const ChainPath& chain, int cohort,
                               std::uint64_t seed);
PortfolioPath sample_lifetimes(const HazardModel& model, const ChainPath& chain, int cohort,
                               Rng& rng);

/// N_t: number of deaths at or before t.
int count_process(const PortfolioPath& portfolio, double t) noexcept;

/// Lambda_t = (cohort - n_dead) * lambda(t, state).
double intensity(const HazardModel& model, int cohort, int n_dead, double t, int state);

/// Integral of lambda(u, X_u) over [from, to] along the chain path, in closed form.
double cumulative_hazard(const HazardModel& model, const ChainPath& chain, double from,
                         double to);

/// exp(-int_s^{s+t} lambda(u, X_u) du).
double survival_factor(const HazardModel& model, const ChainPath& chain, double s, double t);

}  // namespace lrm
