#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "lrm/hazard.hpp"
#include "lrm/stats.hpp"

namespace lrm {

/// Largest RK4 substep used by the filter and the backward projection solver.
inline constexpr double kDefaultMaxStep = 1e-3;

/// Conditional law of the hidden state given the death counts observed so far.
///
/// `rho` is kept at unit sum; the unnormalized mass of the linearized flow is
/// exp(log_mass) * rho. At a death the log of the predicted intensity
/// pi_{tau-}(Lambda) is added to log_mass, so exp(log_mass) is the likelihood
/// density of the observed death record.
struct FilterState {
    double time = 0.0;
    int cohort = 0;
    int n_dead = 0;
    Vector rho;
    double log_mass = 0.0;
    Vector pi;

    int survivors() const noexcept { return cohort - n_dead; }

    static FilterState initial(const HazardModel& model, int cohort, double time = 0.0);
};

/// Filter snapshots at grid times, plus left and right limits at each death.
struct FilterTrajectory {
    std::vector<double> grid;
    std::vector<FilterState> states;
};

/// Advances the linearized (unnormalized) flow
///   d rho / dt = Q^T rho - (cohort - n_dead) lambda(t, .) o rho
/// by dt with fixed-step RK4 (substep <= h_max, split at rate breakpoints),
/// renormalizing after every substep. No death may occur in the interval.
/// Throws std::runtime_error if a component goes below -1e-12.
FilterState propagate(const FilterState& state, const HazardModel& model, double dt,
                      double h_max = kDefaultMaxStep);

/// Bayes update at a death: pi_new(x) proportional to lambda(tau-, x) pi_old(x).
FilterState jump_update(const FilterState& state, const HazardModel& model);

/// Filter along `grid` (ascending, grid[0] is the start time with law
/// initial_dist) driven by the deaths of `deaths` falling in the grid range.
FilterTrajectory run_filter(const HazardModel& model, const PortfolioPath& deaths,
                            std::span<const double> grid, double h_max = kDefaultMaxStep);

/// Brute-force reference filter on a time-discretized chain: per cell of
/// width <= step apply exp(Q^T dt), then the survival weight
/// exp(-(cohort - n) lambda dt); at a death multiply by (cohort - n) lambda.
/// Cells are cut at grid and death times so the output aligns with run_filter.
FilterTrajectory discrete_oracle(const HazardModel& model, const PortfolioPath& deaths,
                                 double step, std::span<const double> grid);

/// Monte Carlo estimate of the unnormalized mass
///   E[ f(X_t) exp(-int_s^t (cohort - n_dead) lambda(r, X_r) dr) ],  X_s ~ start_pi.
McEstimate feynman_kac_oracle(const HazardModel& model, const Vector& start_pi, double s,
                              double t, int cohort, int n_dead, const Vector& f,
                              std::size_t n_samples, std::uint64_t seed);

double total_variation(const Vector& p, const Vector& q);

/// Largest total-variation distance between matching snapshots. Both
/// trajectories must list the same times.
double max_total_variation(const FilterTrajectory& a, const FilterTrajectory& b);

/// CSV with columns time,n_dead,pi_0,...,pi_{n-1},log_mass.
void write_filter_csv(std::ostream& os, const FilterTrajectory& trajectory);

}  // namespace lrm
