#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <vector>

#include "lrm/filter.hpp"
#include "lrm/hazard.hpp"

namespace lrm {

enum class ProjectionKind { pure_endowment, term };

/// Backward solution m(t, x) of
///   dm/dt + Q m - lambda(t, .) o m = 0
/// on [0, maturity], with terminal value 1 (pure endowment, maturity = T) or
/// lambda(u, .) (term insurance kernel, maturity = u).
///
/// The auxiliary survival factor Y enters the Markov generator only through
/// -lambda y d/dy, so the y-dependent projections factor as y * m(t, x); the
/// table therefore stores m alone.
class ProjectionTable {
   public:
    ProjectionTable(const HazardModel& model, ProjectionKind kind, double maturity,
                    std::vector<double> grid, std::vector<Vector> values, double h_max);

    ProjectionKind kind() const noexcept { return kind_; }
    double maturity() const noexcept { return maturity_; }
    const std::vector<double>& grid() const noexcept { return grid_; }
    const Vector& at_index(std::size_t i) const noexcept { return values_[i]; }
    std::size_t size() const noexcept { return grid_.size(); }

    /// m(t, .). Off-grid times are reached by RK4 from the next grid node,
    /// so off-grid values carry the same integrator accuracy as grid values.
    Vector at(double t) const;

    /// Value at base-grid index `hint` when grid()[hint] == t, else at(t).
    Vector at(double t, std::size_t hint) const;

   private:
    HazardModel model_;
    ProjectionKind kind_;
    double maturity_;
    std::vector<double> grid_;
    std::vector<Vector> values_;
    double h_max_;
};

/// m(t, x) = E[exp(-int_t^T lambda(s, X_s) ds) | X_t = x]; grid spans [0, T].
ProjectionTable solve_pure_endowment(const HazardModel& model, std::span<const double> grid,
                                     double h_max = kDefaultMaxStep);

/// m_u(t, x) = E[lambda(u, X_u) exp(-int_t^u lambda(s, X_s) ds) | X_t = x] on
/// the points of `grid` below u plus u itself.
ProjectionTable solve_term(const HazardModel& model, double u, std::span<const double> grid,
                           double h_max = kDefaultMaxStep);

/// Filtered survival projection: sum_x pi(x) m(t, x).
double p_hat(const FilterState& filter, const ProjectionTable& table);

/// B_t = (cohort - N_t) * p_hat: projected number of survivors at maturity.
double b_pure(const FilterState& filter, const ProjectionTable& table);

/// B_t(u) = (cohort - N_t) * sum_x pi(x) m_u(t, x): projected death intensity at u.
double b_term(const FilterState& filter, const ProjectionTable& table_u);

/// Same as b_pure / b_term with m(t, .) already looked up.
double projected_count(const FilterState& filter, const Vector& m) noexcept;

/// CSV with columns time,m_0,...,m_{n-1}.
void write_projection_csv(std::ostream& os, const ProjectionTable& table);

}  // namespace lrm
