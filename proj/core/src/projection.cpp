#include "lrm/projection.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

#include "lrm/csv.hpp"

namespace lrm {

namespace {

// Integrates m backwards from (t_from, m) to t_to < t_from. In reversed time
// s = t_from - t the system reads dm/ds = (Q - diag(lambda)) m.
Vector integrate_backward(const HazardModel& model, Vector m, double t_from, double t_to,
                          double h_max) {
    std::vector<double> cuts{t_from};
    auto inner = model.breakpoints_between(t_to, t_from);
    for (auto it = inner.rbegin(); it != inner.rend(); ++it) cuts.push_back(*it);
    cuts.push_back(t_to);

    Vector k1, k2, k3, k4;
    for (std::size_t p = 0; p + 1 < cuts.size(); ++p) {
        const double hi = cuts[p];
        const double lo = cuts[p + 1];
        const double len = hi - lo;
        if (len <= 0.0) continue;
        // lambda is constant on (lo, hi); take its value just right of lo.
        Matrix a = model.generator();
        a.diagonal() -= model.rates_at(lo);
        const auto steps = std::max(1L, static_cast<long>(std::ceil(len / h_max - 1e-9)));
        const double h = len / static_cast<double>(steps);
        for (long k = 0; k < steps; ++k) {
            k1 = a * m;
            k2 = a * (m + 0.5 * h * k1);
            k3 = a * (m + 0.5 * h * k2);
            k4 = a * (m + h * k3);
            m += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        }
    }
    if (!m.allFinite()) throw std::runtime_error("projection produced non-finite values");
    return m;
}

ProjectionTable solve(const HazardModel& model, ProjectionKind kind, double maturity,
                      std::vector<double> grid, Vector terminal, double h_max) {
    if (grid.empty() || grid.back() != maturity) {
        throw std::invalid_argument("projection grid must end at the maturity");
    }
    for (std::size_t i = 1; i < grid.size(); ++i) {
        if (!(grid[i] > grid[i - 1])) throw std::invalid_argument("projection grid must increase");
    }
    std::vector<Vector> values(grid.size());
    values.back() = std::move(terminal);
    for (std::size_t i = grid.size() - 1; i > 0; --i) {
        values[i - 1] = integrate_backward(model, values[i], grid[i], grid[i - 1], h_max);
    }
    return ProjectionTable(model, kind, maturity, std::move(grid), std::move(values), h_max);
}

}  // namespace

ProjectionTable::ProjectionTable(const HazardModel& model, ProjectionKind kind, double maturity,
                                 std::vector<double> grid, std::vector<Vector> values,
                                 double h_max)
    : model_(model),
      kind_(kind),
      maturity_(maturity),
      grid_(std::move(grid)),
      values_(std::move(values)),
      h_max_(h_max) {}

Vector ProjectionTable::at(double t) const {
    if (t > maturity_ || t < grid_.front()) {
        throw std::out_of_range("projection table queried outside its grid");
    }
    auto it = std::lower_bound(grid_.begin(), grid_.end(), t);
    const auto j = static_cast<std::size_t>(it - grid_.begin());
    if (grid_[j] == t) return values_[j];
    return integrate_backward(model_, values_[j], grid_[j], t, h_max_);
}

Vector ProjectionTable::at(double t, std::size_t hint) const {
    if (hint < grid_.size() && grid_[hint] == t) return values_[hint];
    return at(t);
}

ProjectionTable solve_pure_endowment(const HazardModel& model, std::span<const double> grid,
                                     double h_max) {
    if (grid.empty()) throw std::invalid_argument("projection grid is empty");
    if (grid.back() != model.horizon()) {
        throw std::invalid_argument("pure endowment grid must end at the horizon");
    }
    return solve(model, ProjectionKind::pure_endowment, grid.back(),
                 std::vector<double>(grid.begin(), grid.end()),
                 Vector::Ones(model.n_states()), h_max);
}

ProjectionTable solve_term(const HazardModel& model, double u, std::span<const double> grid,
                           double h_max) {
    if (!(u > 0.0)) throw std::invalid_argument("term maturity must be positive");
    std::vector<double> g;
    for (double t : grid) {
        if (t < u) g.push_back(t);
    }
    g.push_back(u);
    // lambda(u-, .) is the intensity relevant at the payment instant u.
    return solve(model, ProjectionKind::term, u, std::move(g), model.rates_before(u), h_max);
}

double projected_count(const FilterState& filter, const Vector& m) noexcept {
    return static_cast<double>(filter.survivors()) * filter.pi.dot(m);
}

double p_hat(const FilterState& filter, const ProjectionTable& table) {
    if (table.kind() != ProjectionKind::pure_endowment) {
        throw std::invalid_argument("p_hat needs a pure-endowment table");
    }
    return filter.pi.dot(table.at(filter.time));
}

double b_pure(const FilterState& filter, const ProjectionTable& table) {
    if (filter.survivors() == 0) return 0.0;
    return static_cast<double>(filter.survivors()) * p_hat(filter, table);
}

double b_term(const FilterState& filter, const ProjectionTable& table_u) {
    if (table_u.kind() != ProjectionKind::term) {
        throw std::invalid_argument("b_term needs a term-insurance table");
    }
    if (filter.time > table_u.maturity()) {
        throw std::out_of_range("b_term evaluated after the payment time");
    }
    if (filter.survivors() == 0) return 0.0;
    return projected_count(filter, table_u.at(filter.time));
}

void write_projection_csv(std::ostream& os, const ProjectionTable& table) {
    const Eigen::Index n = table.size() ? table.at_index(0).size() : 0;
    os << "time";
    for (Eigen::Index x = 0; x < n; ++x) os << ",m_" << x;
    os << '\n';
    for (std::size_t i = 0; i < table.size(); ++i) {
        write_number(os, table.grid()[i]);
        for (Eigen::Index x = 0; x < n; ++x) {
            os << ',';
            write_number(os, table.at_index(i)[x]);
        }
        os << '\n';
    }
}

}  // namespace lrm
