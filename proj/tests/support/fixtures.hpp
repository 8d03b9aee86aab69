#pragma once

#include <cmath>
#include <vector>

#include "lrm/hazard.hpp"
#include "lrm/market.hpp"
#include "lrm/scenario.hpp"

namespace fixtures {

inline lrm::Matrix mat2(double a, double b, double c, double d) {
    lrm::Matrix m(2, 2);
    m << a, b, c, d;
    return m;
}

inline lrm::Vector vec(std::initializer_list<double> xs) {
    lrm::Vector v(static_cast<Eigen::Index>(xs.size()));
    Eigen::Index i = 0;
    for (double x : xs) v[i++] = x;
    return v;
}

inline lrm::HazardModel one_state(double lambda, double horizon) {
    return lrm::HazardModel::homogeneous(lrm::Matrix::Zero(1, 1), vec({lambda}), horizon,
                                         vec({1.0}));
}

/// Q = [[-1, 1], [2, -2]], lambda = (0.02, 0.2), started from the stationary law.
inline lrm::HazardModel reference_hazard(double horizon = 5.0) {
    return lrm::HazardModel::homogeneous(mat2(-1, 1, 2, -2), vec({0.02, 0.2}), horizon,
                                         vec({2.0 / 3.0, 1.0 / 3.0}));
}

inline lrm::HazardModel equal_hazard(double lambda = 0.1, double horizon = 5.0) {
    return lrm::HazardModel::homogeneous(mat2(-1, 1, 2, -2), vec({lambda, lambda}), horizon,
                                         vec({0.5, 0.5}));
}

inline lrm::MarketModel reference_market(double horizon = 5.0) {
    return lrm::MarketModel{100.0, 0.05, 0.2, horizon};
}

inline lrm::ClaimSpec call_claim(lrm::ContractKind kind, double strike = 100.0) {
    return {kind, {lrm::PayoffKind::call, strike}};
}

/// exp(Q^T t) p for a two-state generator with exit rates a (0 -> 1) and b (1 -> 0).
inline lrm::Vector two_state_flow(double a, double b, const lrm::Vector& p, double t) {
    const double stat0 = b / (a + b);
    const double p0 = stat0 + (p[0] - stat0) * std::exp(-(a + b) * t);
    return vec({p0, 1.0 - p0});
}

/// Standard normal CDF by composite Simpson integration of the density.
inline double simpson_cdf(double x) {
    const int n = 20000;
    const double lo = -12.0;
    const double h = (x - lo) / n;
    auto phi = [](double z) { return std::exp(-0.5 * z * z) / std::sqrt(2.0 * M_PI); };
    double sum = phi(lo) + phi(x);
    for (int i = 1; i < n; ++i) sum += (i % 2 ? 4.0 : 2.0) * phi(lo + i * h);
    return sum * h / 3.0;
}

inline std::vector<double> linspace(double a, double b, int steps) {
    std::vector<double> g(static_cast<std::size_t>(steps) + 1);
    for (int i = 0; i <= steps; ++i) g[static_cast<std::size_t>(i)] = a + (b - a) * i / steps;
    g.back() = b;
    return g;
}

}  // namespace fixtures
