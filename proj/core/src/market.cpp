#include "lrm/market.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace lrm {

void MarketModel::validate() const {
    if (!(s0 > 0.0) || !std::isfinite(s0)) throw std::invalid_argument("s0 must be positive");
    if (!(sigma > 0.0) || !std::isfinite(sigma)) {
        throw std::invalid_argument("sigma must be positive");
    }
    if (!std::isfinite(mu)) throw std::invalid_argument("mu must be finite");
    if (!(horizon > 0.0)) throw std::invalid_argument("horizon must be positive");
}

double Payoff::operator()(double s) const noexcept {
    switch (kind) {
        case PayoffKind::constant: return parameter;
        case PayoffKind::identity: return s;
        case PayoffKind::call: return s > parameter ? s - parameter : 0.0;
        case PayoffKind::put: return parameter > s ? parameter - s : 0.0;
    }
    return 0.0;
}

void ClaimSpec::validate() const {
    if (!std::isfinite(payoff.parameter)) throw std::invalid_argument("payoff parameter must be finite");
    const bool has_strike = payoff.kind == PayoffKind::call || payoff.kind == PayoffKind::put;
    if (has_strike && payoff.parameter < 0.0) throw std::invalid_argument("strike must be >= 0");
    if (contract == ContractKind::term && payoff.kind == PayoffKind::put) {
        throw std::invalid_argument("term contracts support constant, identity and call payoffs");
    }
}

std::string to_string(PayoffKind kind) {
    switch (kind) {
        case PayoffKind::constant: return "constant";
        case PayoffKind::identity: return "identity";
        case PayoffKind::call: return "call";
        case PayoffKind::put: return "put";
    }
    return "unknown";
}

std::string to_string(ContractKind kind) {
    return kind == ContractKind::pure_endowment ? "pure_endowment" : "term";
}

double normal_cdf(double x) noexcept { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

PriceDelta price_and_delta(const MarketModel& model, const Payoff& payoff, double t, double s,
                           double maturity) {
    if (t > maturity) throw std::invalid_argument("price_and_delta: t after maturity");
    if (!(s > 0.0)) throw std::invalid_argument("price_and_delta: price must be positive");
    const double tau = maturity - t;
    switch (payoff.kind) {
        case PayoffKind::constant: return {payoff.parameter, 0.0};
        case PayoffKind::identity: return {s, 1.0};
        case PayoffKind::call:
        case PayoffKind::put: {
            const double k = payoff.parameter;
            const bool call = payoff.kind == PayoffKind::call;
            if (k == 0.0) return call ? PriceDelta{s, 1.0} : PriceDelta{0.0, 0.0};
            if (tau <= 0.0) {
                const double itm = s > k ? 1.0 : (s == k ? 0.5 : 0.0);
                return call ? PriceDelta{payoff(s), itm} : PriceDelta{payoff(s), itm - 1.0};
            }
            const double vol = model.sigma * std::sqrt(tau);
            const double d1 = std::log(s / k) / vol + 0.5 * vol;
            const double d2 = d1 - vol;
            if (call) return {s * normal_cdf(d1) - k * normal_cdf(d2), normal_cdf(d1)};
            return {k * normal_cdf(-d2) - s * normal_cdf(-d1), normal_cdf(d1) - 1.0};
        }
    }
    throw std::invalid_argument("price_and_delta: unsupported payoff");
}

PriceDelta price_and_delta(const MarketModel& model, const ClaimSpec& claim, double t, double s,
                           double maturity) {
    claim.validate();
    return price_and_delta(model, claim.payoff, t, s, maturity);
}

std::vector<double> simulate_price(const MarketModel& model, std::span<const double> grid,
                                   std::uint64_t seed) {
    Rng rng(seed);
    return simulate_price(model, grid, model.s0, rng);
}

std::vector<double> simulate_price(const MarketModel& model, std::span<const double> grid,
                                   double s_start, Rng& rng) {
    model.validate();
    std::vector<double> path(grid.size());
    if (grid.empty()) return path;
    path[0] = s_start;
    const double drift = model.mu - 0.5 * model.sigma * model.sigma;
    for (std::size_t k = 1; k < grid.size(); ++k) {
        const double dt = grid[k] - grid[k - 1];
        if (!(dt > 0.0)) throw std::invalid_argument("simulate_price: grid must increase");
        path[k] = path[k - 1] * std::exp(drift * dt + model.sigma * std::sqrt(dt) * rng.normal());
    }
    return path;
}

std::vector<double> mmm_density(const MarketModel& model, std::span<const double> path,
                                std::span<const double> grid) {
    if (path.size() != grid.size()) throw std::invalid_argument("mmm_density: size mismatch");
    std::vector<double> density(path.size());
    const double theta = model.risk_premium();
    const double drift = model.mu - 0.5 * model.sigma * model.sigma;
    for (std::size_t k = 0; k < path.size(); ++k) {
        const double t = grid[k] - grid.front();
        const double w = (std::log(path[k] / path.front()) - drift * t) / model.sigma;
        density[k] = (theta == 0.0) ? 1.0 : std::exp(-theta * w - 0.5 * theta * theta * t);
    }
    return density;
}

StructureDecomposition structure_decomposition(const MarketModel& model,
                                               std::span<const double> path,
                                               std::span<const double> grid) {
    if (path.size() != grid.size()) {
        throw std::invalid_argument("structure_decomposition: size mismatch");
    }
    StructureDecomposition out;
    const std::size_t steps = path.empty() ? 0 : path.size() - 1;
    out.martingale.resize(steps);
    out.drift.resize(steps);
    out.alpha.resize(path.size());
    const double var = model.sigma * model.sigma;
    for (std::size_t k = 0; k < path.size(); ++k) out.alpha[k] = model.alpha(path[k]);
    for (std::size_t k = 0; k < steps; ++k) {
        const double dt = grid[k + 1] - grid[k];
        const double bracket = var * path[k] * path[k] * dt;
        out.drift[k] = out.alpha[k] * bracket;
        out.martingale[k] = (path[k + 1] - path[k]) - out.drift[k];
    }
    return out;
}

}  // namespace lrm
