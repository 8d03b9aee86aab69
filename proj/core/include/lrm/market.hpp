#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "lrm/rng.hpp"

namespace lrm {

/// Black-Scholes market in discounted units (riskless rate zero):
///   dS = mu S dt + sigma S dW.
/// Structure condition: S = S_0 + M + int alpha d<M> with dM = sigma S dW,
/// d<M> = sigma^2 S^2 dt and alpha = mu / (sigma^2 S).
struct MarketModel {
    double s0 = 100.0;
    double mu = 0.0;
    double sigma = 0.2;
    double horizon = 1.0;

    /// Throws std::invalid_argument unless s0 > 0, sigma > 0, horizon > 0.
    void validate() const;
    double alpha(double s) const noexcept { return mu / (sigma * sigma * s); }
    /// Market price of risk mu / sigma.
    double risk_premium() const noexcept { return mu / sigma; }
};

enum class PayoffKind { constant, identity, call, put };

/// Function of the asset price. `parameter` is the constant for `constant`
/// and the strike for `call`/`put`; unused for `identity`.
struct Payoff {
    PayoffKind kind = PayoffKind::identity;
    double parameter = 0.0;

    double operator()(double s) const noexcept;
    friend bool operator==(const Payoff&, const Payoff&) = default;
};

enum class ContractKind { pure_endowment, term };

/// Unit-linked benefit. Pure endowment pays payoff(S_T) per survivor at T;
/// term insurance pays payoff(S_tau) at each death time tau <= T.
struct ClaimSpec {
    ContractKind contract = ContractKind::pure_endowment;
    Payoff payoff;

    /// Throws std::invalid_argument for non-finite parameters, negative strikes
    /// or a put inside a term contract.
    void validate() const;
    friend bool operator==(const ClaimSpec&, const ClaimSpec&) = default;
};

std::string to_string(PayoffKind kind);
std::string to_string(ContractKind kind);

struct PriceDelta {
    double value = 0.0;
    double delta = 0.0;
};

double normal_cdf(double x) noexcept;

/// Zero-drift (minimal martingale measure) price E*[payoff(S_maturity) | S_t = s]
/// and its s-derivative, in closed form. At t == maturity the payoff and its
/// one-sided slope are returned (a call at the money has delta 1/2).
PriceDelta price_and_delta(const MarketModel& model, const Payoff& payoff, double t, double s,
                           double maturity);
PriceDelta price_and_delta(const MarketModel& model, const ClaimSpec& claim, double t, double s,
                           double maturity);

/// Exact log-normal stepping on `grid` starting from `s_start`.
std::vector<double> simulate_price(const MarketModel& model, std::span<const double> grid,
                                   std::uint64_t seed);
std::vector<double> simulate_price(const MarketModel& model, std::span<const double> grid,
                                   double s_start, Rng& rng);

/// Density process L_t = exp(-(mu/sigma) W_t - (mu/sigma)^2 t / 2) of the
/// minimal martingale measure, with W recovered from the price path.
std::vector<double> mmm_density(const MarketModel& model, std::span<const double> path,
                                std::span<const double> grid);

struct StructureDecomposition {
    std::vector<double> martingale;  ///< Delta M_k = Delta S_k - alpha_k Delta<M>_k
    std::vector<double> drift;       ///< alpha_k Delta<M>_k = mu S_k Delta t_k
    std::vector<double> alpha;       ///< alpha at each grid point
};

/// Per-step split of the price increments into martingale and drift parts,
/// with alpha and <M> frozen at the left end of each step.
StructureDecomposition structure_decomposition(const MarketModel& model,
                                               std::span<const double> path,
                                               std::span<const double> grid);

}  // namespace lrm
