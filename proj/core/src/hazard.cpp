#include "lrm/hazard.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace lrm {

namespace {

constexpr double kRowSumTolerance = 1e-12;
constexpr double kProbabilityTolerance = 1e-12;

// Calls fn(t0, t1, state, rate) on maximal pieces of [from, to] on which both
// the chain state and the hazard row are constant.
template <class Fn>
void for_each_piece(const HazardModel& model, const ChainPath& chain, double from, double to,
                    Fn&& fn) {
    auto jump = std::upper_bound(chain.jump_times.begin(), chain.jump_times.end(), from);
    std::size_t state_index = static_cast<std::size_t>(jump - chain.jump_times.begin());
    const auto& times = model.rate_times();
    auto brk = std::upper_bound(times.begin(), times.end(), from);

    double t = from;
    while (t < to) {
        double next = to;
        if (jump != chain.jump_times.end() && *jump < next) next = *jump;
        if (brk != times.end() && *brk < next) next = *brk;
        const int state = chain.states[state_index];
        fn(t, next, state, model.rate(t, state));
        if (jump != chain.jump_times.end() && *jump == next) {
            ++jump;
            ++state_index;
        }
        if (brk != times.end() && *brk == next) ++brk;
        t = next;
    }
}

}  // namespace

HazardModel::HazardModel(Matrix generator, std::vector<double> rate_times,
                         std::vector<Vector> rates, double horizon, Vector initial_dist)
    : generator_(std::move(generator)),
      rate_times_(std::move(rate_times)),
      rates_(std::move(rates)),
      horizon_(horizon),
      initial_dist_(std::move(initial_dist)) {
    const Eigen::Index n = generator_.rows();
    if (n < 1 || generator_.cols() != n) {
        throw std::invalid_argument("generator must be a non-empty square matrix");
    }
    for (Eigen::Index i = 0; i < n; ++i) {
        double row_sum = 0.0;
        for (Eigen::Index j = 0; j < n; ++j) {
            const double q = generator_(i, j);
            if (!std::isfinite(q)) throw std::invalid_argument("generator entries must be finite");
            if (i != j && q < 0.0) {
                throw std::invalid_argument("generator off-diagonal entry (" + std::to_string(i) +
                                            "," + std::to_string(j) + ") is negative");
            }
            row_sum += q;
        }
        if (std::abs(row_sum) > kRowSumTolerance) {
            throw std::invalid_argument("generator row " + std::to_string(i) +
                                        " does not sum to zero");
        }
    }
    if (!(horizon_ > 0.0) || !std::isfinite(horizon_)) {
        throw std::invalid_argument("horizon must be positive");
    }
    if (rate_times_.empty() || rate_times_.size() != rates_.size()) {
        throw std::invalid_argument("rate_times and rates must be non-empty and of equal length");
    }
    if (rate_times_.front() != 0.0) throw std::invalid_argument("rate_times must start at 0");
    for (std::size_t i = 1; i < rate_times_.size(); ++i) {
        if (!(rate_times_[i] > rate_times_[i - 1])) {
            throw std::invalid_argument("rate_times must be strictly increasing");
        }
    }
    for (std::size_t i = 0; i < rates_.size(); ++i) {
        if (rates_[i].size() != n) {
            throw std::invalid_argument("rates row " + std::to_string(i) + " has wrong length");
        }
        for (Eigen::Index x = 0; x < n; ++x) {
            if (!(rates_[i][x] > 0.0) || !std::isfinite(rates_[i][x])) {
                throw std::invalid_argument("hazard rate [" + std::to_string(i) + "][" +
                                            std::to_string(x) + "] must be positive and finite");
            }
        }
    }
    if (initial_dist_.size() != n) throw std::invalid_argument("initial_dist has wrong length");
    if ((initial_dist_.array() < 0.0).any() ||
        std::abs(initial_dist_.sum() - 1.0) > kProbabilityTolerance) {
        throw std::invalid_argument("initial_dist must be a probability vector");
    }
}

HazardModel HazardModel::homogeneous(Matrix generator, Vector rates, double horizon,
                                     Vector initial_dist) {
    return HazardModel(std::move(generator), {0.0}, {std::move(rates)}, horizon,
                       std::move(initial_dist));
}

std::size_t HazardModel::interval_index(double t) const noexcept {
    auto it = std::upper_bound(rate_times_.begin(), rate_times_.end(), t);
    if (it == rate_times_.begin()) return 0;
    return static_cast<std::size_t>(it - rate_times_.begin()) - 1;
}

const Vector& HazardModel::rates_at(double t) const noexcept { return rates_[interval_index(t)]; }

const Vector& HazardModel::rates_before(double t) const noexcept {
    auto it = std::lower_bound(rate_times_.begin(), rate_times_.end(), t);
    if (it == rate_times_.begin()) return rates_.front();
    return rates_[static_cast<std::size_t>(it - rate_times_.begin()) - 1];
}

std::vector<double> HazardModel::breakpoints_between(double a, double b) const {
    std::vector<double> out;
    for (double t : rate_times_) {
        if (t > a && t < b) out.push_back(t);
    }
    return out;
}

int ChainPath::state_at(double t) const noexcept {
    auto it = std::upper_bound(jump_times.begin(), jump_times.end(), t);
    return states[static_cast<std::size_t>(it - jump_times.begin())];
}

int ChainPath::state_before(double t) const noexcept {
    auto it = std::lower_bound(jump_times.begin(), jump_times.end(), t);
    return states[static_cast<std::size_t>(it - jump_times.begin())];
}

ChainPath sample_chain_path(const HazardModel& model, double t_end, std::uint64_t seed) {
    Rng rng(seed);
    return sample_chain_path(model, t_end, rng);
}

ChainPath sample_chain_path(const HazardModel& model, double t_end, Rng& rng) {
    const int x0 = rng.categorical(model.initial_dist());
    return sample_chain_path(model, 0.0, t_end, x0, rng);
}

ChainPath sample_chain_path(const HazardModel& model, double t_start, double t_end,
                            int initial_state, Rng& rng) {
    if (!(t_end > t_start)) throw std::invalid_argument("chain path needs t_end > t_start");
    if (initial_state < 0 || initial_state >= model.n_states()) {
        throw std::invalid_argument("initial state out of range");
    }
    ChainPath path;
    path.t_start = t_start;
    path.t_end = t_end;
    path.states.push_back(initial_state);

    const Matrix& q = model.generator();
    Vector weights(model.n_states());
    double t = t_start;
    int x = initial_state;
    while (true) {
        const double exit = model.exit_rate(x);
        if (exit <= 0.0) break;
        t += rng.exponential() / exit;
        if (t > t_end) break;
        for (int y = 0; y < model.n_states(); ++y) weights[y] = (y == x) ? 0.0 : q(x, y);
        x = rng.categorical(weights);
        path.jump_times.push_back(t);
        path.states.push_back(x);
    }
    return path;
}

PortfolioPath sample_lifetimes(const HazardModel& model, const ChainPath& chain, int cohort,
                               std::uint64_t seed) {
    Rng rng(seed);
    return sample_lifetimes(model, chain, cohort, rng);
}

PortfolioPath sample_lifetimes(const HazardModel& model, const ChainPath& chain, int cohort,
                               Rng& rng) {
    if (cohort < 0) throw std::invalid_argument("cohort size must be nonnegative");
    // Individual i dies when the cumulative hazard along the path first
    // reaches an independent unit exponential threshold.
    std::vector<double> thresholds(static_cast<std::size_t>(cohort));
    for (double& e : thresholds) e = rng.exponential();
    std::sort(thresholds.begin(), thresholds.end());

    PortfolioPath out;
    out.cohort = cohort;
    std::size_t next = 0;
    double accumulated = 0.0;
    for_each_piece(model, chain, chain.t_start, chain.t_end,
                   [&](double t0, double t1, int /*state*/, double rate) {
                       const double piece = rate * (t1 - t0);
                       while (next < thresholds.size() && thresholds[next] <= accumulated + piece) {
                           double death = t0 + (thresholds[next] - accumulated) / rate;
                           death = std::clamp(death, t0, t1);
                           // Ties have probability zero; nudge to keep times distinct.
                           if (!out.death_times.empty() && death <= out.death_times.back()) {
                               death = std::nextafter(out.death_times.back(), t1 + 1.0);
                           }
                           if (death <= chain.t_start) death = std::nextafter(chain.t_start, t1);
                           out.death_times.push_back(death);
                           ++next;
                       }
                       accumulated += piece;
                   });
    return out;
}

int count_process(const PortfolioPath& portfolio, double t) noexcept {
    auto it = std::upper_bound(portfolio.death_times.begin(), portfolio.death_times.end(), t);
    return static_cast<int>(it - portfolio.death_times.begin());
}

double intensity(const HazardModel& model, int cohort, int n_dead, double t, int state) {
    if (n_dead < 0 || n_dead > cohort) throw std::invalid_argument("n_dead outside [0, cohort]");
    return static_cast<double>(cohort - n_dead) * model.rate(t, state);
}

double cumulative_hazard(const HazardModel& model, const ChainPath& chain, double from,
                         double to) {
    if (from < chain.t_start || to > chain.t_end || to < from) {
        throw std::out_of_range("interval outside chain coverage");
    }
    double total = 0.0;
    for_each_piece(model, chain, from, to,
                   [&](double t0, double t1, int, double rate) { total += rate * (t1 - t0); });
    return total;
}

double survival_factor(const HazardModel& model, const ChainPath& chain, double s, double t) {
    if (t < 0.0) throw std::out_of_range("negative survival horizon");
    return std::exp(-cumulative_hazard(model, chain, s, s + t));
}

}  // namespace lrm
