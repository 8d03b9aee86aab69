#include "lrm/ensemble.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <stdexcept>
#include <string>
#include <thread>

namespace lrm {

namespace {

constexpr std::size_t kBlockSize = 64;

struct BlockSums {
    std::vector<double> value_sum, value_sq, cost_sum, cost_sq;
};

double percentile(std::vector<double> xs, double q) {
    if (xs.empty()) return 0.0;
    std::sort(xs.begin(), xs.end());
    const double pos = q * static_cast<double>(xs.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, xs.size() - 1);
    return xs[lo] + (pos - static_cast<double>(lo)) * (xs[hi] - xs[lo]);
}

template <class Fn>
void parallel_blocks(std::size_t n_blocks, unsigned threads, Fn&& fn) {
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(1, n_blocks)));
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
        while (true) {
            const std::size_t b = next.fetch_add(1);
            if (b >= n_blocks) return;
            try {
                fn(b);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
                next = n_blocks;
                return;
            }
        }
    };
    if (threads == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (unsigned i = 0; i < threads; ++i) pool.emplace_back(worker);
    }
    if (failure) std::rethrow_exception(failure);
}

}  // namespace

EnsembleSummary run_ensemble(const ScenarioConfig& config, unsigned threads) {
    const HedgingEngine engine(config.hazard, config.market, config.claim, config.cohort,
                               config.grid_steps, config.quadrature_nodes);
    const auto n = static_cast<std::size_t>(config.n_paths);
    const std::size_t grid_size = engine.base_grid().size();
    const std::size_t n_blocks = (n + kBlockSize - 1) / kBlockSize;
    const auto keep = std::min<std::size_t>(n, static_cast<std::size_t>(config.report.path_csv_limit));

    EnsembleSummary out;
    out.contract = config.claim.contract;
    out.n_paths = n;
    out.seed = config.seed;
    out.s0 = config.market.s0;
    out.initial_value = engine.initial_value();
    out.grid = engine.base_grid();
    out.paths.resize(n);
    out.sample_results.resize(keep);

    std::vector<BlockSums> blocks(n_blocks);
    parallel_blocks(n_blocks, threads, [&](std::size_t b) {
        BlockSums& sums = blocks[b];
        sums.value_sum.assign(grid_size, 0.0);
        sums.value_sq.assign(grid_size, 0.0);
        sums.cost_sum.assign(grid_size, 0.0);
        sums.cost_sq.assign(grid_size, 0.0);
        const std::size_t end = std::min(n, (b + 1) * kBlockSize);
        for (std::size_t i = b * kBlockSize; i < end; ++i) {
            ScenarioResult r;
            PathInput path;
            try {
                path = engine.sample_path(config.seed, i);
                r = engine.run(path, FilterState::initial(engine.hazard(), engine.cohort()));
            } catch (const std::exception& e) {
                throw std::runtime_error("path " + std::to_string(i) + ": " + e.what());
            }
            for (std::size_t k = 0; k < path.points.size(); ++k) {
                const std::size_t g = path.points[k].base_index;
                if (g == kOffGrid) continue;
                const HedgeRecord& rec = r.records[k];
                sums.value_sum[g] += rec.value;
                sums.value_sq[g] += rec.value * rec.value;
                sums.cost_sum[g] += rec.cost;
                sums.cost_sq[g] += rec.cost * rec.cost;
            }
            out.paths[i] = {r.payoff, r.records.back().value, r.cost_drift, r.martingale_sum,
                            r.mmm_density, r.n_dead};
            if (i < keep) out.sample_results[i] = std::move(r);
        }
    });

    // Block sums combined in block order.
    std::vector<double> vs(grid_size, 0.0), vq(grid_size, 0.0), cs(grid_size, 0.0),
        cq(grid_size, 0.0);
    for (const BlockSums& b : blocks) {
        for (std::size_t g = 0; g < grid_size; ++g) {
            vs[g] += b.value_sum[g];
            vq[g] += b.value_sq[g];
            cs[g] += b.cost_sum[g];
            cq[g] += b.cost_sq[g];
        }
    }
    auto band = [n](double sum, double sq) {
        const double dn = static_cast<double>(n);
        const double mean = sum / dn;
        const double var = n > 1 ? std::max(0.0, (sq - dn * mean * mean) / (dn - 1.0)) : 0.0;
        return Band{mean, std::sqrt(var / dn)};
    };
    out.value_band.resize(grid_size);
    out.cost_band.resize(grid_size);
    for (std::size_t g = 0; g < grid_size; ++g) {
        out.value_band[g] = band(vs[g], vq[g]);
        out.cost_band[g] = band(cs[g], cq[g]);
    }

    std::vector<double> drift(n), mart(n), weighted(n), payoff(n), repl(n);
    for (std::size_t i = 0; i < n; ++i) {
        const PathSummary& p = out.paths[i];
        drift[i] = p.cost_drift;
        mart[i] = p.martingale_sum;
        weighted[i] = p.mmm_density * p.payoff;
        payoff[i] = p.payoff;
        repl[i] = std::abs(p.terminal_value - p.payoff) / config.market.s0;
    }
    out.cost_drift = estimate_mean(drift);
    out.orthogonality = estimate_covariance(drift, mart);
    out.mmm_weighted_payoff = estimate_mean(weighted);
    out.payoff = estimate_mean(payoff);
    out.replication = {repl.empty() ? 0.0 : *std::max_element(repl.begin(), repl.end()),
                       percentile(repl, 0.50), percentile(repl, 0.95), percentile(repl, 0.99)};
    if (n > 1) {
        RunningStats moments;
        for (double d : drift) moments.add(d);
        const double m = moments.mean();
        const double var = moments.variance();
        RunningStats lag;
        for (std::size_t i = 1; i < n; ++i) {
            lag.add(var > 0.0 ? (drift[i] - m) * (drift[i - 1] - m) / var : 0.0);
        }
        out.cost_autocorrelation = lag.estimate();
    }

    const auto oracle = std::min<std::size_t>(n, static_cast<std::size_t>(config.report.oracle_paths));
    if (oracle > 0) out.filter_oracle = filter_oracle_check(config, oracle);

    PortfolioPath deaths0;
    const PathInput path0 = engine.sample_path(config.seed, 0, nullptr, &deaths0);
    std::vector<double> times;
    for (const TimePoint& p : path0.points) {
        if (p.base_index != kOffGrid) times.push_back(p.time);
    }
    out.sample_filter = run_filter(engine.hazard(), deaths0, times, engine.h_max());

    if (config.claim.contract == ContractKind::pure_endowment) {
        out.tables.push_back(engine.pure_table());
    } else {
        out.tables = engine.term_tables().tables;
    }
    return out;
}

FilterOracleReport filter_oracle_check(const ScenarioConfig& config, std::size_t histories,
                                       double step_fraction) {
    const std::vector<double> grid = uniform_grid(config.hazard.horizon(), config.grid_steps);
    FilterOracleReport report;
    report.step = step_fraction * config.hazard.horizon();
    for (std::size_t i = 0; i < histories; ++i) {
        Rng chain_rng(derive_seed(config.seed, i, Stream::chain));
        Rng life_rng(derive_seed(config.seed, i, Stream::lifetimes));
        const ChainPath chain = sample_chain_path(config.hazard, config.hazard.horizon(), chain_rng);
        const PortfolioPath deaths = sample_lifetimes(config.hazard, chain, config.cohort, life_rng);
        const FilterTrajectory a = run_filter(config.hazard, deaths, grid);
        const FilterTrajectory b = discrete_oracle(config.hazard, deaths, report.step, grid);
        const double tv = max_total_variation(a, b);
        report.max_tv.push_back(tv);
        report.worst = std::max(report.worst, tv);
    }
    return report;
}

}  // namespace lrm
