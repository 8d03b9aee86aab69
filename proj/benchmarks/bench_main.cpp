#include <benchmark/benchmark.h>

#include "lrm/filter.hpp"
#include "lrm/hedging.hpp"
#include "lrm/projection.hpp"

namespace {

lrm::HazardModel reference_hazard() {
    lrm::Matrix q(2, 2);
    q << -1, 1, 2, -2;
    lrm::Vector rates(2), init(2);
    rates << 0.02, 0.2;
    init << 2.0 / 3.0, 1.0 / 3.0;
    return lrm::HazardModel::homogeneous(q, rates, 5.0, init);
}

void BM_propagate_one_year(benchmark::State& state) {
    const auto model = reference_hazard();
    const auto start = lrm::FilterState::initial(model, 10);
    for (auto _ : state) benchmark::DoNotOptimize(lrm::propagate(start, model, 1.0));
}
BENCHMARK(BM_propagate_one_year);

void BM_solve_pure_endowment(benchmark::State& state) {
    const auto model = reference_hazard();
    const auto grid = lrm::uniform_grid(5.0, static_cast<int>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(lrm::solve_pure_endowment(model, grid));
}
BENCHMARK(BM_solve_pure_endowment)->Arg(500)->Arg(2000);

void BM_hedge_path(benchmark::State& state) {
    const auto contract = state.range(0) == 0 ? lrm::ContractKind::pure_endowment
                                              : lrm::ContractKind::term;
    const lrm::HedgingEngine engine(reference_hazard(), lrm::MarketModel{100.0, 0.05, 0.2, 5.0},
                                    lrm::ClaimSpec{contract, {lrm::PayoffKind::call, 100.0}}, 10,
                                    2000, 64);
    std::uint64_t path = 0;
    for (auto _ : state) benchmark::DoNotOptimize(lrm::run_hedge(engine, 1, path++));
}
BENCHMARK(BM_hedge_path)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
