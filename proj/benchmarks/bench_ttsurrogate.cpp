#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "ttsurrogate/cross.hpp"
#include "ttsurrogate/interpolation.hpp"
#include "ttsurrogate/kernel_tt.hpp"
#include "ttsurrogate/market.hpp"
#include "ttsurrogate/pipeline.hpp"

namespace tts = ttsurrogate;

namespace {

tts::TensorTrain random_surface(const tts::FeatureGrid& grid, std::size_t rank, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    const auto shape = grid.shape();
    const std::vector<std::size_t> ranks(shape.size() - 1, rank);
    return tts::random_tt(shape, ranks, rng);
}

std::vector<double> queries(const tts::FeatureGrid& grid, std::size_t n) {
    const auto x = tts::make_test_points(grid, n, 17);
    return {x.data(), x.data() + x.size()};
}

}  // namespace

// Cached evaluator on the 37-core reference grid: the production query path.
static void BM_SurfaceEvaluator(benchmark::State& state) {
    const auto grid = tts::reference_market_grid();
    const tts::SurfaceEvaluator eval(random_surface(grid, static_cast<std::size_t>(state.range(0)), 1), grid,
                                     tts::InferenceMode::linear());
    const auto q = queries(grid, 1024);
    const std::size_t f = grid.num_features();
    std::size_t i = 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(eval(std::span<const double>(q.data() + i * f, f)));
        i = (i + 1) % 1024;
    }
    state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_SurfaceEvaluator)->Arg(2)->Arg(4)->Arg(8)->Arg(16);

// Direct coefficient-TT contraction without any cache.
static void BM_InterpEvalUncached(benchmark::State& state) {
    const auto grid = tts::reference_market_grid();
    const auto y = random_surface(grid, static_cast<std::size_t>(state.range(0)), 2);
    const auto q = queries(grid, 256);
    const std::size_t f = grid.num_features();
    std::size_t i = 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(tts::interp_eval(y, grid, std::span<const double>(q.data() + i * f, f)));
        i = (i + 1) % 256;
    }
    state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_InterpEvalUncached)->Arg(2)->Arg(8);

static void BM_Round(benchmark::State& state) {
    const auto grid = tts::reference_market_grid();
    const auto a = random_surface(grid, static_cast<std::size_t>(state.range(0)), 3);
    const auto sum = tts::add(a, a);
    for (auto _ : state) benchmark::DoNotOptimize(tts::round(sum, 1e-10));
}
BENCHMARK(BM_Round)->Arg(4)->Arg(16)->Unit(benchmark::kMillisecond);

static void BM_Dot(benchmark::State& state) {
    const auto grid = tts::reference_market_grid();
    const auto a = random_surface(grid, static_cast<std::size_t>(state.range(0)), 4);
    const auto b = random_surface(grid, static_cast<std::size_t>(state.range(0)), 5);
    for (auto _ : state) benchmark::DoNotOptimize(tts::dot(a, b));
}
BENCHMARK(BM_Dot)->Arg(4)->Arg(16);

static void BM_TtCross(benchmark::State& state) {
    const std::vector<std::size_t> shape(20, 2);
    std::mt19937_64 rng(6);
    const std::size_t r = static_cast<std::size_t>(state.range(0));
    const std::vector<std::size_t> ranks(shape.size() - 1, r);
    const auto target = tts::random_tt(shape, ranks, rng);
    for (auto _ : state) {
        tts::TensorTrainPricer pricer(target);
        tts::CrossOptions opts;
        opts.validation_samples = 0;
        benchmark::DoNotOptimize(tts::tt_cross(pricer, tts::init_index_sets(shape, r, 7), ranks, opts));
    }
}
BENCHMARK(BM_TtCross)->Arg(2)->Arg(4)->Arg(8)->Unit(benchmark::kMillisecond);

static void BM_StnGprPredict(benchmark::State& state) {
    const tts::FeatureGrid grid({{"a", 0.0, 1.0, 10}, {"b", 0.0, 1.0, 10}});
    const tts::StnGprModel model(random_surface(grid, 4, 8), grid.kernel_spec(0.5));
    const std::vector<double> q{0.3141, 0.2718};
    for (auto _ : state) benchmark::DoNotOptimize(model.predict(q));
}
BENCHMARK(BM_StnGprPredict)->Unit(benchmark::kMicrosecond);

static void BM_GeoClosedForm(benchmark::State& state) {
    const auto m = tts::BasketModelParams::uniform(5);
    const tts::MarketPoint p{{90.0, 95.0, 100.0, 105.0, 110.0}, 100.0, 0.03, 1.0};
    for (auto _ : state) benchmark::DoNotOptimize(tts::price_european_geo_basket_put(p, m));
}
BENCHMARK(BM_GeoClosedForm);

static void BM_Lsmc(benchmark::State& state) {
    const auto m = tts::BasketModelParams::uniform(2);
    const tts::MarketPoint p{{95.0, 105.0}, 100.0, 0.03, 1.0};
    const tts::LsmcConfig cfg{static_cast<std::size_t>(state.range(0)), 30, 3, 9};
    for (auto _ : state) benchmark::DoNotOptimize(tts::price_american_arith_basket_put_lsmc(p, m, cfg));
}
BENCHMARK(BM_Lsmc)->Arg(2000)->Arg(10000)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
