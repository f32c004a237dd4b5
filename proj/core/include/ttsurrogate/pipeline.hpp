#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ttsurrogate/cross.hpp"
#include "ttsurrogate/grid.hpp"
#include "ttsurrogate/interpolation.hpp"
#include "ttsurrogate/market.hpp"

namespace ttsurrogate {

inline constexpr const char* library_version = "0.1.0";

/// Standard market grid layout: the first `assets` features are spots,
/// followed by strike, rate and ttm.
FeatureGrid market_grid(std::size_t assets, unsigned spot_bits, unsigned strike_bits, unsigned rate_bits,
                        unsigned ttm_bits);
/// Five spots on 32 points, strike 64, rate 8, ttm 8: 37 binary cores.
FeatureGrid reference_market_grid();

/// Interprets a feature vector laid out as in market_grid().
MarketPoint to_market_point(std::span<const double> x);

/// Black box pricing each lattice point of a feature grid.
///
/// The pricing function receives the market point and a seed derived from
/// (global seed, multi-index), so stochastic pricers see a fixed tensor.
class GridPricer : public BlackBoxPricer {
public:
    using PriceFn = std::function<double(std::span<const double> x, std::uint64_t seed)>;

    GridPricer(FeatureGrid grid, PriceFn fn, std::uint64_t seed, std::size_t threads = 1);

    const FeatureGrid& grid() const noexcept { return grid_; }

protected:
    void evaluate(std::span<const MultiIndex> batch, std::span<double> out) override;

private:
    FeatureGrid grid_;
    PriceFn fn_;
    std::uint64_t seed_;
    std::size_t threads_;
};

enum class ProductKind { european_geo, american_arith };

std::string to_string(ProductKind kind);
ProductKind parse_product(const std::string& text);

/// Pricing function over market-grid features for one of the basket puts.
GridPricer::PriceFn make_price_fn(ProductKind kind, const BasketModelParams& model, const LsmcConfig& lsmc);

/// Trained surrogate: grid, price train, inference mode and provenance.
class SurrogateModel {
public:
    SurrogateModel(FeatureGrid grid, TensorTrain surface, InferenceMode mode, nlohmann::json manifest = {});

    const FeatureGrid& grid() const noexcept { return evaluator_->grid(); }
    const TensorTrain& surface() const noexcept { return evaluator_->surface(); }
    const InferenceMode& mode() const noexcept { return evaluator_->mode(); }
    const nlohmann::json& manifest() const noexcept { return manifest_; }
    nlohmann::json& manifest() noexcept { return manifest_; }

    double operator()(std::span<const double> x) const { return (*evaluator_)(x); }
    std::vector<double> evaluate_batch(std::span<const double> queries, std::size_t threads = 1) const {
        return evaluator_->evaluate_batch(queries, threads);
    }

    /// Writes `<stem>.tt` and the `<stem>.json` sidecar; `path` may carry either extension.
    void save(const std::filesystem::path& path) const;
    static SurrogateModel load(const std::filesystem::path& path);

private:
    std::shared_ptr<const SurfaceEvaluator> evaluator_;
    nlohmann::json manifest_;
};

struct TrainOptions {
    std::size_t rank = 4;
    std::size_t sweeps = 2;
    std::uint64_t seed = 0;
    double tol = 0.0;
    std::size_t validation_samples = 256;
    InferenceMode mode = InferenceMode::linear();
    /// Externally supplied starting sets; random nested sets otherwise.
    std::optional<IndexSets> init;
};

struct TrainResult {
    SurrogateModel model;
    CrossReport report;
    double train_seconds = 0.0;
    /// Wall time spent inside the pricer during training.
    double data_gen_seconds = 0.0;
};

/// Runs TT-cross over the pricer and wraps the result with its manifest.
TrainResult train_surrogate(BlackBoxPricer& pricer, const FeatureGrid& grid, const TrainOptions& options);

struct Position {
    std::shared_ptr<const SurrogateModel> model;
    double weight = 1.0;
};

using Portfolio = std::vector<Position>;

/// Weighted sum of the positions' trains, rounded at relative accuracy eps.
/// Throws IncompatibleGridError unless all positions share grid and mode.
SurrogateModel portfolio_tt(const Portfolio& portfolio, double eps);

struct TestSet {
    RowMatrix x;
    std::vector<double> reference;
    /// Monte Carlo standard error per reference (zeros for closed forms).
    std::vector<double> std_error;
};

/// Points drawn uniformly from the continuous feature box.
RowMatrix make_test_points(const FeatureGrid& grid, std::size_t count, std::uint64_t seed);

double mean_absolute_error(std::span<const double> predicted, std::span<const double> reference);
double evaluate_mae(const SurrogateModel& model, const TestSet& test, std::size_t threads = 1);

/// Upper bound of the superblock evaluations spent by `sweeps` passes at rank r.
std::uint64_t cross_eval_bound(std::span<const std::size_t> shape, std::size_t rank, std::size_t sweeps);
/// Largest rank whose bound fits the budget (at least 1).
std::size_t max_rank_for_budget(std::span<const std::size_t> shape, std::uint64_t budget, std::size_t sweeps);

}  // namespace ttsurrogate
