#include "ttsurrogate/pipeline.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <random>

#include "ttsurrogate/parallel.hpp"
#include "ttsurrogate/tt_io.hpp"

namespace ttsurrogate {

FeatureGrid market_grid(std::size_t assets, unsigned spot_bits, unsigned strike_bits, unsigned rate_bits,
                        unsigned ttm_bits) {
    std::vector<FeatureAxis> axes;
    for (std::size_t a = 0; a < assets; ++a) {
        axes.push_back({"spot_" + std::to_string(a + 1), 5.0, 150.0, spot_bits});
    }
    axes.push_back({"strike", 1.0, 200.0, strike_bits});
    axes.push_back({"rate", 0.005, 0.08, rate_bits});
    axes.push_back({"ttm", 1.0 / 365.0, 3.0, ttm_bits});
    return FeatureGrid(std::move(axes));
}

FeatureGrid reference_market_grid() { return market_grid(5, 5, 6, 3, 3); }

MarketPoint to_market_point(std::span<const double> x) {
    if (x.size() < 4) throw DimensionError("market features need at least one spot plus strike, rate and ttm");
    const std::size_t assets = x.size() - 3;
    MarketPoint p;
    p.spots.assign(x.begin(), x.begin() + static_cast<std::ptrdiff_t>(assets));
    p.strike = x[assets];
    p.rate = x[assets + 1];
    p.ttm = x[assets + 2];
    return p;
}

GridPricer::GridPricer(FeatureGrid grid, PriceFn fn, std::uint64_t seed, std::size_t threads)
    : BlackBoxPricer(grid.shape()), grid_(std::move(grid)), fn_(std::move(fn)), seed_(seed), threads_(threads) {}

void GridPricer::evaluate(std::span<const MultiIndex> batch, std::span<double> out) {
    parallel_for(batch.size(), threads_, [&](std::size_t begin, std::size_t end) {
        for (std::size_t b = begin; b < end; ++b) {
            const std::vector<double> x = grid_.point_of(batch[b]);
            try {
                out[b] = fn_(x, point_seed(seed_, batch[b]));
            } catch (const std::exception& e) {
                throw PricerError(std::string("pricer failed: ") + e.what(), batch[b]);
            }
            if (!std::isfinite(out[b])) throw PricerError("pricer returned a non-finite value", batch[b]);
        }
    });
}

std::string to_string(ProductKind kind) {
    return kind == ProductKind::european_geo ? "european-geo" : "american-arith";
}

ProductKind parse_product(const std::string& text) {
    if (text == "european-geo") return ProductKind::european_geo;
    if (text == "american-arith") return ProductKind::american_arith;
    throw DomainError("unknown product '" + text + "' (expected european-geo or american-arith)");
}

GridPricer::PriceFn make_price_fn(ProductKind kind, const BasketModelParams& model, const LsmcConfig& lsmc) {
    model.validate();
    if (kind == ProductKind::european_geo) {
        return [model](std::span<const double> x, std::uint64_t) {
            return price_european_geo_basket_put(to_market_point(x), model);
        };
    }
    return [model, lsmc](std::span<const double> x, std::uint64_t seed) {
        LsmcConfig cfg = lsmc;
        cfg.seed = seed;
        return price_american_arith_basket_put_lsmc(to_market_point(x), model, cfg).price;
    };
}

// ---------------------------------------------------------------- model

SurrogateModel::SurrogateModel(FeatureGrid grid, TensorTrain surface, InferenceMode mode, nlohmann::json manifest)
    : evaluator_(std::make_shared<const SurfaceEvaluator>(std::move(surface), std::move(grid), mode)),
      manifest_(std::move(manifest)) {
    if (manifest_.is_null()) manifest_ = nlohmann::json::object();
    manifest_["format"] = "ttsurrogate-model";
    manifest_["version"] = library_version;
    manifest_["grid"] = evaluator_->grid();
    manifest_["bit_order"] = "feature-major, most significant bit first";
    manifest_["mode"] = evaluator_->mode().to_string();
    manifest_["ranks"] = evaluator_->surface().ranks();
}

void SurrogateModel::save(const std::filesystem::path& path) const {
    std::filesystem::path base = path;
    if (base.extension() == ".tt" || base.extension() == ".json") base.replace_extension();
    const std::filesystem::path tt_path = std::filesystem::path(base).concat(".tt");
    const std::filesystem::path json_path = std::filesystem::path(base).concat(".json");
    if (base.has_parent_path()) std::filesystem::create_directories(base.parent_path());
    save_tt(tt_path, surface());
    std::ofstream os(json_path);
    if (!os) throw FormatError("cannot open " + json_path.string() + " for writing");
    os << manifest_.dump(2) << '\n';
    if (!os) throw FormatError("failed writing " + json_path.string());
}

SurrogateModel SurrogateModel::load(const std::filesystem::path& path) {
    std::filesystem::path base = path;
    if (base.extension() == ".tt" || base.extension() == ".json") base.replace_extension();
    const std::filesystem::path json_path = std::filesystem::path(base).concat(".json");
    std::ifstream is(json_path);
    if (!is) throw FormatError("cannot open manifest " + json_path.string());
    nlohmann::json manifest;
    try {
        manifest = nlohmann::json::parse(is);
    } catch (const nlohmann::json::exception& e) {
        throw FormatError("malformed manifest " + json_path.string() + ": " + e.what());
    }
    if (manifest.value("format", "") != "ttsurrogate-model") {
        throw FormatError(json_path.string() + " is not a ttsurrogate model manifest");
    }
    TensorTrain surface = load_tt(std::filesystem::path(base).concat(".tt"));
    try {
        FeatureGrid grid = grid_from_json(manifest.at("grid"));
        InferenceMode mode = InferenceMode::parse(manifest.at("mode").get<std::string>());
        return SurrogateModel(std::move(grid), std::move(surface), mode, std::move(manifest));
    } catch (const nlohmann::json::exception& e) {
        throw FormatError("malformed manifest " + json_path.string() + ": " + e.what());
    } catch (const DimensionError& e) {
        throw FormatError("model does not match its manifest: " + std::string(e.what()));
    }
}

// ---------------------------------------------------------------- training

TrainResult train_surrogate(BlackBoxPricer& pricer, const FeatureGrid& grid, const TrainOptions& options) {
    const auto shape = grid.shape();
    if (pricer.shape() != shape) throw DimensionError("train_surrogate: pricer shape does not match the grid");
    if (options.rank == 0) throw DimensionError("train_surrogate: rank must be at least 1");

    const auto start = std::chrono::steady_clock::now();
    const double pricer_seconds_before = pricer.eval_seconds();
    IndexSets init = options.init ? *options.init : init_index_sets(shape, options.rank, options.seed);
    const std::vector<std::size_t> caps(shape.size() > 0 ? shape.size() - 1 : 0, options.rank);

    CrossOptions cross;
    cross.sweeps = options.sweeps;
    cross.tol = options.tol;
    cross.seed = options.seed;
    cross.validation_samples = options.validation_samples;
    CrossResult result = tt_cross(pricer, std::move(init), caps, cross);

    TrainResult out{SurrogateModel(grid, std::move(result.tt), options.mode), result.report, 0.0, 0.0};
    out.train_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    out.data_gen_seconds = pricer.eval_seconds() - pricer_seconds_before;

    auto& m = out.model.manifest();
    m["rank"] = options.rank;
    m["sweeps"] = options.sweeps;
    m["seed"] = options.seed;
    m["cross_report"] = out.report;
    m["evals_used"] = out.report.evals_used;
    m["train_seconds"] = out.train_seconds;
    m["data_gen_seconds"] = out.data_gen_seconds;
    return out;
}

// ---------------------------------------------------------------- portfolio

SurrogateModel portfolio_tt(const Portfolio& portfolio, double eps) {
    if (portfolio.empty()) throw DimensionError("portfolio_tt: empty portfolio");
    const SurrogateModel& first = *portfolio.front().model;
    TensorTrain sum;
    nlohmann::json members = nlohmann::json::array();
    for (const auto& pos : portfolio) {
        if (!pos.model) throw DimensionError("portfolio_tt: null position");
        if (!(pos.model->grid() == first.grid())) {
            throw IncompatibleGridError("portfolio_tt: positions are built on different feature grids");
        }
        if (pos.model->mode().to_string() != first.mode().to_string()) {
            throw IncompatibleGridError("portfolio_tt: positions use different inference modes");
        }
        const TensorTrain term = scale(pos.model->surface(), pos.weight);
        sum = sum.empty() ? term : add(sum, term);
        members.push_back({{"weight", pos.weight}, {"ranks", pos.model->surface().ranks()}});
    }
    nlohmann::json manifest{{"portfolio", members}, {"round_eps", eps}};
    return SurrogateModel(first.grid(), round(sum, eps), first.mode(), std::move(manifest));
}

// ---------------------------------------------------------------- evaluation

RowMatrix make_test_points(const FeatureGrid& grid, std::size_t count, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    RowMatrix x(static_cast<Eigen::Index>(count), static_cast<Eigen::Index>(grid.num_features()));
    for (Eigen::Index q = 0; q < x.rows(); ++q) {
        for (std::size_t f = 0; f < grid.num_features(); ++f) {
            const auto& ax = grid.axis(f);
            std::uniform_real_distribution<double> u(ax.min, ax.max);
            x(q, static_cast<Eigen::Index>(f)) = u(rng);
        }
    }
    return x;
}

double mean_absolute_error(std::span<const double> predicted, std::span<const double> reference) {
    if (predicted.size() != reference.size()) throw DimensionError("mean_absolute_error: size mismatch");
    if (predicted.empty()) throw DimensionError("mean_absolute_error: empty test set");
    double sum = 0.0;
    for (std::size_t i = 0; i < predicted.size(); ++i) sum += std::abs(predicted[i] - reference[i]);
    return sum / static_cast<double>(predicted.size());
}

double evaluate_mae(const SurrogateModel& model, const TestSet& test, std::size_t threads) {
    const std::vector<double> predicted =
        model.evaluate_batch(std::span<const double>(test.x.data(), static_cast<std::size_t>(test.x.size())), threads);
    return mean_absolute_error(predicted, test.reference);
}

std::uint64_t cross_eval_bound(std::span<const std::size_t> shape, std::size_t rank, std::size_t sweeps) {
    const std::size_t d = shape.size();
    std::vector<double> r(d + 1, 1.0);
    double left = 1.0;
    for (std::size_t b = 0; b + 1 < d; ++b) {
        left *= static_cast<double>(shape[b]);
        double right = 1.0;
        for (std::size_t k = b + 1; k < d; ++k) right *= static_cast<double>(shape[k]);
        r[b + 1] = std::min({static_cast<double>(rank), left, right});
    }
    double per_pass = 0.0;
    for (std::size_t k = 0; k < d; ++k) per_pass += r[k] * static_cast<double>(shape[k]) * r[k + 1];
    return static_cast<std::uint64_t>(per_pass * static_cast<double>(sweeps));
}

std::size_t max_rank_for_budget(std::span<const std::size_t> shape, std::uint64_t budget, std::size_t sweeps) {
    std::size_t rank = 1;
    while (rank < 4096 && cross_eval_bound(shape, rank + 1, sweeps) <= budget) ++rank;
    return rank;
}

}  // namespace ttsurrogate
