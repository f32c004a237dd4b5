#include "run_config.hpp"

#include <bit>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <set>

namespace ttsurrogate::cli {

namespace {

const std::set<std::string> top_level_keys{"schema_version", "description", "experiment", "grid",   "train",
                                           "model",          "lsmc",        "custom",     "bench",  "threads",
                                           "output_dir"};

unsigned bits_for(const std::string& feature, std::size_t points) {
    if (points < 2 || !std::has_single_bit(points)) {
        throw ConfigError("feature '" + feature + "': " + std::to_string(points) +
                          " points is not a power of two (at least 2)");
    }
    return static_cast<unsigned>(std::countr_zero(points));
}

FeatureGrid parse_grid(const nlohmann::json& g) {
    if (g.contains("market")) {
        const auto& m = g.at("market");
        const auto assets = m.at("assets").get<std::size_t>();
        if (assets == 0) throw ConfigError("grid.market.assets must be at least 1");
        const unsigned spot = bits_for("spot", m.value("spot_points", std::size_t{16}));
        const unsigned strike = bits_for("strike", m.value("strike_points", std::size_t{32}));
        const unsigned rate = bits_for("rate", m.value("rate_points", std::size_t{8}));
        const unsigned ttm = bits_for("ttm", m.value("ttm_points", std::size_t{8}));
        return market_grid(assets, spot, strike, rate, ttm);
    }
    if (!g.contains("features")) throw ConfigError("grid needs either 'market' or 'features'");
    try {
        return grid_from_json(g);
    } catch (const Error& e) {
        throw ConfigError(std::string("grid: ") + e.what());
    }
}

ExperimentKind parse_experiment(const std::string& s) {
    if (s == "european-geo") return ExperimentKind::european_geo;
    if (s == "american-arith") return ExperimentKind::american_arith;
    if (s == "custom") return ExperimentKind::custom;
    throw ConfigError("experiment must be european-geo, american-arith or custom, got '" + s + "'");
}

template <typename T>
void read(const nlohmann::json& j, const char* key, T& out) {
    if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace

std::string to_string(ExperimentKind kind) {
    switch (kind) {
        case ExperimentKind::european_geo: return "european-geo";
        case ExperimentKind::american_arith: return "american-arith";
        case ExperimentKind::custom: return "custom";
    }
    return "custom";
}

double CustomFunction::operator()(const FeatureGrid& grid, std::span<const double> x) const {
    const std::vector<double> u = grid.normalize(x);
    double acc = 0.0;
    for (std::size_t f = 0; f < u.size(); ++f) {
        const double c = f < coefficients.size() ? coefficients[f] : 1.0;
        acc += name == "gaussian-bump" ? c * (u[f] - 0.5) * (u[f] - 0.5) : c * u[f];
    }
    if (name == "exp-linear") return std::exp(acc);
    if (name == "gaussian-bump") return std::exp(-acc);
    return acc;
}

GridPricer::PriceFn RunConfig::price_fn() const {
    switch (experiment) {
        case ExperimentKind::european_geo: return make_price_fn(ProductKind::european_geo, model, lsmc);
        case ExperimentKind::american_arith: return make_price_fn(ProductKind::american_arith, model, lsmc);
        case ExperimentKind::custom: break;
    }
    return [fn = custom, grid = grid](std::span<const double> x, std::uint64_t) { return fn(grid, x); };
}

nlohmann::json RunConfig::to_json() const {
    nlohmann::json j;
    j["schema_version"] = schema_version;
    j["experiment"] = cli::to_string(experiment);
    j["grid"] = grid;
    j["train"] = {{"rank", train.rank},
                  {"sweeps", train.sweeps},
                  {"seed", train.seed},
                  {"tol", train.tol},
                  {"validation_samples", train.validation_samples},
                  {"mode", train.mode.to_string()}};
    if (experiment == ExperimentKind::custom) {
        j["custom"] = {{"function", custom.name}, {"coefficients", custom.coefficients}};
    } else {
        j["model"] = model;
        j["lsmc"] = lsmc;
    }
    j["bench"] = {{"budgets", bench.budgets},
                  {"test_size", bench.test_size},
                  {"test_seed", bench.test_seed},
                  {"direct", bench.direct},
                  {"gpr",
                   {{"enabled", bench.gpr.enabled},
                    {"max_samples", bench.gpr.max_samples},
                    {"length_scales", bench.gpr.length_scales}}},
                  {"reference_lsmc", bench.reference_lsmc}};
    j["threads"] = threads;
    j["output_dir"] = output_dir.string();
    return j;
}

std::string RunConfig::hash() const { return fnv1a_hex(to_json().dump()); }

std::string fnv1a_hex(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

RunConfig parse_config(const nlohmann::json& j) {
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    for (const auto& [key, _] : j.items()) {
        if (!top_level_keys.contains(key)) throw ConfigError("unknown config key '" + key + "'");
    }
    if (!j.contains("schema_version")) throw ConfigError("config is missing 'schema_version'");
    RunConfig c;
    try {
        const int version = j.at("schema_version").get<int>();
        if (version != schema_version) {
            throw ConfigError("unsupported schema_version " + std::to_string(version) + " (expected " +
                              std::to_string(schema_version) + ")");
        }
        c.experiment = parse_experiment(j.value("experiment", std::string("custom")));
        if (!j.contains("grid")) throw ConfigError("config is missing 'grid'");
        c.grid = parse_grid(j.at("grid"));

        if (j.contains("train")) {
            const auto& t = j.at("train");
            read(t, "rank", c.train.rank);
            read(t, "sweeps", c.train.sweeps);
            read(t, "seed", c.train.seed);
            read(t, "tol", c.train.tol);
            read(t, "validation_samples", c.train.validation_samples);
            if (t.contains("mode")) c.train.mode = InferenceMode::parse(t.at("mode").get<std::string>());
        }
        if (c.train.rank == 0) throw ConfigError("train.rank must be at least 1");
        if (c.train.sweeps == 0) throw ConfigError("train.sweeps must be at least 1");

        if (c.experiment != ExperimentKind::custom) {
            if (c.grid.num_features() < 4) {
                throw ConfigError("market experiments need spot features followed by strike, rate and ttm");
            }
            const std::size_t assets = c.grid.num_features() - 3;
            c.model = j.contains("model") ? j.at("model").get<BasketModelParams>() : BasketModelParams::uniform(assets);
            if (c.model.num_assets() != assets) {
                throw ConfigError("model has " + std::to_string(c.model.num_assets()) + " assets but the grid has " +
                                  std::to_string(assets) + " spot features");
            }
            if (j.contains("lsmc")) c.lsmc = j.at("lsmc").get<LsmcConfig>();
        }
        if (j.contains("custom")) {
            const auto& f = j.at("custom");
            read(f, "function", c.custom.name);
            read(f, "coefficients", c.custom.coefficients);
        }
        if (c.custom.name != "exp-linear" && c.custom.name != "sum" && c.custom.name != "gaussian-bump") {
            throw ConfigError("custom.function must be exp-linear, sum or gaussian-bump");
        }

        c.bench.reference_lsmc = c.lsmc;
        if (j.contains("bench")) {
            const auto& b = j.at("bench");
            read(b, "budgets", c.bench.budgets);
            read(b, "test_size", c.bench.test_size);
            read(b, "test_seed", c.bench.test_seed);
            read(b, "direct", c.bench.direct);
            if (b.contains("gpr")) {
                const auto& g = b.at("gpr");
                read(g, "enabled", c.bench.gpr.enabled);
                read(g, "max_samples", c.bench.gpr.max_samples);
                read(g, "length_scales", c.bench.gpr.length_scales);
            }
            if (b.contains("reference_lsmc")) c.bench.reference_lsmc = b.at("reference_lsmc").get<LsmcConfig>();
        }
        if (c.bench.budgets.empty()) throw ConfigError("bench.budgets must not be empty");
        if (c.bench.test_size == 0) throw ConfigError("bench.test_size must be positive");
        if (c.bench.gpr.length_scales.empty()) throw ConfigError("bench.gpr.length_scales must not be empty");
        for (double l : c.bench.gpr.length_scales) {
            if (!(l > 0.0)) throw ConfigError("bench.gpr.length_scales must be positive");
        }

        read(j, "threads", c.threads);
        if (c.threads == 0) throw ConfigError("threads must be at least 1");
        if (j.contains("output_dir")) c.output_dir = j.at("output_dir").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    } catch (const ConfigError&) {
        throw;
    } catch (const Error& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    return c;
}

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("cannot open config " + path.string());
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(is);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("config " + path.string() + " is not valid JSON: " + e.what());
    }
    return parse_config(j);
}

}  // namespace ttsurrogate::cli
