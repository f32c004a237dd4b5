#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ttsurrogate/pipeline.hpp"

namespace ttsurrogate::cli {

inline constexpr int schema_version = 1;

/// Bad configuration or input files; the CLI exits with code 2.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class ExperimentKind { european_geo, american_arith, custom };

std::string to_string(ExperimentKind kind);

/// Analytic black boxes for smoke runs without a market model.
struct CustomFunction {
    /// "exp-linear": exp(sum c_f u_f); "sum": sum c_f u_f;
    /// "gaussian-bump": exp(-sum c_f (u_f - 0.5)^2). u is x normalized to [0, 1].
    std::string name = "exp-linear";
    std::vector<double> coefficients;

    double operator()(const FeatureGrid& grid, std::span<const double> x) const;
};

struct GprBaseline {
    bool enabled = false;
    /// Dense GPR is cubic in the sample count; budgets above this are capped.
    std::size_t max_samples = 2000;
    std::vector<double> length_scales{0.01, 0.03, 0.1, 0.3, 1.0, 3.0, 10.0};
};

struct BenchSettings {
    std::vector<std::uint64_t> budgets{1000};
    std::size_t test_size = 1000;
    std::uint64_t test_seed = 1;
    bool direct = true;
    GprBaseline gpr;
    /// Paths and steps of the reference LSMC; seeds are derived per point.
    LsmcConfig reference_lsmc{};
};

struct RunConfig {
    ExperimentKind experiment = ExperimentKind::custom;
    FeatureGrid grid{std::vector<FeatureAxis>{{"x", 0.0, 1.0, 4}}};
    TrainOptions train;
    BasketModelParams model;
    LsmcConfig lsmc;
    CustomFunction custom;
    BenchSettings bench;
    std::size_t threads = 1;
    std::filesystem::path output_dir = "out";

    /// Pricing function for the configured experiment.
    GridPricer::PriceFn price_fn() const;
    /// Canonical JSON form; parse_config(to_json()) reproduces the config.
    nlohmann::json to_json() const;
    /// 64-bit FNV-1a of the canonical JSON, as 16 hex digits.
    std::string hash() const;
};

/// Validates everything up front. Throws ConfigError with a message naming
/// the offending key or feature.
RunConfig parse_config(const nlohmann::json& j);
RunConfig load_config(const std::filesystem::path& path);

std::string fnv1a_hex(std::string_view bytes);

}  // namespace ttsurrogate::cli
