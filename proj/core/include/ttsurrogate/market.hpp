#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "ttsurrogate/tensor_train.hpp"

namespace ttsurrogate {

/// Market state for a basket put: spots, strike, rate r, maturity T in years.
struct MarketPoint {
    std::vector<double> spots;
    double strike = 100.0;
    double rate = 0.05;
    double ttm = 1.0;
};

/// Lognormal basket dynamics. Volatilities and dividend yields are annual.
struct BasketModelParams {
    std::vector<double> vols;
    RowMatrix correlation;
    std::vector<double> dividends;

    /// Equal volatility, equal pairwise correlation, no dividends.
    static BasketModelParams uniform(std::size_t assets, double vol = 0.2, double rho = 0.5,
                                     double dividend = 0.0);

    std::size_t num_assets() const noexcept { return vols.size(); }
    /// Throws DomainError on inconsistent sizes, negative vols, a
    /// non-symmetric correlation or a diagonal other than one.
    void validate() const;
};

void to_json(nlohmann::json& j, const BasketModelParams& m);
void from_json(const nlohmann::json& j, BasketModelParams& m);

struct LsmcConfig {
    std::size_t paths = 10000;
    std::size_t steps = 30;
    /// Highest power of A/K in the regression basis.
    unsigned degree = 3;
    std::uint64_t seed = 0;
};

void to_json(nlohmann::json& j, const LsmcConfig& c);
void from_json(const nlohmann::json& j, LsmcConfig& c);

struct McEstimate {
    double price = 0.0;
    double std_error = 0.0;
};

/// Deterministic 64-bit seed for one grid point (splitmix64 chain).
std::uint64_t point_seed(std::uint64_t global_seed, std::span<const std::size_t> index);

double normal_cdf(double x);
double black_scholes_put(double spot, double strike, double rate, double dividend, double vol, double ttm);

/// Closed-form European put on the geometric average of the basket.
double price_european_geo_basket_put(const MarketPoint& p, const BasketModelParams& m);

/// Monte Carlo estimate of the same price from terminal values only.
McEstimate price_european_geo_basket_put_mc(const MarketPoint& p, const BasketModelParams& m,
                                            std::size_t paths, std::uint64_t seed);

/// Simulated paths, laid out [path][step][asset] with steps + 1 time points.
struct PathArray {
    std::size_t paths = 0;
    std::size_t steps = 0;
    std::size_t assets = 0;
    std::vector<double> values;

    double operator()(std::size_t path, std::size_t step, std::size_t asset) const {
        return values[(path * (steps + 1) + step) * assets + asset];
    }
};

/// Exact lognormal scheme on an equally spaced grid with correlated normals.
/// Throws ConditioningError if the correlation is not positive semidefinite.
PathArray simulate_gbm_paths(const MarketPoint& p, const BasketModelParams& m, const LsmcConfig& cfg);

/// Longstaff-Schwartz American put on the arithmetic basket average.
McEstimate price_american_arith_basket_put_lsmc(const MarketPoint& p, const BasketModelParams& m,
                                                const LsmcConfig& cfg);

/// European arithmetic-basket put on the same paths the LSMC pricer uses.
McEstimate price_european_arith_basket_put_mc(const MarketPoint& p, const BasketModelParams& m,
                                              const LsmcConfig& cfg);

/// Cox-Ross-Rubinstein tree with early exercise.
double binomial_tree_american_put(double spot, double strike, double rate, double dividend, double vol,
                                  double ttm, std::size_t steps);

}  // namespace ttsurrogate
