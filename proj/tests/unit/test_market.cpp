#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include <nlohmann/json.hpp>

#include "ttsurrogate/market.hpp"

namespace tts = ttsurrogate;

namespace {

tts::MarketPoint point(std::vector<double> spots, double strike, double rate, double ttm) {
    return {std::move(spots), strike, rate, ttm};
}

}  // namespace

TEST(GeoBasket, ZeroMaturityIsIntrinsic) {
    const auto m = tts::BasketModelParams::uniform(3);
    const auto p = point({80.0, 90.0, 100.0}, 110.0, 0.03, 0.0);
    const double g = std::cbrt(80.0 * 90.0 * 100.0);
    EXPECT_NEAR(tts::price_european_geo_basket_put(p, m), 110.0 - g, 1e-12);
}

TEST(GeoBasket, ZeroVolIsDiscountedForwardIntrinsic) {
    const auto m = tts::BasketModelParams::uniform(4, 0.0, 0.3);
    const auto p = point({50.0, 60.0, 70.0, 80.0}, 90.0, 0.04, 1.5);
    const double g0 = std::pow(50.0 * 60.0 * 70.0 * 80.0, 0.25);
    const double expected = std::exp(-0.04 * 1.5) * std::max(90.0 - g0 * std::exp(0.04 * 1.5), 0.0);
    EXPECT_NEAR(tts::price_european_geo_basket_put(p, m), expected, 1e-10);
}

TEST(GeoBasket, SingleAssetIsBlackScholes) {
    const auto m = tts::BasketModelParams::uniform(1, 0.25, 0.0, 0.01);
    const auto p = point({95.0}, 100.0, 0.05, 0.75);
    EXPECT_NEAR(tts::price_european_geo_basket_put(p, m), tts::black_scholes_put(95.0, 100.0, 0.05, 0.01, 0.25, 0.75),
                1e-12);
}

TEST(GeoBasket, FullyCorrelatedEqualSpotsIsBlackScholes) {
    const auto m = tts::BasketModelParams::uniform(5, 0.2, 1.0);
    const auto p = point(std::vector<double>(5, 100.0), 100.0, 0.05, 1.0);
    EXPECT_NEAR(tts::price_european_geo_basket_put(p, m), tts::black_scholes_put(100.0, 100.0, 0.05, 0.0, 0.2, 1.0),
                1e-10);
}

TEST(GeoBasket, BoundsAndMonotonicity) {
    const auto m = tts::BasketModelParams::uniform(5);
    double prev_strike = -1.0;
    for (double k : {20.0, 60.0, 100.0, 140.0, 200.0}) {
        const auto p = point({60.0, 80.0, 100.0, 120.0, 140.0}, k, 0.03, 1.0);
        const double v = tts::price_european_geo_basket_put(p, m);
        EXPECT_GE(v, 0.0);
        EXPECT_LE(v, k * std::exp(-0.03));
        EXPECT_GT(v, prev_strike);
        prev_strike = v;
    }
    double prev_spot = 1e9;
    for (double s : {20.0, 60.0, 100.0, 140.0}) {
        const double v = tts::price_european_geo_basket_put(point(std::vector<double>(5, s), 100.0, 0.03, 1.0), m);
        EXPECT_LT(v, prev_spot);
        prev_spot = v;
    }
}

TEST(GeoBasket, ClosedFormAgreesWithMonteCarlo) {
    const auto m = tts::BasketModelParams::uniform(5);
    const std::vector<tts::MarketPoint> pts = {
        point({100.0, 100.0, 100.0, 100.0, 100.0}, 100.0, 0.05, 1.0),
        point({20.0, 140.0, 75.0, 10.0, 55.0}, 60.0, 0.01, 2.5),
        point({130.0, 90.0, 110.0, 100.0, 120.0}, 150.0, 0.07, 0.2),
    };
    for (std::size_t i = 0; i < pts.size(); ++i) {
        const double exact = tts::price_european_geo_basket_put(pts[i], m);
        const auto mc = tts::price_european_geo_basket_put_mc(pts[i], m, 400000, 17 + i);
        EXPECT_LE(std::abs(mc.price - exact), 3.0 * mc.std_error + 1e-6) << "point " << i;
    }
}

TEST(GeoBasket, RejectsBadInputs) {
    const auto m = tts::BasketModelParams::uniform(2);
    EXPECT_THROW(tts::price_european_geo_basket_put(point({100.0}, 100.0, 0.05, 1.0), m), tts::DimensionError);
    EXPECT_THROW(tts::price_european_geo_basket_put(point({100.0, -1.0}, 100.0, 0.05, 1.0), m), tts::DomainError);
    EXPECT_THROW(tts::price_european_geo_basket_put(point({100.0, 100.0}, 0.0, 0.05, 1.0), m), tts::DomainError);
    EXPECT_THROW(tts::price_european_geo_basket_put(point({100.0, 100.0}, 100.0, 0.05, -0.1), m), tts::DomainError);
}

TEST(BasketParams, JsonRoundTripAndValidation) {
    auto m = tts::BasketModelParams::uniform(3, 0.3, 0.2, 0.01);
    m.vols[1] = 0.15;
    const nlohmann::json j = m;
    const auto back = j.get<tts::BasketModelParams>();
    EXPECT_EQ(back.vols, m.vols);
    EXPECT_EQ(back.dividends, m.dividends);
    EXPECT_TRUE(back.correlation.isApprox(m.correlation, 0.0));

    auto bad = m;
    bad.correlation(0, 1) = 0.9;
    EXPECT_THROW(bad.validate(), tts::DomainError);
    bad = m;
    bad.vols[0] = -0.1;
    EXPECT_THROW(bad.validate(), tts::DomainError);
}

TEST(Gbm, ZeroVolPathsAreDeterministicGrowth) {
    auto m = tts::BasketModelParams::uniform(2, 0.0, 0.0);
    m.dividends = {0.0, 0.02};
    const auto p = point({100.0, 50.0}, 100.0, 0.05, 2.0);
    const auto paths = tts::simulate_gbm_paths(p, m, {4, 8, 3, 1});
    for (std::size_t path = 0; path < 4; ++path) {
        for (std::size_t s = 0; s <= 8; ++s) {
            const double t = 2.0 * static_cast<double>(s) / 8.0;
            EXPECT_NEAR(paths(path, s, 0), 100.0 * std::exp(0.05 * t), 1e-10);
            EXPECT_NEAR(paths(path, s, 1), 50.0 * std::exp(0.03 * t), 1e-10);
        }
    }
}

TEST(Gbm, DiscountedTerminalMeanIsSpot) {
    const auto m = tts::BasketModelParams::uniform(3, 0.3, 0.6);
    const auto p = point({80.0, 100.0, 120.0}, 100.0, 0.04, 1.0);
    const tts::LsmcConfig cfg{100000, 4, 3, 99};
    const auto paths = tts::simulate_gbm_paths(p, m, cfg);
    for (std::size_t a = 0; a < 3; ++a) {
        double sum = 0.0, sq = 0.0;
        for (std::size_t path = 0; path < cfg.paths; ++path) {
            const double v = std::exp(-0.04) * paths(path, cfg.steps, a);
            sum += v;
            sq += v * v;
        }
        const double n = static_cast<double>(cfg.paths);
        const double mean = sum / n;
        const double se = std::sqrt((sq / n - mean * mean) / n);
        EXPECT_LE(std::abs(mean - p.spots[a]), 4.0 * se) << "asset " << a;
    }
}

TEST(Gbm, EmpiricalCorrelationMatchesInput) {
    auto m = tts::BasketModelParams::uniform(2, 0.2, 0.0);
    m.correlation(0, 1) = m.correlation(1, 0) = -0.7;
    const auto p = point({100.0, 100.0}, 100.0, 0.0, 1.0);
    const auto paths = tts::simulate_gbm_paths(p, m, {50000, 1, 3, 5});
    double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
    for (std::size_t i = 0; i < 50000; ++i) {
        const double x = std::log(paths(i, 1, 0) / 100.0), y = std::log(paths(i, 1, 1) / 100.0);
        sx += x; sy += y; sxx += x * x; syy += y * y; sxy += x * y;
    }
    const double n = 50000.0;
    const double cov = sxy / n - sx * sy / (n * n);
    const double corr = cov / std::sqrt((sxx / n - sx * sx / (n * n)) * (syy / n - sy * sy / (n * n)));
    EXPECT_NEAR(corr, -0.7, 0.02);
}

TEST(Gbm, SameSeedSamePaths) {
    const auto m = tts::BasketModelParams::uniform(3);
    const auto p = point({90.0, 100.0, 110.0}, 100.0, 0.05, 1.0);
    const auto a = tts::simulate_gbm_paths(p, m, {100, 10, 3, 42});
    const auto b = tts::simulate_gbm_paths(p, m, {100, 10, 3, 42});
    const auto c = tts::simulate_gbm_paths(p, m, {100, 10, 3, 43});
    EXPECT_EQ(a.values, b.values);
    EXPECT_NE(a.values, c.values);
}

TEST(Gbm, NonPsdCorrelationThrows) {
    auto m = tts::BasketModelParams::uniform(3, 0.2, 0.0);
    m.correlation << 1.0, 0.9, -0.9,
                     0.9, 1.0, 0.9,
                    -0.9, 0.9, 1.0;
    const auto p = point({100.0, 100.0, 100.0}, 100.0, 0.05, 1.0);
    EXPECT_THROW(tts::simulate_gbm_paths(p, m, {10, 2, 3, 1}), tts::ConditioningError);
    EXPECT_THROW(tts::price_american_arith_basket_put_lsmc(p, m, {10, 2, 3, 1}), tts::ConditioningError);
}

TEST(Lsmc, OneStepEqualsEuropeanOnSamePaths) {
    const auto m = tts::BasketModelParams::uniform(5);
    const auto p = point({90.0, 95.0, 100.0, 105.0, 110.0}, 105.0, 0.05, 1.0);
    const tts::LsmcConfig cfg{20000, 1, 3, 7};
    const auto am = tts::price_american_arith_basket_put_lsmc(p, m, cfg);
    const auto eu = tts::price_european_arith_basket_put_mc(p, m, cfg);
    EXPECT_DOUBLE_EQ(am.price, std::max(eu.price, 105.0 - 100.0));
    EXPECT_DOUBLE_EQ(am.std_error, eu.std_error);
}

TEST(Lsmc, AmericanDominatesEuropean) {
    const auto m = tts::BasketModelParams::uniform(5);
    for (double k : {80.0, 100.0, 130.0}) {
        const auto p = point({90.0, 95.0, 100.0, 105.0, 110.0}, k, 0.06, 1.0);
        const tts::LsmcConfig cfg{20000, 30, 3, 11};
        const auto am = tts::price_american_arith_basket_put_lsmc(p, m, cfg);
        const auto eu = tts::price_european_arith_basket_put_mc(p, m, cfg);
        EXPECT_GE(am.price, eu.price - 2.0 * am.std_error) << "strike " << k;
    }
}

TEST(Lsmc, DeepInTheMoneyExercisesImmediately) {
    const auto m = tts::BasketModelParams::uniform(5);
    const auto p = point(std::vector<double>(5, 5.0), 200.0, 0.08, 3.0);
    const auto am = tts::price_american_arith_basket_put_lsmc(p, m, {5000, 30, 3, 3});
    EXPECT_NEAR(am.price, 195.0, 1e-9);
}

TEST(Lsmc, DeepOutOfTheMoneyIsZeroWithoutRegressionFailure) {
    const auto m = tts::BasketModelParams::uniform(5, 0.1);
    const auto p = point(std::vector<double>(5, 150.0), 1.0, 0.05, 0.1);
    const auto am = tts::price_american_arith_basket_put_lsmc(p, m, {2000, 10, 3, 3});
    EXPECT_EQ(am.price, 0.0);
    EXPECT_EQ(am.std_error, 0.0);
}

TEST(Lsmc, ZeroMaturityIsIntrinsic) {
    const auto m = tts::BasketModelParams::uniform(2);
    const auto am = tts::price_american_arith_basket_put_lsmc(point({80.0, 100.0}, 100.0, 0.05, 0.0), m, {});
    EXPECT_DOUBLE_EQ(am.price, 10.0);
}

TEST(Lsmc, SeedDeterminism) {
    const auto m = tts::BasketModelParams::uniform(5);
    const auto p = point({90.0, 95.0, 100.0, 105.0, 110.0}, 100.0, 0.05, 1.0);
    const auto a = tts::price_american_arith_basket_put_lsmc(p, m, {5000, 20, 3, 123});
    const auto b = tts::price_american_arith_basket_put_lsmc(p, m, {5000, 20, 3, 123});
    EXPECT_EQ(a.price, b.price);
    EXPECT_EQ(a.std_error, b.std_error);
}

TEST(Lsmc, DegenerateBasketMatchesBinomialTree) {
    // Fully correlated identical assets collapse the basket to one asset.
    const auto m = tts::BasketModelParams::uniform(5, 0.2, 1.0);
    const auto p = point(std::vector<double>(5, 100.0), 100.0, 0.05, 1.0);
    const auto am = tts::price_american_arith_basket_put_lsmc(p, m, {100000, 100, 3, 2024});
    const double tree = tts::binomial_tree_american_put(100.0, 100.0, 0.05, 0.0, 0.2, 1.0, 1000);
    EXPECT_LE(std::abs(am.price - tree), 0.01 * tree) << am.price << " vs " << tree;
}

TEST(Lsmc, ConfigJsonRoundTrip) {
    const tts::LsmcConfig c{1234, 17, 2, 99};
    const nlohmann::json j = c;
    const auto back = j.get<tts::LsmcConfig>();
    EXPECT_EQ(back.paths, 1234u);
    EXPECT_EQ(back.steps, 17u);
    EXPECT_EQ(back.degree, 2u);
    EXPECT_EQ(back.seed, 99u);
    EXPECT_THROW((nlohmann::json{{"paths", 1}}.get<tts::LsmcConfig>()), tts::DomainError);
}

TEST(Binomial, ZeroMaturityIsIntrinsic) {
    EXPECT_DOUBLE_EQ(tts::binomial_tree_american_put(90.0, 100.0, 0.05, 0.0, 0.2, 0.0, 100), 10.0);
}

TEST(Binomial, DominatesEuropeanAndConverges) {
    const double s = 100.0, k = 100.0, r = 0.05, v = 0.2, t = 1.0;
    const double p1000 = tts::binomial_tree_american_put(s, k, r, 0.0, v, t, 1000);
    const double p2000 = tts::binomial_tree_american_put(s, k, r, 0.0, v, t, 2000);
    EXPECT_GT(p1000, tts::black_scholes_put(s, k, r, 0.0, v, t));
    EXPECT_NEAR(p1000, p2000, 1e-3);
    // Widely quoted value for these inputs.
    EXPECT_NEAR(p2000, 6.09, 0.01);
}

TEST(Binomial, ZeroRateEqualsEuropean) {
    const double tree = tts::binomial_tree_american_put(100.0, 110.0, 0.0, 0.0, 0.3, 0.5, 2000);
    EXPECT_NEAR(tree, tts::black_scholes_put(100.0, 110.0, 0.0, 0.0, 0.3, 0.5), 5e-3);
}

TEST(PointSeed, DeterministicAndIndexSensitive) {
    const std::vector<std::size_t> a{1, 2, 3}, b{1, 2, 4}, c{3, 2, 1};
    EXPECT_EQ(tts::point_seed(7, a), tts::point_seed(7, a));
    EXPECT_NE(tts::point_seed(7, a), tts::point_seed(7, b));
    EXPECT_NE(tts::point_seed(7, a), tts::point_seed(7, c));
    EXPECT_NE(tts::point_seed(7, a), tts::point_seed(8, a));
}
