#include "ttsurrogate/market.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <nlohmann/json.hpp>

namespace ttsurrogate {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

void check_point(const MarketPoint& p, const BasketModelParams& m) {
    m.validate();
    if (p.spots.size() != m.num_assets()) {
        throw DimensionError("market point has " + std::to_string(p.spots.size()) + " spots, model has " +
                             std::to_string(m.num_assets()) + " assets");
    }
    for (double s : p.spots) {
        if (!(s > 0.0)) throw DomainError("spot prices must be positive");
    }
    if (!(p.strike > 0.0)) throw DomainError("strike must be positive");
    if (!(p.ttm >= 0.0)) throw DomainError("time to maturity must be nonnegative");
}

// A with A A^T = correlation, from the symmetric eigendecomposition so that
// singular (for example fully correlated) baskets are still accepted.
RowMatrix correlation_factor(const RowMatrix& corr) {
    Eigen::SelfAdjointEigenSolver<RowMatrix> eig(corr);
    if (eig.info() != Eigen::Success) throw ConditioningError("correlation eigendecomposition failed");
    const Eigen::VectorXd lambda = eig.eigenvalues();
    if (lambda.minCoeff() < -1e-10) {
        throw ConditioningError("correlation matrix is not positive semidefinite (min eigenvalue " +
                                std::to_string(lambda.minCoeff()) + ")");
    }
    return eig.eigenvectors() * lambda.cwiseMax(0.0).cwiseSqrt().asDiagonal();
}

// Drives one path at a time; fills log-increment drift and diffusion terms once.
class GbmStepper {
public:
    GbmStepper(const MarketPoint& p, const BasketModelParams& m, std::size_t steps, std::uint64_t seed)
        : n_(m.num_assets()), factor_(correlation_factor(m.correlation)), rng_(seed), z_(n_), w_(n_) {
        const double dt = steps > 0 ? p.ttm / static_cast<double>(steps) : 0.0;
        drift_.resize(n_);
        diffusion_.resize(n_);
        for (std::size_t a = 0; a < n_; ++a) {
            drift_[a] = (p.rate - m.dividends[a] - 0.5 * m.vols[a] * m.vols[a]) * dt;
            diffusion_[a] = m.vols[a] * std::sqrt(dt);
        }
    }

    // Advances log-spots by one step in place.
    void step(std::span<double> log_spots) {
        for (std::size_t a = 0; a < n_; ++a) z_(static_cast<Eigen::Index>(a)) = normal_(rng_);
        w_.noalias() = factor_ * z_;
        for (std::size_t a = 0; a < n_; ++a) {
            log_spots[a] += drift_[a] + diffusion_[a] * w_(static_cast<Eigen::Index>(a));
        }
    }

private:
    std::size_t n_;
    RowMatrix factor_;
    std::mt19937_64 rng_;
    std::normal_distribution<double> normal_;
    Eigen::VectorXd z_;
    Eigen::VectorXd w_;
    std::vector<double> drift_;
    std::vector<double> diffusion_;
};

// Arithmetic basket average at every time point, [path][step].
std::vector<double> simulate_averages(const MarketPoint& p, const BasketModelParams& m, const LsmcConfig& cfg) {
    const std::size_t n = m.num_assets();
    const std::size_t cols = cfg.steps + 1;
    std::vector<double> avg(cfg.paths * cols);
    GbmStepper stepper(p, m, cfg.steps, cfg.seed);
    std::vector<double> log0(n);
    for (std::size_t a = 0; a < n; ++a) log0[a] = std::log(p.spots[a]);
    const double a0 = std::accumulate(p.spots.begin(), p.spots.end(), 0.0) / static_cast<double>(n);
    std::vector<double> logs(n);
    for (std::size_t path = 0; path < cfg.paths; ++path) {
        logs = log0;
        avg[path * cols] = a0;
        for (std::size_t s = 1; s <= cfg.steps; ++s) {
            stepper.step(logs);
            double sum = 0.0;
            for (double l : logs) sum += std::exp(l);
            avg[path * cols + s] = sum / static_cast<double>(n);
        }
    }
    return avg;
}

McEstimate mean_and_error(std::span<const double> x) {
    const double n = static_cast<double>(x.size());
    const double mean = std::accumulate(x.begin(), x.end(), 0.0) / n;
    double ss = 0.0;
    for (double v : x) ss += (v - mean) * (v - mean);
    const double var = x.size() > 1 ? ss / (n - 1.0) : 0.0;
    return {mean, std::sqrt(var / n)};
}

void check_config(const LsmcConfig& cfg) {
    if (cfg.paths < 2) throw DomainError("LSMC needs at least 2 paths");
    if (cfg.steps < 1) throw DomainError("LSMC needs at least 1 time step");
}

}  // namespace

BasketModelParams BasketModelParams::uniform(std::size_t assets, double vol, double rho, double dividend) {
    BasketModelParams m;
    m.vols.assign(assets, vol);
    m.dividends.assign(assets, dividend);
    m.correlation = RowMatrix::Constant(static_cast<Eigen::Index>(assets), static_cast<Eigen::Index>(assets), rho);
    m.correlation.diagonal().setOnes();
    return m;
}

void BasketModelParams::validate() const {
    const auto n = static_cast<Eigen::Index>(vols.size());
    if (n == 0) throw DomainError("basket needs at least one asset");
    if (dividends.size() != vols.size() || correlation.rows() != n || correlation.cols() != n) {
        throw DomainError("basket parameters have inconsistent sizes");
    }
    for (double v : vols) {
        if (!(v >= 0.0) || !std::isfinite(v)) throw DomainError("volatilities must be finite and nonnegative");
    }
    for (Eigen::Index i = 0; i < n; ++i) {
        if (std::abs(correlation(i, i) - 1.0) > 1e-12) throw DomainError("correlation diagonal must be 1");
        for (Eigen::Index j = 0; j < i; ++j) {
            if (std::abs(correlation(i, j) - correlation(j, i)) > 1e-12) {
                throw DomainError("correlation matrix must be symmetric");
            }
        }
    }
}

void to_json(nlohmann::json& j, const BasketModelParams& m) {
    std::vector<std::vector<double>> rows(m.vols.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t k = 0; k < rows.size(); ++k) {
            rows[i].push_back(m.correlation(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)));
        }
    }
    j = nlohmann::json{{"volatilities", m.vols}, {"correlation", rows}, {"dividends", m.dividends}};
}

void from_json(const nlohmann::json& j, BasketModelParams& m) {
    m.vols = j.at("volatilities").get<std::vector<double>>();
    const auto rows = j.at("correlation").get<std::vector<std::vector<double>>>();
    m.dividends = j.contains("dividends") ? j.at("dividends").get<std::vector<double>>()
                                          : std::vector<double>(m.vols.size(), 0.0);
    const auto n = static_cast<Eigen::Index>(rows.size());
    m.correlation.resize(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        if (rows[static_cast<std::size_t>(i)].size() != rows.size()) {
            throw DomainError("correlation matrix must be square");
        }
        for (Eigen::Index k = 0; k < n; ++k) m.correlation(i, k) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)];
    }
    m.validate();
}

void to_json(nlohmann::json& j, const LsmcConfig& c) {
    j = nlohmann::json{{"paths", c.paths}, {"steps", c.steps}, {"degree", c.degree}, {"seed", c.seed}};
}

void from_json(const nlohmann::json& j, LsmcConfig& c) {
    c.paths = j.value("paths", c.paths);
    c.steps = j.value("steps", c.steps);
    c.degree = j.value("degree", c.degree);
    c.seed = j.value("seed", c.seed);
    check_config(c);
}

std::uint64_t point_seed(std::uint64_t global_seed, std::span<const std::size_t> index) {
    std::uint64_t h = splitmix64(global_seed);
    for (std::size_t i : index) h = splitmix64(h ^ static_cast<std::uint64_t>(i));
    return h;
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double black_scholes_put(double spot, double strike, double rate, double dividend, double vol, double ttm) {
    const double forward = spot * std::exp((rate - dividend) * ttm);
    const double df = std::exp(-rate * ttm);
    const double sd = vol * std::sqrt(ttm);
    if (sd <= 0.0) return df * std::max(strike - forward, 0.0);
    const double d1 = (std::log(forward / strike) + 0.5 * sd * sd) / sd;
    const double d2 = d1 - sd;
    return df * (strike * normal_cdf(-d2) - forward * normal_cdf(-d1));
}

double price_european_geo_basket_put(const MarketPoint& p, const BasketModelParams& m) {
    check_point(p, m);
    const std::size_t n = m.num_assets();
    const double inv_n = 1.0 / static_cast<double>(n);
    double log_g0 = 0.0;
    double drift = 0.0;
    for (std::size_t a = 0; a < n; ++a) {
        log_g0 += std::log(p.spots[a]);
        drift += p.rate - m.dividends[a] - 0.5 * m.vols[a] * m.vols[a];
    }
    log_g0 *= inv_n;
    drift *= inv_n;
    double var = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t k = 0; k < n; ++k) {
            var += m.vols[i] * m.vols[k] * m.correlation(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k));
        }
    }
    var *= inv_n * inv_n;
    // G_T is lognormal with log-mean log_g0 + drift*T and variance var*T.
    const double forward = std::exp(log_g0 + (drift + 0.5 * var) * p.ttm);
    const double df = std::exp(-p.rate * p.ttm);
    const double sd = std::sqrt(var * p.ttm);
    if (sd <= 0.0) return df * std::max(p.strike - forward, 0.0);
    const double d1 = (std::log(forward / p.strike) + 0.5 * sd * sd) / sd;
    const double d2 = d1 - sd;
    return df * (p.strike * normal_cdf(-d2) - forward * normal_cdf(-d1));
}

McEstimate price_european_geo_basket_put_mc(const MarketPoint& p, const BasketModelParams& m, std::size_t paths,
                                            std::uint64_t seed) {
    check_point(p, m);
    if (paths < 2) throw DomainError("Monte Carlo needs at least 2 paths");
    const std::size_t n = m.num_assets();
    GbmStepper stepper(p, m, 1, seed);
    std::vector<double> log0(n);
    for (std::size_t a = 0; a < n; ++a) log0[a] = std::log(p.spots[a]);
    const double df = std::exp(-p.rate * p.ttm);
    std::vector<double> payoff(paths);
    std::vector<double> logs(n);
    for (std::size_t path = 0; path < paths; ++path) {
        logs = log0;
        stepper.step(logs);
        const double g = std::exp(std::accumulate(logs.begin(), logs.end(), 0.0) / static_cast<double>(n));
        payoff[path] = df * std::max(p.strike - g, 0.0);
    }
    return mean_and_error(payoff);
}

PathArray simulate_gbm_paths(const MarketPoint& p, const BasketModelParams& m, const LsmcConfig& cfg) {
    check_point(p, m);
    check_config(cfg);
    PathArray out{cfg.paths, cfg.steps, m.num_assets(), {}};
    out.values.resize(cfg.paths * (cfg.steps + 1) * out.assets);
    GbmStepper stepper(p, m, cfg.steps, cfg.seed);
    std::vector<double> logs(out.assets);
    for (std::size_t path = 0; path < cfg.paths; ++path) {
        double* row = out.values.data() + path * (cfg.steps + 1) * out.assets;
        for (std::size_t a = 0; a < out.assets; ++a) {
            logs[a] = std::log(p.spots[a]);
            row[a] = p.spots[a];
        }
        for (std::size_t s = 1; s <= cfg.steps; ++s) {
            stepper.step(logs);
            for (std::size_t a = 0; a < out.assets; ++a) row[s * out.assets + a] = std::exp(logs[a]);
        }
    }
    return out;
}

McEstimate price_american_arith_basket_put_lsmc(const MarketPoint& p, const BasketModelParams& m,
                                                const LsmcConfig& cfg) {
    check_point(p, m);
    check_config(cfg);
    const double a0 = std::accumulate(p.spots.begin(), p.spots.end(), 0.0) / static_cast<double>(p.spots.size());
    const double exercise_now = std::max(p.strike - a0, 0.0);
    if (p.ttm <= 0.0) return {exercise_now, 0.0};

    const std::size_t cols = cfg.steps + 1;
    const std::vector<double> avg = simulate_averages(p, m, cfg);
    const double dt = p.ttm / static_cast<double>(cfg.steps);
    const double step_df = std::exp(-p.rate * dt);
    const auto basis = static_cast<Eigen::Index>(cfg.degree + 1);

    // Cash flow per path, valued at the current step of the backward sweep.
    std::vector<double> value(cfg.paths);
    for (std::size_t path = 0; path < cfg.paths; ++path) {
        value[path] = std::max(p.strike - avg[path * cols + cfg.steps], 0.0);
    }
    std::vector<std::size_t> itm;
    itm.reserve(cfg.paths);
    for (std::size_t s = cfg.steps - 1; s >= 1; --s) {
        for (double& v : value) v *= step_df;
        itm.clear();
        for (std::size_t path = 0; path < cfg.paths; ++path) {
            if (p.strike - avg[path * cols + s] > 0.0) itm.push_back(path);
        }
        if (static_cast<Eigen::Index>(itm.size()) <= basis) continue;

        const auto rows = static_cast<Eigen::Index>(itm.size());
        Eigen::MatrixXd x(rows, basis);
        Eigen::VectorXd y(rows);
        for (Eigen::Index r = 0; r < rows; ++r) {
            const std::size_t path = itm[static_cast<std::size_t>(r)];
            const double z = avg[path * cols + s] / p.strike;
            double power = 1.0;
            for (Eigen::Index b = 0; b < basis; ++b, power *= z) x(r, b) = power;
            y(r) = value[path];
        }
        const Eigen::VectorXd beta = x.completeOrthogonalDecomposition().solve(y);
        const Eigen::VectorXd continuation = x * beta;
        for (Eigen::Index r = 0; r < rows; ++r) {
            const std::size_t path = itm[static_cast<std::size_t>(r)];
            const double payoff = p.strike - avg[path * cols + s];
            if (payoff >= continuation(r)) value[path] = payoff;
        }
    }
    for (double& v : value) v *= step_df;
    McEstimate est = mean_and_error(value);
    if (exercise_now > est.price) est.price = exercise_now;
    return est;
}

McEstimate price_european_arith_basket_put_mc(const MarketPoint& p, const BasketModelParams& m,
                                              const LsmcConfig& cfg) {
    check_point(p, m);
    check_config(cfg);
    if (p.ttm <= 0.0) {
        const double a0 = std::accumulate(p.spots.begin(), p.spots.end(), 0.0) / static_cast<double>(p.spots.size());
        return {std::max(p.strike - a0, 0.0), 0.0};
    }
    const std::size_t cols = cfg.steps + 1;
    const std::vector<double> avg = simulate_averages(p, m, cfg);
    const double df = std::exp(-p.rate * p.ttm);
    std::vector<double> payoff(cfg.paths);
    for (std::size_t path = 0; path < cfg.paths; ++path) {
        payoff[path] = df * std::max(p.strike - avg[path * cols + cfg.steps], 0.0);
    }
    return mean_and_error(payoff);
}

double binomial_tree_american_put(double spot, double strike, double rate, double dividend, double vol, double ttm,
                                  std::size_t steps) {
    if (steps < 1) throw DomainError("binomial tree needs at least one step");
    if (ttm <= 0.0) return std::max(strike - spot, 0.0);
    const double dt = ttm / static_cast<double>(steps);
    const double u = std::exp(vol * std::sqrt(dt));
    const double d = 1.0 / u;
    const double growth = std::exp((rate - dividend) * dt);
    const double q = (growth - d) / (u - d);
    if (!(q > 0.0 && q < 1.0)) throw DomainError("binomial tree: step too coarse for an arbitrage-free lattice");
    const double df = std::exp(-rate * dt);

    std::vector<double> v(steps + 1);
    for (std::size_t j = 0; j <= steps; ++j) {
        const double s = spot * std::pow(u, static_cast<double>(j)) * std::pow(d, static_cast<double>(steps - j));
        v[j] = std::max(strike - s, 0.0);
    }
    for (std::size_t i = steps; i-- > 0;) {
        for (std::size_t j = 0; j <= i; ++j) {
            const double s = spot * std::pow(u, static_cast<double>(j)) * std::pow(d, static_cast<double>(i - j));
            v[j] = std::max(df * (q * v[j + 1] + (1.0 - q) * v[j]), strike - s);
        }
    }
    return v[0];
}

}  // namespace ttsurrogate
