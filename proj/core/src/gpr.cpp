#include "ttsurrogate/gpr.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "ttsurrogate/parallel.hpp"

namespace ttsurrogate {

double laplacian_kernel(std::span<const double> a, std::span<const double> b, double length_scale) {
    double dist = 0.0;
    for (std::size_t f = 0; f < a.size(); ++f) dist += std::abs(a[f] - b[f]);
    return std::exp(-dist / length_scale);
}

RowMatrix laplacian_kernel_matrix(const RowMatrix& x, double length_scale) {
    const Eigen::Index n = x.rows();
    const auto f = static_cast<std::size_t>(x.cols());
    RowMatrix k(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        k(i, i) = 1.0;
        const std::span<const double> xi(x.row(i).data(), f);
        for (Eigen::Index j = 0; j < i; ++j) {
            const double v = laplacian_kernel(xi, std::span<const double>(x.row(j).data(), f), length_scale);
            k(i, j) = v;
            k(j, i) = v;
        }
    }
    return k;
}

GprModel gpr_fit(const RowMatrix& x, const Eigen::VectorXd& y, double length_scale, double noise) {
    if (x.rows() == 0) throw DimensionError("gpr_fit: no training data");
    if (x.rows() != y.size()) throw DimensionError("gpr_fit: x and y disagree on the sample count");
    if (!(length_scale > 0.0)) throw DomainError("gpr_fit: length scale must be positive");
    if (!(noise >= 0.0)) throw DomainError("gpr_fit: noise variance must be nonnegative");

    GprModel model;
    model.train_x = x;
    model.train_y = y;
    model.length_scale = length_scale;
    model.noise = noise;

    Eigen::MatrixXd k = laplacian_kernel_matrix(x, length_scale);
    k.diagonal().array() += noise;
    model.chol.compute(k);
    if (model.chol.info() != Eigen::Success) {
        model.jitter = 1e-10;
        k.diagonal().array() += model.jitter;
        model.chol.compute(k);
        if (model.chol.info() != Eigen::Success) {
            throw ConditioningError("gpr_fit: kernel matrix is not positive definite even with jitter");
        }
    }
    model.alpha = model.chol.solve(y);
    return model;
}

double gpr_predict(const GprModel& model, std::span<const double> x_star) {
    const auto f = static_cast<std::size_t>(model.train_x.cols());
    if (x_star.size() != f) throw DimensionError("gpr_predict: wrong feature count");
    double sum = 0.0;
    for (Eigen::Index i = 0; i < model.train_x.rows(); ++i) {
        sum += model.alpha(i) *
               laplacian_kernel(x_star, std::span<const double>(model.train_x.row(i).data(), f), model.length_scale);
    }
    return sum;
}

std::vector<double> gpr_predict_batch(const GprModel& model, const RowMatrix& queries, std::size_t threads) {
    std::vector<double> out(static_cast<std::size_t>(queries.rows()));
    const auto f = static_cast<std::size_t>(queries.cols());
    parallel_for(out.size(), threads, [&](std::size_t begin, std::size_t end) {
        for (std::size_t q = begin; q < end; ++q) {
            out[q] = gpr_predict(model, std::span<const double>(queries.row(static_cast<Eigen::Index>(q)).data(), f));
        }
    });
    return out;
}

double gpr_nlml(const GprModel& model) {
    const Eigen::Index n = model.train_y.size();
    const double log_det_half = model.chol.matrixLLT().diagonal().array().log().sum();
    return 0.5 * model.train_y.dot(model.alpha) + log_det_half +
           0.5 * static_cast<double>(n) * std::log(2.0 * std::numbers::pi);
}

LengthScaleSearch select_length_scale(const RowMatrix& x, const Eigen::VectorXd& y, std::span<const double> candidates,
                                      double noise) {
    if (candidates.empty()) throw DomainError("select_length_scale: no candidates");
    LengthScaleSearch out;
    out.candidates.assign(candidates.begin(), candidates.end());
    double best_nlml = std::numeric_limits<double>::infinity();
    for (double l : candidates) {
        double value = std::numeric_limits<double>::infinity();
        try {
            value = gpr_nlml(gpr_fit(x, y, l, noise));
        } catch (const ConditioningError&) {
            // leave the candidate at +inf
        }
        out.nlml.push_back(value);
        if (value < best_nlml) {
            best_nlml = value;
            out.best = l;
        }
    }
    if (!std::isfinite(best_nlml)) throw ConditioningError("select_length_scale: every candidate failed to factorize");
    out.at_upper_edge = out.best == *std::max_element(candidates.begin(), candidates.end());
    return out;
}

double StandardizedGpr::predict(std::span<const double> x_star) const {
    return y_mean + y_scale * gpr_predict(model, x_star);
}

std::vector<double> StandardizedGpr::predict_batch(const RowMatrix& queries, std::size_t threads) const {
    std::vector<double> out = gpr_predict_batch(model, queries, threads);
    for (double& v : out) v = y_mean + y_scale * v;
    return out;
}

StandardizedGpr fit_standardized_gpr(const RowMatrix& x, const Eigen::VectorXd& y, std::span<const double> candidates,
                                     double noise) {
    if (y.size() == 0) throw DimensionError("fit_standardized_gpr: no training data");
    StandardizedGpr out;
    out.y_mean = y.mean();
    const double sd = std::sqrt((y.array() - out.y_mean).square().mean());
    // A constant target keeps unit scale; the fit is then exactly the mean.
    out.y_scale = sd > 0.0 ? sd : 1.0;
    const Eigen::VectorXd z = (y.array() - out.y_mean) / out.y_scale;
    out.search = select_length_scale(x, z, candidates, noise);
    out.model = gpr_fit(x, z, out.search.best, noise);
    return out;
}

}  // namespace ttsurrogate
