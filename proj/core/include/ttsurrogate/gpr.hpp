#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Cholesky>

#include "ttsurrogate/tensor_train.hpp"

namespace ttsurrogate {

/// Laplacian kernel exp(-|x - x'|_1 / L).
double laplacian_kernel(std::span<const double> a, std::span<const double> b, double length_scale);

/// Dense exact Gaussian-process regression with the Laplacian kernel.
///
/// Inputs are taken as given; callers normalize features beforehand
/// (FeatureGrid::normalize) so that L has the same meaning as in the TT model.
struct GprModel {
    RowMatrix train_x;
    Eigen::VectorXd train_y;
    double length_scale = 1.0;
    double noise = 0.0;
    /// Diagonal jitter actually added (0 unless the plain factorization failed).
    double jitter = 0.0;
    Eigen::VectorXd alpha;
    Eigen::LLT<Eigen::MatrixXd> chol;
};

RowMatrix laplacian_kernel_matrix(const RowMatrix& x, double length_scale);

/// Factorizes K + noise*I, retrying once with 1e-10 added to the diagonal.
/// Throws ConditioningError if both attempts fail.
GprModel gpr_fit(const RowMatrix& x, const Eigen::VectorXd& y, double length_scale, double noise = 0.0);

double gpr_predict(const GprModel& model, std::span<const double> x_star);
/// `queries` row-major with train_x.cols() values per row.
std::vector<double> gpr_predict_batch(const GprModel& model, const RowMatrix& queries, std::size_t threads = 1);

/// 0.5 y^T alpha + sum(log diag(L)) + 0.5 N log(2 pi).
double gpr_nlml(const GprModel& model);

struct LengthScaleSearch {
    double best = 0.0;
    std::vector<double> candidates;
    std::vector<double> nlml;
    /// True when the minimizer is the largest candidate.
    bool at_upper_edge = false;
};

/// Grid search minimizing the NLML; candidates that fail to factorize are
/// recorded with an infinite NLML.
LengthScaleSearch select_length_scale(const RowMatrix& x, const Eigen::VectorXd& y, std::span<const double> candidates,
                                      double noise = 0.0);

/// GPR on standardized targets: y is shifted to zero mean and scaled to unit
/// variance before L is searched and the model fitted, since the kernel has
/// no amplitude parameter of its own. Predictions are mapped back.
struct StandardizedGpr {
    GprModel model;
    LengthScaleSearch search;
    double y_mean = 0.0;
    double y_scale = 1.0;

    double predict(std::span<const double> x_star) const;
    std::vector<double> predict_batch(const RowMatrix& queries, std::size_t threads = 1) const;
};

StandardizedGpr fit_standardized_gpr(const RowMatrix& x, const Eigen::VectorXd& y,
                                     std::span<const double> candidates, double noise = 0.0);

}  // namespace ttsurrogate
