#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "ttsurrogate/tensor_train.hpp"

namespace ttsurrogate {

/// One feature axis of a uniform lattice with 2^bits points.
struct LatticeAxis {
    double origin = 0.0;
    double spacing = 1.0;
    unsigned bits = 1;

    std::size_t points() const noexcept { return std::size_t{1} << bits; }
    double coordinate(std::size_t i) const noexcept { return origin + spacing * static_cast<double>(i); }
    double upper() const noexcept { return coordinate(points() - 1); }
};

/// Laplacian kernel exp(-|x - x'|_1 / L) restricted to a tensor-product lattice.
///
/// All quantities share the units of the axes. Per-feature decay is
/// a = exp(-spacing / L), clamped to 1 - 1e-12 for finite L; an infinite L
/// gives a = 1 exactly (the constant kernel, which has no inverse).
class LatticeKernelSpec {
public:
    static constexpr double max_decay = 1.0 - 1e-12;

    LatticeKernelSpec(std::vector<LatticeAxis> axes, double length_scale);

    /// Unit-spacing axes with the given decays; L = 1 so spacing_f = -log(a_f).
    static LatticeKernelSpec from_decays(std::span<const double> decays, std::span<const unsigned> bits);

    const std::vector<LatticeAxis>& axes() const noexcept { return axes_; }
    std::size_t num_features() const noexcept { return axes_.size(); }
    double length_scale() const noexcept { return length_scale_; }
    double decay(std::size_t feature) const;
    /// Quantized grid shape: one dimension-2 core per bit, features in order.
    std::vector<std::size_t> grid_dims() const;

private:
    std::vector<LatticeAxis> axes_;
    double length_scale_;
    std::vector<double> decay_override_;
};

/// Toeplitz kernel matrix [a^|i-j|] of one feature as a rank-3 TT operator.
TTMatrix kernel_tt(const LatticeKernelSpec& spec, std::size_t feature);

/// Analytic inverse (1 / (1 - a^2)) tridiag(-a, 1 + a^2, -a) with unit
/// corners, as a TT operator of rank at most 5. Throws SingularError if a >= 1.
TTMatrix kernel_inv_tt(const LatticeKernelSpec& spec, std::size_t feature);

/// Kronecker products of the per-feature factors in feature order.
TTMatrix multi_kernel_tt(const LatticeKernelSpec& spec);
TTMatrix multi_kernel_inv_tt(const LatticeKernelSpec& spec);

/// TT vector of k(x_star, X) over all lattice points, rank at most 3 per feature.
/// Throws DomainError when a coordinate lies outside its axis.
TensorTrain cross_kernel_vector_tt(const LatticeKernelSpec& spec, std::span<const double> x_star);

/// Noise-free posterior mean k(x*, X)^T K^{-1} y computed in TT form.
double stn_gpr_mean(const TensorTrain& y, const LatticeKernelSpec& spec, std::span<const double> x_star);

/// Posterior mean with the weight vector K^{-1} y precomputed once.
class StnGprModel {
public:
    StnGprModel(const TensorTrain& y, LatticeKernelSpec spec, double round_eps = 0.0);

    double predict(std::span<const double> x_star) const;
    const TensorTrain& weights() const noexcept { return weights_; }
    const LatticeKernelSpec& spec() const noexcept { return spec_; }

private:
    LatticeKernelSpec spec_;
    TensorTrain weights_;
};

}  // namespace ttsurrogate
