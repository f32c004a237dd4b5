#pragma once

#include <cstddef>
#include <limits>
#include <random>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "ttsurrogate/errors.hpp"

namespace ttsurrogate {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MultiIndex = std::vector<std::size_t>;

/// Order-3 TT core of shape (r_left, n, r_right), stored row-major.
///
/// The row-major layout makes both unfoldings free: the left unfolding is
/// the (r_left*n) x r_right matrix over the same buffer and the right
/// unfolding is r_left x (n*r_right).
class Core3 {
public:
    using SliceMap = Eigen::Map<const RowMatrix, 0, Eigen::OuterStride<>>;
    using MutableSliceMap = Eigen::Map<RowMatrix, 0, Eigen::OuterStride<>>;

    Core3() = default;
    Core3(std::size_t r_left, std::size_t n, std::size_t r_right);
    Core3(std::size_t r_left, std::size_t n, std::size_t r_right, std::vector<double> data);

    std::size_t left_rank() const noexcept { return r_left_; }
    std::size_t dim() const noexcept { return n_; }
    std::size_t right_rank() const noexcept { return r_right_; }
    std::size_t size() const noexcept { return data_.size(); }

    double operator()(std::size_t a, std::size_t i, std::size_t b) const {
        return data_[(a * n_ + i) * r_right_ + b];
    }
    double& operator()(std::size_t a, std::size_t i, std::size_t b) {
        return data_[(a * n_ + i) * r_right_ + b];
    }

    std::span<const double> data() const noexcept { return data_; }
    std::span<double> data() noexcept { return data_; }

    /// r_left x r_right matrix selected by physical index i.
    SliceMap slice(std::size_t i) const;
    MutableSliceMap slice(std::size_t i);

    Eigen::Map<const RowMatrix> left_unfolding() const;
    Eigen::Map<const RowMatrix> right_unfolding() const;

    static Core3 from_left_unfolding(const RowMatrix& m, std::size_t r_left, std::size_t n);
    static Core3 from_right_unfolding(const RowMatrix& m, std::size_t n, std::size_t r_right);

private:
    std::size_t r_left_ = 0;
    std::size_t n_ = 0;
    std::size_t r_right_ = 0;
    std::vector<double> data_;
};

/// Order-4 operator core of shape (r_left, m, n, r_right): row index m,
/// column index n.
class Core4 {
public:
    Core4() = default;
    Core4(std::size_t r_left, std::size_t m, std::size_t n, std::size_t r_right);
    Core4(std::size_t r_left, std::size_t m, std::size_t n, std::size_t r_right,
          std::vector<double> data);

    std::size_t left_rank() const noexcept { return r_left_; }
    std::size_t row_dim() const noexcept { return m_; }
    std::size_t col_dim() const noexcept { return n_; }
    std::size_t right_rank() const noexcept { return r_right_; }
    std::size_t size() const noexcept { return data_.size(); }

    double operator()(std::size_t a, std::size_t i, std::size_t j, std::size_t b) const {
        return data_[((a * m_ + i) * n_ + j) * r_right_ + b];
    }
    double& operator()(std::size_t a, std::size_t i, std::size_t j, std::size_t b) {
        return data_[((a * m_ + i) * n_ + j) * r_right_ + b];
    }

    std::span<const double> data() const noexcept { return data_; }
    std::span<double> data() noexcept { return data_; }

private:
    std::size_t r_left_ = 0;
    std::size_t m_ = 0;
    std::size_t n_ = 0;
    std::size_t r_right_ = 0;
    std::vector<double> data_;
};

/// Tensor train vector: a chain of order-3 cores with boundary ranks 1.
///
/// Values are immutable once constructed; every operation below returns a
/// new train. The constructor enforces the rank-chain invariants.
class TensorTrain {
public:
    TensorTrain() = default;
    explicit TensorTrain(std::vector<Core3> cores);

    std::size_t num_cores() const noexcept { return cores_.size(); }
    bool empty() const noexcept { return cores_.empty(); }
    const Core3& core(std::size_t k) const { return cores_.at(k); }
    const std::vector<Core3>& cores() const noexcept { return cores_; }

    std::vector<std::size_t> dims() const;
    /// Bond ranks including both boundaries: size num_cores() + 1.
    std::vector<std::size_t> ranks() const;
    std::size_t max_rank() const;
    /// Number of stored parameters.
    std::size_t storage() const;
    /// Number of entries of the represented tensor (may exceed 2^53).
    double num_entries() const;

    double operator()(std::span<const std::size_t> idx) const;

private:
    std::vector<Core3> cores_;
};

/// Tensor train operator on a product grid.
class TTMatrix {
public:
    TTMatrix() = default;
    explicit TTMatrix(std::vector<Core4> cores);

    std::size_t num_cores() const noexcept { return cores_.size(); }
    const Core4& core(std::size_t k) const { return cores_.at(k); }
    const std::vector<Core4>& cores() const noexcept { return cores_; }

    std::vector<std::size_t> row_dims() const;
    std::vector<std::size_t> col_dims() const;
    std::vector<std::size_t> ranks() const;
    std::size_t max_rank() const;

    double operator()(std::span<const std::size_t> row, std::span<const std::size_t> col) const;

private:
    std::vector<Core4> cores_;
};

inline constexpr std::size_t unlimited_rank = std::numeric_limits<std::size_t>::max();

// Entry readout. Throws BoundsError when idx is out of range.
double eval(const TensorTrain& tt, std::span<const std::size_t> idx);

TensorTrain add(const TensorTrain& a, const TensorTrain& b);
TensorTrain scale(const TensorTrain& a, double w);

/// TT rounding: left-to-right QR orthogonalization followed by a
/// right-to-left truncated SVD with per-bond budget eps/sqrt(d-1) relative
/// to the Frobenius norm. Ranks never grow; `max_rank` caps them further.
TensorTrain round(const TensorTrain& a, double eps, std::size_t max_rank = unlimited_rank);
TTMatrix round(const TTMatrix& a, double eps, std::size_t max_rank = unlimited_rank);

double dot(const TensorTrain& a, const TensorTrain& b);
double norm(const TensorTrain& a);

/// Matrix-vector product; output ranks are products of the input ranks.
TensorTrain apply(const TTMatrix& m, const TensorTrain& v);
TTMatrix matmul(const TTMatrix& a, const TTMatrix& b);

/// Tensor (Kronecker) product: the cores of `a` followed by the cores of `b`.
TensorTrain kron(const TensorTrain& a, const TensorTrain& b);
TTMatrix kron(const TTMatrix& a, const TTMatrix& b);

/// Fuse (m_k, n_k) into one physical index m_k*n_k (row-major), and back.
TensorTrain fuse(const TTMatrix& m);
TTMatrix unfuse(const TensorTrain& t, std::span<const std::size_t> row_dims,
                std::span<const std::size_t> col_dims);

TensorTrain ones(std::span<const std::size_t> dims);
TensorTrain zeros(std::span<const std::size_t> dims);
/// Unit tensor with a single 1 at `idx`.
TensorTrain basis(std::span<const std::size_t> dims, std::span<const std::size_t> idx);
TTMatrix identity(std::span<const std::size_t> dims);

/// Train with i.i.d. standard normal core entries. `interior_ranks` has
/// dims.size() - 1 entries.
TensorTrain random_tt(std::span<const std::size_t> dims,
                      std::span<const std::size_t> interior_ranks, std::mt19937_64& rng);
TTMatrix random_ttm(std::span<const std::size_t> row_dims, std::span<const std::size_t> col_dims,
                    std::span<const std::size_t> interior_ranks, std::mt19937_64& rng);

/// Full contraction, first index slowest. Refuses tensors above 2^26 entries.
std::vector<double> to_dense(const TensorTrain& tt);
RowMatrix to_dense(const TTMatrix& m);

}  // namespace ttsurrogate
