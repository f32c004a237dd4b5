#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "ttsurrogate/tensor_train.hpp"

namespace ttsurrogate {

// ---------------------------------------------------------------- maxvol

struct MaxvolResult {
    /// rows[j] is the row pivoted for column j.
    std::vector<std::size_t> rows;
    bool converged = true;
    std::size_t iterations = 0;
};

/// Greedy maximum-volume row selection on a tall N x r matrix.
///
/// Starts from the pivots of a partially pivoted LU, then swaps in the row
/// of the largest entry of m * inv(m[rows]) until every entry has modulus
/// at most 1 + tol. Throws SingularError when m is rank deficient.
MaxvolResult maxvol(const RowMatrix& m, double tol = 0.01, std::size_t max_iter = 100);

/// Skeleton approximation A[:, cols] * inv(A[rows, cols]) * A[rows, :].
RowMatrix matrix_cross(const RowMatrix& a, std::span<const std::size_t> rows,
                       std::span<const std::size_t> cols);

// ---------------------------------------------------------------- index sets

/// Nested cross index sets. Bond b sits between core b and core b+1:
/// left[b] holds prefixes (i_0..i_b), right[b] holds suffixes (j_{b+1}..j_{d-1}).
struct IndexSets {
    std::vector<std::vector<MultiIndex>> left;
    std::vector<std::vector<MultiIndex>> right;

    std::size_t num_bonds() const noexcept { return right.size(); }
    /// Current size of each bond (right sets take precedence when both exist).
    std::vector<std::size_t> bond_sizes() const;
    /// Throws DimensionError if tuple lengths or nesting are violated.
    void validate(std::span<const std::size_t> shape) const;
};

/// Random nested right sets, empty left sets. Per-bond size is
/// min(rank, prod of dims left of the bond, prod of dims right of it).
IndexSets init_index_sets(std::span<const std::size_t> shape, std::size_t rank, std::uint64_t seed);
/// Explicit per-bond sizes; each must be feasible on both sides of its bond.
IndexSets init_index_sets(std::span<const std::size_t> shape, std::span<const std::size_t> ranks,
                          std::uint64_t seed);

// ---------------------------------------------------------------- black box

/// Evaluation contract for TT-cross targets.
///
/// eval_batch() counts calls and accumulates wall time spent in evaluate().
/// Implementations must give the same value for the same multi-index every
/// time and tolerate concurrent batches.
class BlackBoxPricer {
public:
    explicit BlackBoxPricer(std::vector<std::size_t> shape);
    virtual ~BlackBoxPricer() = default;

    BlackBoxPricer(const BlackBoxPricer&) = delete;
    BlackBoxPricer& operator=(const BlackBoxPricer&) = delete;

    const std::vector<std::size_t>& shape() const noexcept { return shape_; }
    std::vector<double> eval_batch(std::span<const MultiIndex> batch);

    std::uint64_t eval_count() const noexcept { return count_.load(); }
    double eval_seconds() const noexcept;

protected:
    virtual void evaluate(std::span<const MultiIndex> batch, std::span<double> out) = 0;

private:
    std::vector<std::size_t> shape_;
    std::atomic<std::uint64_t> count_{0};
    std::atomic<std::int64_t> nanos_{0};
};

/// Wraps a plain function of the multi-index; batches are split over
/// `threads` workers.
class FunctionPricer : public BlackBoxPricer {
public:
    using Function = std::function<double(std::span<const std::size_t>)>;

    FunctionPricer(std::vector<std::size_t> shape, Function fn, std::size_t threads = 1);

protected:
    void evaluate(std::span<const MultiIndex> batch, std::span<double> out) override;

private:
    Function fn_;
    std::size_t threads_;
};

/// Black box backed by an existing tensor train.
class TensorTrainPricer : public BlackBoxPricer {
public:
    explicit TensorTrainPricer(TensorTrain tt);

protected:
    void evaluate(std::span<const MultiIndex> batch, std::span<double> out) override;

private:
    TensorTrain tt_;
};

// ---------------------------------------------------------------- TT-cross

struct CrossOptions {
    /// Directional passes; odd passes run left-to-right, even ones back.
    std::size_t sweeps = 2;
    /// Stop early once the validation error changes by less than tol
    /// between consecutive passes (0 disables early stopping).
    double tol = 0.0;
    std::size_t validation_samples = 256;
    std::uint64_t seed = 0;
    double maxvol_tol = 0.01;
    std::size_t maxvol_max_iter = 100;
};

struct CrossReport {
    std::size_t sweeps_run = 0;
    std::vector<std::size_t> ranks;
    /// Distinct superblock evaluations (the effective training-set size).
    std::uint64_t evals_used = 0;
    /// Evaluations spent on the held-out validation sample.
    std::uint64_t validation_evals = 0;
    /// Relative l2 error on the validation sample after the last pass (NaN if disabled).
    double validation_error = 0.0;
    std::vector<double> validation_history;
    std::size_t max_superblock = 0;
    std::size_t peak_stored_entries = 0;
    bool maxvol_converged = true;
    bool valid = true;
    std::string message;
};

void to_json(nlohmann::json& j, const CrossReport& r);
void from_json(const nlohmann::json& j, CrossReport& r);

struct CrossResult {
    TensorTrain tt;
    CrossReport report;
    IndexSets index_sets;
};

/// TT-cross with maxvol pivoting over nested index sets.
///
/// Each forward pass samples the (r_{k-1} n_k) x r_k superblocks, rebuilds
/// the left sets by maxvol on their orthogonal factor and stores the
/// interpolation cores; each backward pass does the same on right sets.
/// Only the previous superblock is cached, so memory stays proportional to
/// the largest superblock.
CrossResult tt_cross(BlackBoxPricer& f, IndexSets init, std::span<const std::size_t> rank_caps,
                     const CrossOptions& options = {});

}  // namespace ttsurrogate
