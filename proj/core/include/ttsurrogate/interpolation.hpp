#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "ttsurrogate/grid.hpp"
#include "ttsurrogate/tensor_train.hpp"

namespace ttsurrogate {

enum class BridgeKind { linear, sinh };

/// How off-grid values are reconstructed from the lattice.
///
/// `sinh` uses Ornstein-Uhlenbeck bridge weights with length scale L given
/// in normalized feature units (each feature mapped onto [0, 1]); `linear`
/// is the L -> infinity limit.
struct InferenceMode {
    BridgeKind kind = BridgeKind::linear;
    double length_scale = 0.0;

    static InferenceMode linear() { return {}; }
    static InferenceMode sinh(double length_scale);

    std::string to_string() const;
    /// Parses "linear" or "sinh:<L>".
    static InferenceMode parse(const std::string& text);
};

struct BridgeWeights {
    double c0 = 1.0;
    double c1 = 0.0;
};

/// Weights on the bracketing values y(x0), y(x1) for a query x0 <= x <= x1.
///
/// sinh:   (sinh((x1 - x)/L), sinh((x - x0)/L)) / sinh((x1 - x0)/L)
/// linear: ((x1 - x), (x - x0)) / (x1 - x0)
/// The sinh form falls back to the linear one once (x1 - x0)/L drops below
/// 1e-8, where the two agree to double precision.
BridgeWeights bridge_weights(double x0, double x1, double x, double length_scale, BridgeKind kind);

/// Length-2^bits coefficient vector holding c0 at k0 and c1 at k0 + 1.
///
/// Bond ranks are 1 while the binary expansions of k0 and k0 + 1 agree and
/// 2 after they diverge; the weights live in the last core only.
TensorTrain coeff_tt_1d(unsigned bits, std::size_t k0, double c0, double c1);

/// Per-feature bridge weights of a query on the grid.
std::vector<BridgeWeights> query_weights(const FeatureGrid& grid, const GridLocation& loc,
                                         const InferenceMode& mode);

/// Kronecker product over features of the per-feature coefficient trains.
TensorTrain coeff_tt(const FeatureGrid& grid, std::span<const double> x, const InferenceMode& mode);

/// y(x) = <coeff_tt(x), y> evaluated in TT form.
double interp_eval(const TensorTrain& y, const FeatureGrid& grid, std::span<const double> x,
                   const InferenceMode& mode = InferenceMode::linear());

/// Batched off-grid evaluation of a fixed surface.
///
/// For each feature and bracket the products of the y-core slices along
/// the two bracketing bit paths are cached, so a query costs one small
/// matrix-vector product per feature. Safe for concurrent use.
class SurfaceEvaluator {
public:
    SurfaceEvaluator(TensorTrain y, FeatureGrid grid, InferenceMode mode = InferenceMode::linear());

    double operator()(std::span<const double> x) const;
    /// `queries` is row-major, num_features() values per query.
    std::vector<double> evaluate_batch(std::span<const double> queries, std::size_t threads = 1) const;

    const TensorTrain& surface() const noexcept { return y_; }
    const FeatureGrid& grid() const noexcept { return grid_; }
    const InferenceMode& mode() const noexcept { return mode_; }

private:
    struct BracketProducts {
        RowMatrix lower;
        RowMatrix upper;
    };

    BracketProducts path_products(std::size_t feature, std::size_t k0) const;

    TensorTrain y_;
    FeatureGrid grid_;
    InferenceMode mode_;
    // cache_[f][k0]; empty for features too wide to tabulate.
    std::vector<std::vector<BracketProducts>> cache_;
};

}  // namespace ttsurrogate
