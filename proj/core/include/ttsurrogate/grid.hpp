#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "ttsurrogate/kernel_tt.hpp"
#include "ttsurrogate/tensor_train.hpp"

namespace ttsurrogate {

struct FeatureAxis {
    std::string name;
    double min = 0.0;
    double max = 1.0;
    unsigned bits = 1;

    std::size_t points() const noexcept { return std::size_t{1} << bits; }
    double spacing() const noexcept { return (max - min) / static_cast<double>(points() - 1); }
    double coordinate(std::size_t i) const noexcept;

    bool operator==(const FeatureAxis&) const = default;
};

/// Uniform per-feature lattices flattened into a quantized grid.
///
/// Each feature with 2^bits points owns `bits` consecutive cores of
/// dimension 2, most significant bit first; features keep their order.
class FeatureGrid {
public:
    explicit FeatureGrid(std::vector<FeatureAxis> axes);

    const std::vector<FeatureAxis>& axes() const noexcept { return axes_; }
    const FeatureAxis& axis(std::size_t f) const { return axes_.at(f); }
    std::size_t num_features() const noexcept { return axes_.size(); }
    std::size_t total_cores() const noexcept { return total_cores_; }
    /// First core of feature f.
    std::size_t core_offset(std::size_t f) const { return offsets_.at(f); }
    std::vector<std::size_t> shape() const { return std::vector<std::size_t>(total_cores_, 2); }
    double num_points() const;
    std::vector<std::string> names() const;

    MultiIndex to_multi_index(std::span<const std::size_t> lattice) const;
    std::vector<std::size_t> to_lattice(std::span<const std::size_t> multi_index) const;
    std::vector<double> point(std::span<const std::size_t> lattice) const;
    std::vector<double> point_of(std::span<const std::size_t> multi_index) const;

    /// Maps each feature affinely onto [0, 1].
    std::vector<double> normalize(std::span<const double> x) const;
    /// Laplacian kernel lattice over normalized coordinates.
    LatticeKernelSpec kernel_spec(double length_scale) const;

    bool operator==(const FeatureGrid& other) const { return axes_ == other.axes_; }

private:
    std::vector<FeatureAxis> axes_;
    std::vector<std::size_t> offsets_;
    std::size_t total_cores_ = 0;
};

void to_json(nlohmann::json& j, const FeatureAxis& a);
void from_json(const nlohmann::json& j, FeatureAxis& a);
void to_json(nlohmann::json& j, const FeatureGrid& g);
FeatureGrid grid_from_json(const nlohmann::json& j);

/// Lattice bracket and fractional offset of a query, per feature.
///
/// bracket[f] = floor((x - min) / spacing), clamped to 2^bits - 2 at the
/// upper edge so that bracket + 1 is always a lattice point; offset[f] lies
/// in [0, 1]. Queries within 1e-9 lattice units of a node snap onto it.
struct GridLocation {
    std::vector<std::size_t> bracket;
    std::vector<double> offset;
};

GridLocation grid_index_map(const FeatureGrid& grid, std::span<const double> x);

}  // namespace ttsurrogate
