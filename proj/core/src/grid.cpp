#include "ttsurrogate/grid.hpp"

#include <cmath>

#include <nlohmann/json.hpp>

namespace ttsurrogate {

double FeatureAxis::coordinate(std::size_t i) const noexcept {
    // Pin the last node to max exactly.
    if (i + 1 == points()) return max;
    return min + spacing() * static_cast<double>(i);
}

FeatureGrid::FeatureGrid(std::vector<FeatureAxis> axes) : axes_(std::move(axes)) {
    if (axes_.empty()) throw DimensionError("FeatureGrid: at least one feature is required");
    for (const auto& ax : axes_) {
        if (!(ax.min < ax.max)) {
            throw DomainError("FeatureGrid: feature '" + ax.name + "' needs min < max");
        }
        if (ax.bits == 0 || ax.bits > 30) {
            throw DimensionError("FeatureGrid: feature '" + ax.name + "' needs between 1 and 30 bits");
        }
        offsets_.push_back(total_cores_);
        total_cores_ += ax.bits;
    }
}

double FeatureGrid::num_points() const {
    double n = 1.0;
    for (const auto& ax : axes_) n *= static_cast<double>(ax.points());
    return n;
}

std::vector<std::string> FeatureGrid::names() const {
    std::vector<std::string> out;
    for (const auto& ax : axes_) out.push_back(ax.name);
    return out;
}

MultiIndex FeatureGrid::to_multi_index(std::span<const std::size_t> lattice) const {
    if (lattice.size() != axes_.size()) throw DimensionError("to_multi_index: wrong feature count");
    MultiIndex idx(total_cores_);
    for (std::size_t f = 0; f < axes_.size(); ++f) {
        const unsigned bits = axes_[f].bits;
        if (lattice[f] >= axes_[f].points()) throw BoundsError("to_multi_index: lattice index out of range");
        for (unsigned b = 0; b < bits; ++b) {
            idx[offsets_[f] + b] = (lattice[f] >> (bits - 1 - b)) & 1U;
        }
    }
    return idx;
}

std::vector<std::size_t> FeatureGrid::to_lattice(std::span<const std::size_t> multi_index) const {
    if (multi_index.size() != total_cores_) throw DimensionError("to_lattice: wrong core count");
    std::vector<std::size_t> lattice(axes_.size(), 0);
    for (std::size_t f = 0; f < axes_.size(); ++f) {
        for (unsigned b = 0; b < axes_[f].bits; ++b) {
            const std::size_t bit = multi_index[offsets_[f] + b];
            if (bit > 1) throw BoundsError("to_lattice: multi-index entries must be bits");
            lattice[f] = (lattice[f] << 1) | bit;
        }
    }
    return lattice;
}

std::vector<double> FeatureGrid::point(std::span<const std::size_t> lattice) const {
    if (lattice.size() != axes_.size()) throw DimensionError("point: wrong feature count");
    std::vector<double> x(axes_.size());
    for (std::size_t f = 0; f < axes_.size(); ++f) x[f] = axes_[f].coordinate(lattice[f]);
    return x;
}

std::vector<double> FeatureGrid::point_of(std::span<const std::size_t> multi_index) const {
    return point(to_lattice(multi_index));
}

std::vector<double> FeatureGrid::normalize(std::span<const double> x) const {
    if (x.size() != axes_.size()) throw DimensionError("normalize: wrong feature count");
    std::vector<double> out(x.size());
    for (std::size_t f = 0; f < x.size(); ++f) out[f] = (x[f] - axes_[f].min) / (axes_[f].max - axes_[f].min);
    return out;
}

LatticeKernelSpec FeatureGrid::kernel_spec(double length_scale) const {
    std::vector<LatticeAxis> lattice;
    for (const auto& ax : axes_) {
        lattice.push_back({0.0, 1.0 / static_cast<double>(ax.points() - 1), ax.bits});
    }
    return LatticeKernelSpec(std::move(lattice), length_scale);
}

GridLocation grid_index_map(const FeatureGrid& grid, std::span<const double> x) {
    if (x.size() != grid.num_features()) {
        throw DimensionError("grid_index_map: expected " + std::to_string(grid.num_features()) + " features");
    }
    GridLocation loc;
    loc.bracket.resize(x.size());
    loc.offset.resize(x.size());
    for (std::size_t f = 0; f < x.size(); ++f) {
        const auto& ax = grid.axis(f);
        if (!(x[f] >= ax.min && x[f] <= ax.max)) {
            throw DomainError("feature '" + ax.name + "' value " + std::to_string(x[f]) + " outside [" +
                              std::to_string(ax.min) + ", " + std::to_string(ax.max) + "]");
        }
        const double last = static_cast<double>(ax.points() - 1);
        double t = (x[f] - ax.min) / (ax.max - ax.min) * last;
        const double nearest = std::nearbyint(t);
        if (std::abs(t - nearest) <= 1e-9) t = nearest;
        t = std::clamp(t, 0.0, last);
        const auto k0 = std::min(static_cast<std::size_t>(std::floor(t)), ax.points() - 2);
        loc.bracket[f] = k0;
        loc.offset[f] = t - static_cast<double>(k0);
    }
    return loc;
}

void to_json(nlohmann::json& j, const FeatureAxis& a) {
    j = nlohmann::json{{"name", a.name}, {"min", a.min}, {"max", a.max}, {"points", a.points()}};
}

void from_json(const nlohmann::json& j, FeatureAxis& a) {
    a.name = j.at("name").get<std::string>();
    a.min = j.at("min").get<double>();
    a.max = j.at("max").get<double>();
    const auto points = j.at("points").get<std::uint64_t>();
    if (points < 2 || (points & (points - 1)) != 0) {
        throw DimensionError("feature '" + a.name + "': point count " + std::to_string(points) +
                             " is not a power of two >= 2");
    }
    unsigned bits = 0;
    while ((std::uint64_t{1} << bits) < points) ++bits;
    a.bits = bits;
}

void to_json(nlohmann::json& j, const FeatureGrid& g) { j = nlohmann::json{{"features", g.axes()}}; }

FeatureGrid grid_from_json(const nlohmann::json& j) {
    return FeatureGrid(j.at("features").get<std::vector<FeatureAxis>>());
}

}  // namespace ttsurrogate
