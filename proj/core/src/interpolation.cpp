#include "ttsurrogate/interpolation.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "ttsurrogate/parallel.hpp"

namespace ttsurrogate {

namespace {

// sinh(a) / sinh(b) for 0 <= a <= b, without overflow for large arguments.
double sinh_ratio(double a, double b) {
    if (b < 20.0) return std::sinh(a) / std::sinh(b);
    return std::exp(a - b) * std::expm1(-2.0 * a) / std::expm1(-2.0 * b);
}

unsigned bit_at(std::size_t k, unsigned bits, unsigned pos) {
    return static_cast<unsigned>((k >> (bits - 1 - pos)) & 1U);
}

// Widest feature whose bracket products are tabulated up front.
constexpr std::size_t max_cached_points = 4096;

}  // namespace

InferenceMode InferenceMode::sinh(double length_scale) {
    if (!(length_scale > 0.0)) throw DomainError("sinh inference needs a positive length scale");
    return {BridgeKind::sinh, length_scale};
}

std::string InferenceMode::to_string() const {
    if (kind == BridgeKind::linear) return "linear";
    std::ostringstream os;
    os.precision(17);
    os << "sinh:" << length_scale;
    return os.str();
}

InferenceMode InferenceMode::parse(const std::string& text) {
    if (text == "linear") return linear();
    if (text.rfind("sinh:", 0) == 0) {
        try {
            return sinh(std::stod(text.substr(5)));
        } catch (const std::logic_error&) {
            // fall through to the diagnostic below
        }
    }
    throw DomainError("unknown inference mode '" + text + "' (expected linear or sinh:<L>)");
}

BridgeWeights bridge_weights(double x0, double x1, double x, double length_scale, BridgeKind kind) {
    if (!(x0 < x1)) throw DomainError("bridge_weights: degenerate interval");
    if (!(x >= x0 && x <= x1)) throw DomainError("bridge_weights: query outside [x0, x1]");
    const double width = x1 - x0;
    if (kind == BridgeKind::sinh) {
        if (!(length_scale > 0.0)) throw DomainError("bridge_weights: length scale must be positive");
        if (width / length_scale >= 1e-8) {
            const double b = width / length_scale;
            return {sinh_ratio((x1 - x) / length_scale, b), sinh_ratio((x - x0) / length_scale, b)};
        }
    }
    return {(x1 - x) / width, (x - x0) / width};
}

TensorTrain coeff_tt_1d(unsigned bits, std::size_t k0, double c0, double c1) {
    if (bits == 0) throw DimensionError("coeff_tt_1d: at least one bit is required");
    if (bits >= 64 || k0 + 1 >= (std::size_t{1} << bits)) {
        throw BoundsError("coeff_tt_1d: bracket " + std::to_string(k0) + " out of range");
    }
    const std::size_t k1 = k0 + 1;
    unsigned split = 0;
    while (bit_at(k0, bits, split) == bit_at(k1, bits, split)) ++split;

    std::vector<Core3> cores;
    cores.reserve(bits);
    for (unsigned p = 0; p < bits; ++p) {
        const unsigned b0 = bit_at(k0, bits, p);
        const unsigned b1 = bit_at(k1, bits, p);
        const bool last = p + 1 == bits;
        if (p < split) {
            Core3 c(1, 2, 1);
            c(0, b0, 0) = 1.0;
            cores.push_back(std::move(c));
        } else if (p == split && last) {
            Core3 c(1, 2, 1);
            c(0, b0, 0) = c0;
            c(0, b1, 0) = c1;
            cores.push_back(std::move(c));
        } else if (p == split) {
            Core3 c(1, 2, 2);
            c(0, b0, 0) = 1.0;
            c(0, b1, 1) = 1.0;
            cores.push_back(std::move(c));
        } else if (last) {
            Core3 c(2, 2, 1);
            c(0, b0, 0) = c0;
            c(1, b1, 0) = c1;
            cores.push_back(std::move(c));
        } else {
            Core3 c(2, 2, 2);
            c(0, b0, 0) = 1.0;
            c(1, b1, 1) = 1.0;
            cores.push_back(std::move(c));
        }
    }
    return TensorTrain(std::move(cores));
}

std::vector<BridgeWeights> query_weights(const FeatureGrid& grid, const GridLocation& loc,
                                         const InferenceMode& mode) {
    std::vector<BridgeWeights> w(grid.num_features());
    for (std::size_t f = 0; f < w.size(); ++f) {
        const double h = 1.0 / static_cast<double>(grid.axis(f).points() - 1);
        const double t = loc.offset[f];
        if (mode.kind == BridgeKind::linear) {
            w[f] = {1.0 - t, t};
        } else {
            w[f] = bridge_weights(0.0, h, std::min(t * h, h), mode.length_scale, BridgeKind::sinh);
        }
    }
    return w;
}

TensorTrain coeff_tt(const FeatureGrid& grid, std::span<const double> x, const InferenceMode& mode) {
    const GridLocation loc = grid_index_map(grid, x);
    const auto w = query_weights(grid, loc, mode);
    TensorTrain out = coeff_tt_1d(grid.axis(0).bits, loc.bracket[0], w[0].c0, w[0].c1);
    for (std::size_t f = 1; f < grid.num_features(); ++f) {
        out = kron(out, coeff_tt_1d(grid.axis(f).bits, loc.bracket[f], w[f].c0, w[f].c1));
    }
    return out;
}

double interp_eval(const TensorTrain& y, const FeatureGrid& grid, std::span<const double> x,
                   const InferenceMode& mode) {
    if (y.num_cores() != grid.total_cores()) {
        throw DimensionError("interp_eval: surface has " + std::to_string(y.num_cores()) + " cores, grid needs " +
                             std::to_string(grid.total_cores()));
    }
    return dot(coeff_tt(grid, x, mode), y);
}

SurfaceEvaluator::SurfaceEvaluator(TensorTrain y, FeatureGrid grid, InferenceMode mode)
    : y_(std::move(y)), grid_(std::move(grid)), mode_(mode) {
    if (y_.num_cores() != grid_.total_cores()) {
        throw DimensionError("SurfaceEvaluator: surface has " + std::to_string(y_.num_cores()) +
                             " cores, grid needs " + std::to_string(grid_.total_cores()));
    }
    for (std::size_t d : y_.dims()) {
        if (d != 2) throw DimensionError("SurfaceEvaluator: surface must be quantized (all dims 2)");
    }
    cache_.resize(grid_.num_features());
    for (std::size_t f = 0; f < grid_.num_features(); ++f) {
        const std::size_t points = grid_.axis(f).points();
        if (points > max_cached_points) continue;
        cache_[f].reserve(points - 1);
        for (std::size_t k0 = 0; k0 + 1 < points; ++k0) cache_[f].push_back(path_products(f, k0));
    }
}

SurfaceEvaluator::BracketProducts SurfaceEvaluator::path_products(std::size_t f, std::size_t k0) const {
    const unsigned bits = grid_.axis(f).bits;
    const std::size_t offset = grid_.core_offset(f);
    const std::size_t k1 = k0 + 1;
    const std::size_t rl = y_.core(offset).left_rank();
    RowMatrix shared = RowMatrix::Identity(static_cast<Eigen::Index>(rl), static_cast<Eigen::Index>(rl));
    unsigned p = 0;
    for (; p < bits && bit_at(k0, bits, p) == bit_at(k1, bits, p); ++p) {
        shared = shared * y_.core(offset + p).slice(bit_at(k0, bits, p));
    }
    BracketProducts out{shared, shared};
    for (; p < bits; ++p) {
        out.lower = out.lower * y_.core(offset + p).slice(bit_at(k0, bits, p));
        out.upper = out.upper * y_.core(offset + p).slice(bit_at(k1, bits, p));
    }
    return out;
}

double SurfaceEvaluator::operator()(std::span<const double> x) const {
    const GridLocation loc = grid_index_map(grid_, x);
    const auto w = query_weights(grid_, loc, mode_);
    Eigen::RowVectorXd state = Eigen::RowVectorXd::Ones(1);
    for (std::size_t f = 0; f < grid_.num_features(); ++f) {
        const std::size_t k0 = loc.bracket[f];
        const BracketProducts fresh = cache_[f].empty() ? path_products(f, k0) : BracketProducts{};
        const BracketProducts& bp = cache_[f].empty() ? fresh : cache_[f][k0];
        Eigen::RowVectorXd next = w[f].c0 * (state * bp.lower);
        if (w[f].c1 != 0.0) next.noalias() += w[f].c1 * (state * bp.upper);
        state = std::move(next);
    }
    return state(0);
}

std::vector<double> SurfaceEvaluator::evaluate_batch(std::span<const double> queries, std::size_t threads) const {
    const std::size_t nf = grid_.num_features();
    if (queries.size() % nf != 0) {
        throw DimensionError("evaluate_batch: query buffer is not a multiple of the feature count");
    }
    const std::size_t count = queries.size() / nf;
    std::vector<double> out(count);
    parallel_for(count, threads, [&](std::size_t begin, std::size_t end) {
        for (std::size_t q = begin; q < end; ++q) out[q] = (*this)(queries.subspan(q * nf, nf));
    });
    return out;
}

}  // namespace ttsurrogate
