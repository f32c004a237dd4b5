#include "ttsurrogate/kernel_tt.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <string>

namespace ttsurrogate {

namespace {

using Block2 = std::array<std::array<double, 2>, 2>;

constexpr Block2 eye2{{{1.0, 0.0}, {0.0, 1.0}}};
constexpr Block2 raise2{{{0.0, 1.0}, {0.0, 0.0}}};  // sigma+
constexpr Block2 lower2{{{0.0, 0.0}, {1.0, 0.0}}};  // sigma-
constexpr Block2 zero2{};

Block2 combine(double ci, double cp, double cm) {
    Block2 out{};
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) out[i][j] = ci * eye2[i][j] + cp * raise2[i][j] + cm * lower2[i][j];
    return out;
}

Block2 transpose(const Block2& b) { return {{{b[0][0], b[1][0]}, {b[0][1], b[1][1]}}}; }

Core4 core_from_blocks(const std::vector<std::vector<Block2>>& blocks) {
    const std::size_t rl = blocks.size();
    const std::size_t rr = blocks.front().size();
    Core4 c(rl, 2, 2, rr);
    for (std::size_t a = 0; a < rl; ++a)
        for (std::size_t b = 0; b < rr; ++b)
            for (std::size_t i = 0; i < 2; ++i)
                for (std::size_t j = 0; j < 2; ++j) c(a, i, j, b) = blocks[a][b][i][j];
    return c;
}

// a^(2^m) without overflow of the exponent for large m.
double decay_power(double a, unsigned m) { return std::pow(a, std::ldexp(1.0, static_cast<int>(m))); }

void require_feature(const LatticeKernelSpec& spec, std::size_t feature) {
    if (feature >= spec.num_features()) {
        throw DimensionError("kernel: feature " + std::to_string(feature) + " out of range");
    }
}

}  // namespace

LatticeKernelSpec::LatticeKernelSpec(std::vector<LatticeAxis> axes, double length_scale)
    : axes_(std::move(axes)), length_scale_(length_scale) {
    if (axes_.empty()) throw DimensionError("LatticeKernelSpec: at least one feature is required");
    if (!(length_scale_ > 0.0)) throw DomainError("LatticeKernelSpec: length scale must be positive");
    for (std::size_t f = 0; f < axes_.size(); ++f) {
        if (axes_[f].bits == 0) throw DimensionError("LatticeKernelSpec: feature " + std::to_string(f) + " has no points");
        if (axes_[f].bits > 62) throw DimensionError("LatticeKernelSpec: too many bits");
        if (!(axes_[f].spacing > 0.0)) {
            throw DomainError("LatticeKernelSpec: spacing of feature " + std::to_string(f) + " must be positive");
        }
    }
}

LatticeKernelSpec LatticeKernelSpec::from_decays(std::span<const double> decays,
                                                 std::span<const unsigned> bits) {
    if (decays.size() != bits.size()) throw DimensionError("from_decays: size mismatch");
    std::vector<LatticeAxis> axes;
    for (unsigned b : bits) axes.push_back({0.0, 1.0, b});
    LatticeKernelSpec spec(std::move(axes), 1.0);
    for (double a : decays) {
        if (!(a >= 0.0 && a <= 1.0)) throw DomainError("from_decays: decay must lie in [0, 1]");
    }
    spec.decay_override_.assign(decays.begin(), decays.end());
    return spec;
}

double LatticeKernelSpec::decay(std::size_t feature) const {
    require_feature(*this, feature);
    if (!decay_override_.empty()) return decay_override_[feature];
    if (std::isinf(length_scale_)) return 1.0;
    return std::min(std::exp(-axes_[feature].spacing / length_scale_), max_decay);
}

std::vector<std::size_t> LatticeKernelSpec::grid_dims() const {
    std::size_t total = 0;
    for (const auto& ax : axes_) total += ax.bits;
    return std::vector<std::size_t>(total, 2);
}

TTMatrix kernel_tt(const LatticeKernelSpec& spec, std::size_t feature) {
    require_feature(spec, feature);
    const unsigned n = spec.axes()[feature].bits;
    const double a = spec.decay(feature);

    const Block2 k1{{{1.0, a}, {a, 1.0}}};
    if (n == 1) return TTMatrix({core_from_blocks({{k1}})});

    // M_1 = a * (a I + a^2 sigma+ + sigma-)
    const Block2 m1{{{a * a, a * a * a}, {a, a * a}}};
    std::vector<Core4> cores;
    cores.push_back(core_from_blocks({{eye2, raise2, lower2}}));
    for (unsigned p = 1; p + 1 < n; ++p) {
        const unsigned m = n - p;
        const Block2 up = combine(decay_power(a, m - 1), decay_power(a, m), 1.0);
        cores.push_back(core_from_blocks({{eye2, raise2, lower2},
                                          {zero2, up, zero2},
                                          {zero2, zero2, transpose(up)}}));
    }
    cores.push_back(core_from_blocks({{k1}, {m1}, {transpose(m1)}}));
    return TTMatrix(std::move(cores));
}

TTMatrix kernel_inv_tt(const LatticeKernelSpec& spec, std::size_t feature) {
    require_feature(spec, feature);
    const unsigned n = spec.axes()[feature].bits;
    const double a = spec.decay(feature);
    if (!(a < 1.0)) throw SingularError("kernel_inv_tt: decay a >= 1 makes the kernel singular");

    // Bitwise automaton over (row bit, column bit), most significant first.
    // Z: all bits zero and equal, O: all ones and equal, E: equal otherwise,
    // U: j = i + 1 so far (i: 0 then 1s, j: 1 then 0s), D: i = j + 1.
    enum State : std::size_t { Z, O, E, U, D, count };
    const double pref = 1.0 / (1.0 - a * a);
    const std::array<double, count> final_weight{pref, pref, pref * (1.0 + a * a), -a * pref, -a * pref};

    auto transitions = [](std::size_t from, std::size_t ib, std::size_t jb) -> std::size_t {
        switch (from) {
        case Z:
            if (ib == 0 && jb == 0) return Z;
            if (ib == 1 && jb == 1) return E;
            break;
        case O:
            if (ib == 1 && jb == 1) return O;
            if (ib == 0 && jb == 0) return E;
            break;
        case E:
            if (ib == jb) return E;
            break;
        case U:
            return (ib == 1 && jb == 0) ? U : count;
        case D:
            return (ib == 0 && jb == 1) ? D : count;
        default:
            break;
        }
        return ib < jb ? U : D;
    };
    auto start = [](std::size_t ib, std::size_t jb) -> std::size_t {
        if (ib == jb) return ib == 0 ? Z : O;
        return ib < jb ? U : D;
    };

    std::vector<Core4> cores;
    for (unsigned p = 0; p < n; ++p) {
        const bool first = p == 0;
        const bool last = p + 1 == n;
        const std::size_t rl = first ? std::size_t{1} : std::size_t{count};
        const std::size_t rr = last ? std::size_t{1} : std::size_t{count};
        Core4 c(rl, 2, 2, rr);
        for (std::size_t s = 0; s < rl; ++s)
            for (std::size_t ib = 0; ib < 2; ++ib)
                for (std::size_t jb = 0; jb < 2; ++jb) {
                    const std::size_t to = first ? start(ib, jb) : transitions(s, ib, jb);
                    if (to == count) continue;
                    if (last) {
                        c(s, ib, jb, 0) = final_weight[to];
                    } else {
                        c(s, ib, jb, to) = 1.0;
                    }
                }
        cores.push_back(std::move(c));
    }
    return TTMatrix(std::move(cores));
}

TTMatrix multi_kernel_tt(const LatticeKernelSpec& spec) {
    TTMatrix out = kernel_tt(spec, 0);
    for (std::size_t f = 1; f < spec.num_features(); ++f) out = kron(out, kernel_tt(spec, f));
    return out;
}

TTMatrix multi_kernel_inv_tt(const LatticeKernelSpec& spec) {
    TTMatrix out = kernel_inv_tt(spec, 0);
    for (std::size_t f = 1; f < spec.num_features(); ++f) out = kron(out, kernel_inv_tt(spec, f));
    return out;
}

namespace {

// k(x*, x_i) = a^{|t - i|} for lattice coordinate t, built bit by bit.
// States: E (prefix of i equals prefix of k0), L (i < k0 decided),
// G (i > k0 decided), where k0 = floor(t) is the lower bracket. Exponents
// are split so that every core entry is a power a^e with e >= 0.
std::vector<Core3> cross_kernel_cores(double a, unsigned n, std::size_t k0, double frac) {
    enum State : std::size_t { E, L, G, count };
    const double p = std::pow(a, frac);        // weight of points at or below k0
    const double q = std::pow(a, 1.0 - frac);  // weight of points above k0
    const std::array<double, count> final_weight{p, p, q};

    std::vector<Core3> cores;
    for (unsigned pos = 0; pos < n; ++pos) {
        const unsigned b = n - 1 - pos;
        const double w = std::ldexp(1.0, static_cast<int>(b));
        const std::size_t kb = (k0 >> b) & 1U;
        const double k_low = static_cast<double>(k0 & ((std::size_t{1} << b) - 1));

        // T[from][bit][to]
        std::array<std::array<std::array<double, count>, 2>, count> t{};
        t[E][kb][E] = 1.0;
        if (kb == 1) t[E][0][L] = std::pow(a, k_low + 1.0);
        if (kb == 0) t[E][1][G] = std::pow(a, w - 1.0 - k_low);
        t[L][0][L] = std::pow(a, w);
        t[L][1][L] = 1.0;
        t[G][1][G] = std::pow(a, w);
        t[G][0][G] = 1.0;

        const bool first = pos == 0;
        const bool last = pos + 1 == n;
        const std::size_t rl = first ? std::size_t{1} : std::size_t{count};
        const std::size_t rr = last ? std::size_t{1} : std::size_t{count};
        Core3 c(rl, 2, rr);
        for (std::size_t s = 0; s < rl; ++s) {
            const std::size_t from = first ? E : s;
            for (std::size_t bit = 0; bit < 2; ++bit)
                for (std::size_t to = 0; to < count; ++to) {
                    const double v = t[from][bit][to];
                    if (v == 0.0) continue;
                    if (last) {
                        c(s, bit, 0) += v * final_weight[to];
                    } else {
                        c(s, bit, to) = v;
                    }
                }
        }
        cores.push_back(std::move(c));
    }
    return cores;
}

}  // namespace

TensorTrain cross_kernel_vector_tt(const LatticeKernelSpec& spec, std::span<const double> x_star) {
    if (x_star.size() != spec.num_features()) {
        throw DimensionError("cross_kernel_vector_tt: query has the wrong number of features");
    }
    std::vector<Core3> cores;
    for (std::size_t f = 0; f < spec.num_features(); ++f) {
        const auto& ax = spec.axes()[f];
        const double x = x_star[f];
        if (!(x >= ax.origin && x <= ax.upper())) {
            throw DomainError("cross_kernel_vector_tt: feature " + std::to_string(f) + " value " +
                              std::to_string(x) + " outside [" + std::to_string(ax.origin) + ", " +
                              std::to_string(ax.upper()) + "]");
        }
        const double t = (x - ax.origin) / ax.spacing;
        const std::size_t last_bracket = ax.points() - 2;
        const std::size_t k0 = std::min(static_cast<std::size_t>(std::floor(t)), last_bracket);
        const double frac = std::clamp(t - static_cast<double>(k0), 0.0, 1.0);
        auto part = cross_kernel_cores(spec.decay(f), ax.bits, k0, frac);
        cores.insert(cores.end(), std::make_move_iterator(part.begin()), std::make_move_iterator(part.end()));
    }
    return TensorTrain(std::move(cores));
}

double stn_gpr_mean(const TensorTrain& y, const LatticeKernelSpec& spec, std::span<const double> x_star) {
    if (y.dims() != spec.grid_dims()) {
        throw DimensionError("stn_gpr_mean: training tensor does not match the lattice");
    }
    return dot(cross_kernel_vector_tt(spec, x_star), apply(multi_kernel_inv_tt(spec), y));
}

StnGprModel::StnGprModel(const TensorTrain& y, LatticeKernelSpec spec, double round_eps)
    : spec_(std::move(spec)) {
    if (y.dims() != spec_.grid_dims()) {
        throw DimensionError("StnGprModel: training tensor does not match the lattice");
    }
    weights_ = apply(multi_kernel_inv_tt(spec_), y);
    if (round_eps > 0.0) weights_ = round(weights_, round_eps);
}

double StnGprModel::predict(std::span<const double> x_star) const {
    return dot(cross_kernel_vector_tt(spec_, x_star), weights_);
}

}  // namespace ttsurrogate
