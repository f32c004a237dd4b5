#include "ttsurrogate/cross.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <random>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include <Eigen/LU>
#include <Eigen/QR>
#include <nlohmann/json.hpp>

#include "ttsurrogate/parallel.hpp"

namespace ttsurrogate {

namespace {

struct MultiIndexHash {
    std::size_t operator()(const MultiIndex& idx) const noexcept {
        std::uint64_t h = 0x9e3779b97f4a7c15ULL;
        for (std::size_t v : idx) {
            h ^= v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
        }
        return static_cast<std::size_t>(h);
    }
};

double saturating_product(std::span<const std::size_t> dims) {
    double p = 1.0;
    for (std::size_t n : dims) p *= static_cast<double>(n);
    return p;
}

std::size_t feasible_size(std::span<const std::size_t> shape, std::size_t bond, std::size_t rank) {
    const double lp = saturating_product(shape.subspan(0, bond + 1));
    const double rp = saturating_product(shape.subspan(bond + 1));
    return static_cast<std::size_t>(std::min({static_cast<double>(rank), lp, rp}));
}

// Inverse of the pivot block with one diagonal jitter retry.
Eigen::PartialPivLU<RowMatrix> factor_pivot_block(const RowMatrix& block, std::size_t bond) {
    constexpr double rcond_floor = 1e-14;
    Eigen::PartialPivLU<RowMatrix> lu(block);
    if (lu.rcond() > rcond_floor) return lu;
    const double scale = block.size() > 0 ? block.cwiseAbs().maxCoeff() : 0.0;
    if (!(scale > 0.0)) throw SingularError("zero cross intersection matrix", bond);
    RowMatrix jittered = block;
    jittered.diagonal().array() += 1e-12 * scale;
    lu.compute(jittered);
    if (lu.rcond() > rcond_floor) return lu;
    throw SingularError("singular cross intersection matrix", bond);
}

RowMatrix orthonormal_basis(const RowMatrix& s) {
    Eigen::ColPivHouseholderQR<RowMatrix> qr(s);
    const Eigen::Index m = std::min(s.rows(), s.cols());
    return qr.householderQ() * RowMatrix::Identity(s.rows(), m);
}

}  // namespace

// ---------------------------------------------------------------- maxvol

MaxvolResult maxvol(const RowMatrix& m, double tol, std::size_t max_iter) {
    const auto n = static_cast<std::size_t>(m.rows());
    const auto r = static_cast<std::size_t>(m.cols());
    if (n < r) throw DimensionError("maxvol: matrix has fewer rows than columns");
    MaxvolResult result;
    if (r == 0) return result;

    // Initial pivots from Gaussian elimination with partial row pivoting.
    RowMatrix work = m;
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    const double scale = std::max(m.cwiseAbs().maxCoeff(), std::numeric_limits<double>::min());
    for (std::size_t j = 0; j < r; ++j) {
        std::size_t best = j;
        double best_val = -1.0;
        for (std::size_t i = j; i < n; ++i) {
            const double v = std::abs(work(static_cast<Eigen::Index>(perm[i]), static_cast<Eigen::Index>(j)));
            if (v > best_val) {
                best_val = v;
                best = i;
            }
        }
        if (best_val <= 1e-13 * scale) {
            throw SingularError("maxvol: matrix is rank deficient (column " + std::to_string(j) + ")");
        }
        std::swap(perm[j], perm[best]);
        const auto pj = static_cast<Eigen::Index>(perm[j]);
        const auto je = static_cast<Eigen::Index>(j);
        for (std::size_t i = j + 1; i < n; ++i) {
            const auto pi = static_cast<Eigen::Index>(perm[i]);
            const double factor = work(pi, je) / work(pj, je);
            if (factor != 0.0) work.row(pi).tail(m.cols() - je) -= factor * work.row(pj).tail(m.cols() - je);
        }
    }
    result.rows.assign(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(r));

    RowMatrix sub(static_cast<Eigen::Index>(r), m.cols());
    for (std::size_t j = 0; j < r; ++j) sub.row(static_cast<Eigen::Index>(j)) = m.row(static_cast<Eigen::Index>(result.rows[j]));
    // B = m * inv(sub)  <=>  sub^T B^T = m^T
    RowMatrix b = Eigen::PartialPivLU<RowMatrix>(sub.transpose()).solve(m.transpose()).transpose();

    result.converged = false;
    for (std::size_t it = 0; it < max_iter; ++it) {
        Eigen::Index bi = 0, bj = 0;
        const double peak = b.cwiseAbs().maxCoeff(&bi, &bj);
        if (peak <= 1.0 + tol) {
            result.converged = true;
            break;
        }
        result.rows[static_cast<std::size_t>(bj)] = static_cast<std::size_t>(bi);
        // Sherman-Morrison update of m * inv(sub) after replacing pivot row bj by row bi.
        Eigen::VectorXd col = b.col(bj);
        Eigen::RowVectorXd row = b.row(bi);
        row(bj) -= 1.0;
        b.noalias() -= col * row / b(bi, bj);
        result.iterations = it + 1;
    }
    if (!result.converged) {
        Eigen::Index bi = 0, bj = 0;
        result.converged = b.cwiseAbs().maxCoeff(&bi, &bj) <= 1.0 + tol;
    }
    return result;
}

RowMatrix matrix_cross(const RowMatrix& a, std::span<const std::size_t> rows,
                       std::span<const std::size_t> cols) {
    if (rows.size() != cols.size() || rows.empty()) {
        throw DimensionError("matrix_cross: row and column sets must be nonempty and equal in size");
    }
    const auto r = static_cast<Eigen::Index>(rows.size());
    RowMatrix c(a.rows(), r), hat(r, r), rmat(r, a.cols());
    for (Eigen::Index j = 0; j < r; ++j) {
        const auto cj = static_cast<Eigen::Index>(cols[static_cast<std::size_t>(j)]);
        const auto rj = static_cast<Eigen::Index>(rows[static_cast<std::size_t>(j)]);
        if (cj >= a.cols() || rj >= a.rows()) throw BoundsError("matrix_cross: pivot out of range");
        c.col(j) = a.col(cj);
        rmat.row(j) = a.row(rj);
    }
    for (Eigen::Index i = 0; i < r; ++i)
        for (Eigen::Index j = 0; j < r; ++j) hat(i, j) = c(static_cast<Eigen::Index>(rows[static_cast<std::size_t>(i)]), j);
    const auto lu = factor_pivot_block(hat, SingularError::no_bond);
    return c * lu.solve(rmat);
}

// ---------------------------------------------------------------- index sets

std::vector<std::size_t> IndexSets::bond_sizes() const {
    std::vector<std::size_t> out(std::max(left.size(), right.size()), 0);
    for (std::size_t b = 0; b < out.size(); ++b) {
        if (b < right.size() && !right[b].empty()) {
            out[b] = right[b].size();
        } else if (b < left.size()) {
            out[b] = left[b].size();
        }
    }
    return out;
}

void IndexSets::validate(std::span<const std::size_t> shape) const {
    const std::size_t d = shape.size();
    const std::size_t bonds = d == 0 ? 0 : d - 1;
    if (right.size() != bonds || (!left.empty() && left.size() != bonds)) {
        throw DimensionError("IndexSets: expected " + std::to_string(bonds) + " bonds");
    }
    auto check_tuple = [&](const MultiIndex& t, std::size_t offset, std::size_t len, std::size_t b) {
        if (t.size() != len) {
            throw DimensionError("IndexSets: wrong tuple length at bond " + std::to_string(b));
        }
        for (std::size_t q = 0; q < len; ++q) {
            if (t[q] >= shape[offset + q]) {
                throw DimensionError("IndexSets: index out of range at bond " + std::to_string(b));
            }
        }
    };
    for (std::size_t b = 0; b < bonds; ++b) {
        std::set<MultiIndex> seen;
        for (const auto& t : right[b]) {
            check_tuple(t, b + 1, d - b - 1, b);
            if (!seen.insert(t).second) throw DimensionError("IndexSets: duplicate right tuple");
            if (b + 1 < bonds) {
                const MultiIndex tail(t.begin() + 1, t.end());
                if (std::find(right[b + 1].begin(), right[b + 1].end(), tail) == right[b + 1].end()) {
                    throw DimensionError("IndexSets: right sets not nested at bond " + std::to_string(b));
                }
            }
        }
    }
    for (std::size_t b = 0; b < left.size(); ++b) {
        std::set<MultiIndex> seen;
        for (const auto& t : left[b]) {
            check_tuple(t, 0, b + 1, b);
            if (!seen.insert(t).second) throw DimensionError("IndexSets: duplicate left tuple");
            if (b > 0) {
                const MultiIndex head(t.begin(), t.end() - 1);
                if (std::find(left[b - 1].begin(), left[b - 1].end(), head) == left[b - 1].end()) {
                    throw DimensionError("IndexSets: left sets not nested at bond " + std::to_string(b));
                }
            }
        }
    }
}

IndexSets init_index_sets(std::span<const std::size_t> shape, std::size_t rank, std::uint64_t seed) {
    if (shape.empty()) throw DimensionError("init_index_sets: empty shape");
    if (rank == 0) throw DimensionError("init_index_sets: rank must be at least 1");
    if (static_cast<double>(rank) > saturating_product(shape)) {
        throw DimensionError("init_index_sets: rank exceeds the number of grid points");
    }
    std::vector<std::size_t> ranks(shape.size() - 1);
    for (std::size_t b = 0; b < ranks.size(); ++b) ranks[b] = feasible_size(shape, b, rank);
    return init_index_sets(shape, ranks, seed);
}

IndexSets init_index_sets(std::span<const std::size_t> shape, std::span<const std::size_t> ranks,
                          std::uint64_t seed) {
    if (shape.empty()) throw DimensionError("init_index_sets: empty shape");
    const std::size_t d = shape.size();
    if (ranks.size() + 1 != d) {
        throw DimensionError("init_index_sets: need " + std::to_string(d - 1) + " bond ranks");
    }
    for (std::size_t b = 0; b + 1 < d; ++b) {
        const std::size_t next = b + 2 < d ? ranks[b + 1] : 1;
        if (ranks[b] == 0 || ranks[b] > feasible_size(shape, b, ranks[b]) ||
            ranks[b] > shape[b + 1] * next) {
            throw DimensionError("init_index_sets: rank " + std::to_string(ranks[b]) +
                                 " is infeasible at bond " + std::to_string(b));
        }
    }

    std::mt19937_64 rng(seed);
    IndexSets sets;
    sets.left.assign(d - 1, {});
    sets.right.assign(d - 1, {});
    for (std::size_t b = d - 1; b-- > 0;) {
        const std::vector<MultiIndex> tails = b + 2 < d ? sets.right[b + 1] : std::vector<MultiIndex>{{}};
        const std::size_t candidates = shape[b + 1] * tails.size();
        std::vector<std::size_t> chosen;
        if (candidates <= 4 * ranks[b] + 64) {
            std::vector<std::size_t> all(candidates);
            std::iota(all.begin(), all.end(), std::size_t{0});
            std::shuffle(all.begin(), all.end(), rng);
            chosen.assign(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(ranks[b]));
        } else {
            std::uniform_int_distribution<std::size_t> pick(0, candidates - 1);
            std::unordered_set<std::size_t> seen;
            while (chosen.size() < ranks[b]) {
                const std::size_t c = pick(rng);
                if (seen.insert(c).second) chosen.push_back(c);
            }
        }
        for (std::size_t c : chosen) {
            MultiIndex t;
            t.reserve(d - b - 1);
            t.push_back(c / tails.size());
            const auto& tail = tails[c % tails.size()];
            t.insert(t.end(), tail.begin(), tail.end());
            sets.right[b].push_back(std::move(t));
        }
    }
    return sets;
}

// ---------------------------------------------------------------- pricers

BlackBoxPricer::BlackBoxPricer(std::vector<std::size_t> shape) : shape_(std::move(shape)) {
    if (shape_.empty()) throw DimensionError("BlackBoxPricer: empty shape");
}

std::vector<double> BlackBoxPricer::eval_batch(std::span<const MultiIndex> batch) {
    for (const auto& idx : batch) {
        if (idx.size() != shape_.size()) {
            throw PricerError("multi-index has the wrong number of entries", idx);
        }
        for (std::size_t k = 0; k < idx.size(); ++k) {
            if (idx[k] >= shape_[k]) throw PricerError("multi-index out of range", idx);
        }
    }
    std::vector<double> out(batch.size());
    const auto start = std::chrono::steady_clock::now();
    evaluate(batch, out);
    const auto elapsed = std::chrono::steady_clock::now() - start;
    nanos_ += std::chrono::duration_cast<std::chrono::nanoseconds>(elapsed).count();
    count_ += batch.size();
    return out;
}

double BlackBoxPricer::eval_seconds() const noexcept {
    return static_cast<double>(nanos_.load()) * 1e-9;
}

FunctionPricer::FunctionPricer(std::vector<std::size_t> shape, Function fn, std::size_t threads)
    : BlackBoxPricer(std::move(shape)), fn_(std::move(fn)), threads_(std::max<std::size_t>(1, threads)) {}

void FunctionPricer::evaluate(std::span<const MultiIndex> batch, std::span<double> out) {
    parallel_for(batch.size(), threads_, [&](std::size_t begin, std::size_t end) {
        for (std::size_t q = begin; q < end; ++q) out[q] = fn_(batch[q]);
    });
}

TensorTrainPricer::TensorTrainPricer(TensorTrain tt) : BlackBoxPricer(tt.dims()), tt_(std::move(tt)) {}

void TensorTrainPricer::evaluate(std::span<const MultiIndex> batch, std::span<double> out) {
    for (std::size_t q = 0; q < batch.size(); ++q) out[q] = eval(tt_, batch[q]);
}

// ---------------------------------------------------------------- TT-cross

namespace {

// Samples superblocks, reusing entries of the immediately preceding one.
class SuperblockSampler {
public:
    SuperblockSampler(BlackBoxPricer& f, CrossReport& report) : f_(f), report_(report) {}

    std::vector<double> sample(const std::vector<MultiIndex>& indices) {
        std::unordered_map<MultiIndex, double, MultiIndexHash> current;
        current.reserve(indices.size());
        std::vector<MultiIndex> missing;
        for (const auto& idx : indices) {
            if (current.contains(idx)) continue;
            if (auto it = previous_.find(idx); it != previous_.end()) {
                current.emplace(idx, it->second);
            } else {
                current.emplace(idx, std::numeric_limits<double>::quiet_NaN());
                missing.push_back(idx);
            }
        }
        if (!missing.empty()) {
            const auto values = f_.eval_batch(missing);
            for (std::size_t q = 0; q < missing.size(); ++q) current[missing[q]] = values[q];
            report_.evals_used += missing.size();
        }
        report_.max_superblock = std::max(report_.max_superblock, indices.size());
        report_.peak_stored_entries = std::max(report_.peak_stored_entries, previous_.size() + current.size());

        std::vector<double> out;
        out.reserve(indices.size());
        for (const auto& idx : indices) out.push_back(current.at(idx));
        previous_ = std::move(current);
        return out;
    }

private:
    BlackBoxPricer& f_;
    CrossReport& report_;
    std::unordered_map<MultiIndex, double, MultiIndexHash> previous_;
};

MultiIndex join(const MultiIndex& left, std::size_t i, const MultiIndex& right) {
    MultiIndex idx;
    idx.reserve(left.size() + 1 + right.size());
    idx.insert(idx.end(), left.begin(), left.end());
    idx.push_back(i);
    idx.insert(idx.end(), right.begin(), right.end());
    return idx;
}

const std::vector<MultiIndex> unit_set{MultiIndex{}};

}  // namespace

CrossResult tt_cross(BlackBoxPricer& f, IndexSets init, std::span<const std::size_t> rank_caps,
                     const CrossOptions& options) {
    const std::vector<std::size_t> shape = f.shape();
    const std::size_t d = shape.size();
    if (rank_caps.size() + 1 != d) {
        throw DimensionError("tt_cross: need " + std::to_string(d - 1) + " rank caps");
    }
    init.validate(shape);
    for (std::size_t b = 0; b + 1 < d; ++b) {
        if (init.right[b].empty()) throw DimensionError("tt_cross: empty right set at bond " + std::to_string(b));
        if (init.right[b].size() > rank_caps[b]) {
            throw DimensionError("tt_cross: initial set at bond " + std::to_string(b) + " exceeds its rank cap");
        }
    }
    if (init.left.size() != d - 1) init.left.assign(d - 1, {});

    CrossResult result;
    CrossReport& report = result.report;
    const std::uint64_t count_before = f.eval_count();

    // Held-out validation sample, drawn once per run.
    std::vector<MultiIndex> validation;
    std::vector<double> validation_values;
    double validation_norm = 0.0;
    if (options.validation_samples > 0) {
        std::mt19937_64 rng(options.seed ^ 0x5eed5eed5eed5eedULL);
        validation.resize(options.validation_samples);
        for (auto& idx : validation) {
            idx.resize(d);
            for (std::size_t k = 0; k < d; ++k) {
                idx[k] = std::uniform_int_distribution<std::size_t>(0, shape[k] - 1)(rng);
            }
        }
        validation_values = f.eval_batch(validation);
        report.validation_evals = validation.size();
        for (double v : validation_values) validation_norm += v * v;
        validation_norm = std::sqrt(validation_norm);
    }
    report.validation_error = std::numeric_limits<double>::quiet_NaN();

    SuperblockSampler sampler(f, report);
    IndexSets& sets = result.index_sets;
    sets = std::move(init);
    std::optional<TensorTrain> complete;

    for (std::size_t pass = 0; pass < options.sweeps; ++pass) {
        const bool forward = pass % 2 == 0;
        std::vector<Core3> cores(d);
        try {
            for (std::size_t step = 0; step < d; ++step) {
                const std::size_t k = forward ? step : d - 1 - step;
                const auto& lefts = k == 0 ? unit_set : sets.left[k - 1];
                const auto& rights = k + 1 == d ? unit_set : sets.right[k];
                const std::size_t rl = lefts.size(), n = shape[k], rr = rights.size();

                std::vector<MultiIndex> indices;
                indices.reserve(rl * n * rr);
                for (std::size_t a = 0; a < rl; ++a)
                    for (std::size_t i = 0; i < n; ++i)
                        for (std::size_t b = 0; b < rr; ++b) indices.push_back(join(lefts[a], i, rights[b]));
                const std::vector<double> values = sampler.sample(indices);
                // Row-major (a, i, b): both unfoldings view the same buffer.
                Core3 block(rl, n, rr, values);

                const bool terminal = forward ? k + 1 == d : k == 0;
                if (terminal) {
                    cores[k] = std::move(block);
                    continue;
                }
                const std::size_t bond = forward ? k : k - 1;
                const RowMatrix s = forward ? RowMatrix(block.left_unfolding())
                                            : RowMatrix(block.right_unfolding().transpose());
                const RowMatrix q = orthonormal_basis(s);
                const MaxvolResult mv = [&] {
                    try {
                        return maxvol(q, options.maxvol_tol, options.maxvol_max_iter);
                    } catch (const SingularError& e) {
                        throw SingularError(e.what(), bond);
                    }
                }();
                report.maxvol_converged = report.maxvol_converged && mv.converged;
                RowMatrix hat(q.cols(), q.cols());
                for (Eigen::Index j = 0; j < q.cols(); ++j) hat.row(j) = q.row(static_cast<Eigen::Index>(mv.rows[static_cast<std::size_t>(j)]));
                // interpolation matrix q * inv(hat), via hat^T X^T = q^T
                const auto lu = factor_pivot_block(RowMatrix(hat.transpose()), bond);
                const RowMatrix interp = lu.solve(RowMatrix(q.transpose())).transpose();
                std::vector<MultiIndex> next;
                next.reserve(mv.rows.size());
                if (forward) {
                    for (std::size_t row : mv.rows) next.push_back(join(lefts[row / n], row % n, {}));
                    cores[k] = Core3::from_left_unfolding(interp, rl, n);
                    sets.left[k] = std::move(next);
                } else {
                    for (std::size_t row : mv.rows) next.push_back(join({}, row / rr, rights[row % rr]));
                    cores[k] = Core3::from_right_unfolding(RowMatrix(interp.transpose()), n, rr);
                    sets.right[k - 1] = std::move(next);
                }
            }
        } catch (const SingularError& e) {
            if (!complete) throw;
            report.valid = false;
            report.message = e.what();
            break;
        }
        complete = TensorTrain(std::move(cores));
        report.sweeps_run = pass + 1;

        if (!validation.empty()) {
            double err = 0.0;
            for (std::size_t q = 0; q < validation.size(); ++q) {
                const double diff = eval(*complete, validation[q]) - validation_values[q];
                err += diff * diff;
            }
            err = std::sqrt(err) / (validation_norm > 0.0 ? validation_norm : 1.0);
            report.validation_history.push_back(err);
            report.validation_error = err;
            const auto& h = report.validation_history;
            if (options.tol > 0.0 && h.size() >= 2 && std::abs(h[h.size() - 1] - h[h.size() - 2]) < options.tol) {
                break;
            }
        }
    }

    result.tt = std::move(*complete);
    report.ranks = result.tt.ranks();
    // Every pricer call is either a superblock entry or a validation point.
    if (f.eval_count() - count_before != report.evals_used + report.validation_evals) {
        throw Error("tt_cross: evaluation accounting mismatch");
    }
    return result;
}

// ---------------------------------------------------------------- JSON

void to_json(nlohmann::json& j, const CrossReport& r) {
    j = nlohmann::json{{"sweeps", r.sweeps_run},
                       {"ranks", r.ranks},
                       {"evals", r.evals_used},
                       {"validation_evals", r.validation_evals},
                       {"validation_history", r.validation_history},
                       {"max_superblock", r.max_superblock},
                       {"peak_stored_entries", r.peak_stored_entries},
                       {"maxvol_converged", r.maxvol_converged},
                       {"valid", r.valid},
                       {"message", r.message}};
    if (std::isfinite(r.validation_error)) {
        j["validation_error"] = r.validation_error;
    } else {
        j["validation_error"] = nullptr;
    }
}

void from_json(const nlohmann::json& j, CrossReport& r) {
    r.sweeps_run = j.at("sweeps").get<std::size_t>();
    r.ranks = j.at("ranks").get<std::vector<std::size_t>>();
    r.evals_used = j.at("evals").get<std::uint64_t>();
    r.validation_evals = j.value("validation_evals", std::uint64_t{0});
    r.validation_history = j.value("validation_history", std::vector<double>{});
    r.max_superblock = j.value("max_superblock", std::size_t{0});
    r.peak_stored_entries = j.value("peak_stored_entries", std::size_t{0});
    r.maxvol_converged = j.value("maxvol_converged", true);
    r.valid = j.value("valid", true);
    r.message = j.value("message", std::string{});
    const auto& v = j.at("validation_error");
    r.validation_error = v.is_null() ? std::numeric_limits<double>::quiet_NaN() : v.get<double>();
}

}  // namespace ttsurrogate
