#include "ttsurrogate/tensor_train.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include <Eigen/QR>
#include <Eigen/SVD>

namespace ttsurrogate {

namespace {

constexpr std::size_t max_dense_entries = std::size_t{1} << 26;

std::string shape_string(std::size_t a, std::size_t b, std::size_t c) {
    return "(" + std::to_string(a) + ", " + std::to_string(b) + ", " + std::to_string(c) + ")";
}

void require_same_dims(const std::vector<std::size_t>& a, const std::vector<std::size_t>& b,
                       const char* op) {
    if (a != b) {
        throw DimensionError(std::string(op) + ": physical dimensions differ");
    }
}

}  // namespace

// ---------------------------------------------------------------- Core3

Core3::Core3(std::size_t r_left, std::size_t n, std::size_t r_right)
    : r_left_(r_left), n_(n), r_right_(r_right), data_(r_left * n * r_right, 0.0) {}

Core3::Core3(std::size_t r_left, std::size_t n, std::size_t r_right, std::vector<double> data)
    : r_left_(r_left), n_(n), r_right_(r_right), data_(std::move(data)) {
    if (data_.size() != r_left * n * r_right) {
        throw DimensionError("Core3: buffer of " + std::to_string(data_.size()) +
                             " values does not match shape " + shape_string(r_left, n, r_right));
    }
}

Core3::SliceMap Core3::slice(std::size_t i) const {
    return SliceMap(data_.data() + i * r_right_, static_cast<Eigen::Index>(r_left_),
                    static_cast<Eigen::Index>(r_right_),
                    Eigen::OuterStride<>(static_cast<Eigen::Index>(n_ * r_right_)));
}

Core3::MutableSliceMap Core3::slice(std::size_t i) {
    return MutableSliceMap(data_.data() + i * r_right_, static_cast<Eigen::Index>(r_left_),
                           static_cast<Eigen::Index>(r_right_),
                           Eigen::OuterStride<>(static_cast<Eigen::Index>(n_ * r_right_)));
}

Eigen::Map<const RowMatrix> Core3::left_unfolding() const {
    return {data_.data(), static_cast<Eigen::Index>(r_left_ * n_),
            static_cast<Eigen::Index>(r_right_)};
}

Eigen::Map<const RowMatrix> Core3::right_unfolding() const {
    return {data_.data(), static_cast<Eigen::Index>(r_left_),
            static_cast<Eigen::Index>(n_ * r_right_)};
}

Core3 Core3::from_left_unfolding(const RowMatrix& m, std::size_t r_left, std::size_t n) {
    if (static_cast<std::size_t>(m.rows()) != r_left * n) {
        throw DimensionError("Core3::from_left_unfolding: row count mismatch");
    }
    const auto r_right = static_cast<std::size_t>(m.cols());
    return Core3(r_left, n, r_right, std::vector<double>(m.data(), m.data() + m.size()));
}

Core3 Core3::from_right_unfolding(const RowMatrix& m, std::size_t n, std::size_t r_right) {
    if (static_cast<std::size_t>(m.cols()) != n * r_right) {
        throw DimensionError("Core3::from_right_unfolding: column count mismatch");
    }
    const auto r_left = static_cast<std::size_t>(m.rows());
    return Core3(r_left, n, r_right, std::vector<double>(m.data(), m.data() + m.size()));
}

// ---------------------------------------------------------------- Core4

Core4::Core4(std::size_t r_left, std::size_t m, std::size_t n, std::size_t r_right)
    : r_left_(r_left), m_(m), n_(n), r_right_(r_right), data_(r_left * m * n * r_right, 0.0) {}

Core4::Core4(std::size_t r_left, std::size_t m, std::size_t n, std::size_t r_right,
             std::vector<double> data)
    : r_left_(r_left), m_(m), n_(n), r_right_(r_right), data_(std::move(data)) {
    if (data_.size() != r_left * m * n * r_right) {
        throw DimensionError("Core4: buffer size does not match shape");
    }
}

// ---------------------------------------------------------------- TensorTrain

TensorTrain::TensorTrain(std::vector<Core3> cores) : cores_(std::move(cores)) {
    if (cores_.empty()) {
        throw DimensionError("TensorTrain: at least one core is required");
    }
    if (cores_.front().left_rank() != 1 || cores_.back().right_rank() != 1) {
        throw DimensionError("TensorTrain: boundary ranks must be 1");
    }
    for (std::size_t k = 0; k < cores_.size(); ++k) {
        const auto& c = cores_[k];
        if (c.dim() == 0 || c.left_rank() == 0 || c.right_rank() == 0) {
            throw DimensionError("TensorTrain: core " + std::to_string(k) + " has a zero extent");
        }
        if (k + 1 < cores_.size() && c.right_rank() != cores_[k + 1].left_rank()) {
            throw DimensionError("TensorTrain: rank mismatch at bond " + std::to_string(k));
        }
    }
}

std::vector<std::size_t> TensorTrain::dims() const {
    std::vector<std::size_t> out;
    out.reserve(cores_.size());
    for (const auto& c : cores_) out.push_back(c.dim());
    return out;
}

std::vector<std::size_t> TensorTrain::ranks() const {
    std::vector<std::size_t> out;
    out.reserve(cores_.size() + 1);
    out.push_back(cores_.empty() ? 0 : cores_.front().left_rank());
    for (const auto& c : cores_) out.push_back(c.right_rank());
    return out;
}

std::size_t TensorTrain::max_rank() const {
    const auto r = ranks();
    return r.empty() ? 0 : *std::max_element(r.begin(), r.end());
}

std::size_t TensorTrain::storage() const {
    std::size_t s = 0;
    for (const auto& c : cores_) s += c.size();
    return s;
}

double TensorTrain::num_entries() const {
    double n = 1.0;
    for (const auto& c : cores_) n *= static_cast<double>(c.dim());
    return n;
}

double TensorTrain::operator()(std::span<const std::size_t> idx) const { return eval(*this, idx); }

// ---------------------------------------------------------------- TTMatrix

TTMatrix::TTMatrix(std::vector<Core4> cores) : cores_(std::move(cores)) {
    if (cores_.empty()) {
        throw DimensionError("TTMatrix: at least one core is required");
    }
    if (cores_.front().left_rank() != 1 || cores_.back().right_rank() != 1) {
        throw DimensionError("TTMatrix: boundary ranks must be 1");
    }
    for (std::size_t k = 0; k < cores_.size(); ++k) {
        const auto& c = cores_[k];
        if (c.row_dim() == 0 || c.col_dim() == 0 || c.left_rank() == 0 || c.right_rank() == 0) {
            throw DimensionError("TTMatrix: core " + std::to_string(k) + " has a zero extent");
        }
        if (k + 1 < cores_.size() && c.right_rank() != cores_[k + 1].left_rank()) {
            throw DimensionError("TTMatrix: rank mismatch at bond " + std::to_string(k));
        }
    }
}

std::vector<std::size_t> TTMatrix::row_dims() const {
    std::vector<std::size_t> out;
    for (const auto& c : cores_) out.push_back(c.row_dim());
    return out;
}

std::vector<std::size_t> TTMatrix::col_dims() const {
    std::vector<std::size_t> out;
    for (const auto& c : cores_) out.push_back(c.col_dim());
    return out;
}

std::vector<std::size_t> TTMatrix::ranks() const {
    std::vector<std::size_t> out;
    out.push_back(cores_.empty() ? 0 : cores_.front().left_rank());
    for (const auto& c : cores_) out.push_back(c.right_rank());
    return out;
}

std::size_t TTMatrix::max_rank() const {
    const auto r = ranks();
    return r.empty() ? 0 : *std::max_element(r.begin(), r.end());
}

double TTMatrix::operator()(std::span<const std::size_t> row,
                            std::span<const std::size_t> col) const {
    if (row.size() != cores_.size() || col.size() != cores_.size()) {
        throw BoundsError("TTMatrix: index length does not match core count");
    }
    Eigen::RowVectorXd v = Eigen::RowVectorXd::Ones(1);
    for (std::size_t k = 0; k < cores_.size(); ++k) {
        const auto& c = cores_[k];
        if (row[k] >= c.row_dim() || col[k] >= c.col_dim()) {
            throw BoundsError("TTMatrix: index out of range at core " + std::to_string(k));
        }
        Eigen::RowVectorXd next = Eigen::RowVectorXd::Zero(static_cast<Eigen::Index>(c.right_rank()));
        for (std::size_t a = 0; a < c.left_rank(); ++a) {
            for (std::size_t b = 0; b < c.right_rank(); ++b) {
                next[static_cast<Eigen::Index>(b)] +=
                    v[static_cast<Eigen::Index>(a)] * c(a, row[k], col[k], b);
            }
        }
        v = std::move(next);
    }
    return v[0];
}

// ---------------------------------------------------------------- operations

double eval(const TensorTrain& tt, std::span<const std::size_t> idx) {
    if (idx.size() != tt.num_cores()) {
        throw BoundsError("eval: index has " + std::to_string(idx.size()) + " entries for " +
                          std::to_string(tt.num_cores()) + " cores");
    }
    Eigen::RowVectorXd v = Eigen::RowVectorXd::Ones(1);
    for (std::size_t k = 0; k < tt.num_cores(); ++k) {
        const auto& c = tt.core(k);
        if (idx[k] >= c.dim()) {
            throw BoundsError("eval: index " + std::to_string(idx[k]) + " out of range at core " +
                              std::to_string(k) + " (dim " + std::to_string(c.dim()) + ")");
        }
        v = v * c.slice(idx[k]);
    }
    return v[0];
}

TensorTrain add(const TensorTrain& a, const TensorTrain& b) {
    require_same_dims(a.dims(), b.dims(), "add");
    const std::size_t d = a.num_cores();
    std::vector<Core3> out;
    out.reserve(d);
    for (std::size_t k = 0; k < d; ++k) {
        const auto& ca = a.core(k);
        const auto& cb = b.core(k);
        const std::size_t n = ca.dim();
        const std::size_t rl = (k == 0) ? 1 : ca.left_rank() + cb.left_rank();
        const std::size_t rr = (k + 1 == d) ? 1 : ca.right_rank() + cb.right_rank();
        Core3 c(rl, n, rr);
        // Block-diagonal interior cores; first core is a row block, last a column block.
        const std::size_t a_row = 0;
        const std::size_t b_row = (k == 0) ? 0 : ca.left_rank();
        const std::size_t a_col = 0;
        const std::size_t b_col = (k + 1 == d) ? 0 : ca.right_rank();
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t x = 0; x < ca.left_rank(); ++x)
                for (std::size_t y = 0; y < ca.right_rank(); ++y) c(a_row + x, i, a_col + y) += ca(x, i, y);
            for (std::size_t x = 0; x < cb.left_rank(); ++x)
                for (std::size_t y = 0; y < cb.right_rank(); ++y) c(b_row + x, i, b_col + y) += cb(x, i, y);
        }
        out.push_back(std::move(c));
    }
    return TensorTrain(std::move(out));
}

TensorTrain scale(const TensorTrain& a, double w) {
    std::vector<Core3> out = a.cores();
    // Scale the smallest core; any single core carries the factor.
    auto it = std::min_element(out.begin(), out.end(),
                               [](const Core3& x, const Core3& y) { return x.size() < y.size(); });
    for (double& v : it->data()) v *= w;
    return TensorTrain(std::move(out));
}

namespace {

std::vector<Core3> left_orthogonalize(std::vector<Core3> cores) {
    for (std::size_t k = 0; k + 1 < cores.size(); ++k) {
        const auto& c = cores[k];
        const RowMatrix a = c.left_unfolding();
        Eigen::HouseholderQR<RowMatrix> qr(a);
        const Eigen::Index m = std::min(a.rows(), a.cols());
        RowMatrix q = qr.householderQ() * RowMatrix::Identity(a.rows(), m);
        RowMatrix r = qr.matrixQR().topRows(m).triangularView<Eigen::Upper>();
        const std::size_t rl = c.left_rank();
        const std::size_t n = c.dim();
        cores[k] = Core3::from_left_unfolding(q, rl, n);
        const RowMatrix next = r * cores[k + 1].right_unfolding();
        cores[k + 1] = Core3::from_right_unfolding(next, cores[k + 1].dim(), cores[k + 1].right_rank());
    }
    return cores;
}

}  // namespace

TensorTrain round(const TensorTrain& a, double eps, std::size_t max_rank) {
    if (eps < 0.0) throw DomainError("round: eps must be nonnegative");
    const std::size_t d = a.num_cores();
    std::vector<Core3> cores = left_orthogonalize(a.cores());
    if (d == 1) return TensorTrain(std::move(cores));

    const double total = cores.back().left_unfolding().norm();
    const double delta = eps / std::sqrt(static_cast<double>(d - 1)) * total;

    for (std::size_t k = d - 1; k >= 1; --k) {
        const RowMatrix b = cores[k].right_unfolding();
        Eigen::BDCSVD<RowMatrix> svd(b, Eigen::ComputeThinU | Eigen::ComputeThinV);
        const auto& s = svd.singularValues();
        const auto count = static_cast<std::size_t>(s.size());
        // Smallest t whose discarded tail stays within the per-bond budget.
        std::size_t t = count;
        double tail = 0.0;
        while (t > 1) {
            const double next = tail + s[static_cast<Eigen::Index>(t - 1)] * s[static_cast<Eigen::Index>(t - 1)];
            if (std::sqrt(next) > delta) break;
            tail = next;
            --t;
        }
        t = std::min(t, std::max<std::size_t>(max_rank, 1));
        const auto te = static_cast<Eigen::Index>(t);
        const RowMatrix vt = svd.matrixV().leftCols(te).transpose();
        cores[k] = Core3::from_right_unfolding(vt, cores[k].dim(), cores[k].right_rank());
        const RowMatrix us = svd.matrixU().leftCols(te) * s.head(te).asDiagonal();
        const RowMatrix prev = cores[k - 1].left_unfolding() * us;
        cores[k - 1] = Core3::from_left_unfolding(prev, cores[k - 1].left_rank(), cores[k - 1].dim());
    }
    return TensorTrain(std::move(cores));
}

TTMatrix round(const TTMatrix& a, double eps, std::size_t max_rank) {
    return unfuse(round(fuse(a), eps, max_rank), a.row_dims(), a.col_dims());
}

double dot(const TensorTrain& a, const TensorTrain& b) {
    require_same_dims(a.dims(), b.dims(), "dot");
    RowMatrix m = RowMatrix::Ones(1, 1);
    for (std::size_t k = 0; k < a.num_cores(); ++k) {
        const auto& ca = a.core(k);
        const auto& cb = b.core(k);
        RowMatrix next = RowMatrix::Zero(static_cast<Eigen::Index>(ca.right_rank()),
                                         static_cast<Eigen::Index>(cb.right_rank()));
        for (std::size_t i = 0; i < ca.dim(); ++i) {
            next.noalias() += ca.slice(i).transpose() * m * cb.slice(i);
        }
        m = std::move(next);
    }
    return m(0, 0);
}

double norm(const TensorTrain& a) {
    // Orthogonalize first: dot(a, a) loses relative accuracy for small norms.
    const auto cores = left_orthogonalize(a.cores());
    return cores.back().left_unfolding().norm();
}

TensorTrain apply(const TTMatrix& m, const TensorTrain& v) {
    if (m.col_dims() != v.dims()) {
        throw DimensionError("apply: operator column dimensions differ from vector dimensions");
    }
    std::vector<Core3> out;
    out.reserve(v.num_cores());
    for (std::size_t k = 0; k < v.num_cores(); ++k) {
        const auto& cm = m.core(k);
        const auto& cv = v.core(k);
        const std::size_t rml = cm.left_rank(), rmr = cm.right_rank();
        const std::size_t rvl = cv.left_rank(), rvr = cv.right_rank();
        Core3 c(rml * rvl, cm.row_dim(), rmr * rvr);
        for (std::size_t am = 0; am < rml; ++am)
            for (std::size_t i = 0; i < cm.row_dim(); ++i)
                for (std::size_t j = 0; j < cm.col_dim(); ++j)
                    for (std::size_t bm = 0; bm < rmr; ++bm) {
                        const double w = cm(am, i, j, bm);
                        if (w == 0.0) continue;
                        for (std::size_t av = 0; av < rvl; ++av)
                            for (std::size_t bv = 0; bv < rvr; ++bv)
                                c(am * rvl + av, i, bm * rvr + bv) += w * cv(av, j, bv);
                    }
        out.push_back(std::move(c));
    }
    return TensorTrain(std::move(out));
}

TTMatrix matmul(const TTMatrix& a, const TTMatrix& b) {
    if (a.col_dims() != b.row_dims()) {
        throw DimensionError("matmul: inner dimensions differ");
    }
    std::vector<Core4> out;
    out.reserve(a.num_cores());
    for (std::size_t k = 0; k < a.num_cores(); ++k) {
        const auto& ca = a.core(k);
        const auto& cb = b.core(k);
        const std::size_t ral = ca.left_rank(), rar = ca.right_rank();
        const std::size_t rbl = cb.left_rank(), rbr = cb.right_rank();
        Core4 c(ral * rbl, ca.row_dim(), cb.col_dim(), rar * rbr);
        for (std::size_t xa = 0; xa < ral; ++xa)
            for (std::size_t i = 0; i < ca.row_dim(); ++i)
                for (std::size_t j = 0; j < ca.col_dim(); ++j)
                    for (std::size_t ya = 0; ya < rar; ++ya) {
                        const double w = ca(xa, i, j, ya);
                        if (w == 0.0) continue;
                        for (std::size_t xb = 0; xb < rbl; ++xb)
                            for (std::size_t l = 0; l < cb.col_dim(); ++l)
                                for (std::size_t yb = 0; yb < rbr; ++yb)
                                    c(xa * rbl + xb, i, l, ya * rbr + yb) += w * cb(xb, j, l, yb);
                    }
        out.push_back(std::move(c));
    }
    return TTMatrix(std::move(out));
}

TensorTrain kron(const TensorTrain& a, const TensorTrain& b) {
    std::vector<Core3> cores = a.cores();
    cores.insert(cores.end(), b.cores().begin(), b.cores().end());
    return TensorTrain(std::move(cores));
}

TTMatrix kron(const TTMatrix& a, const TTMatrix& b) {
    std::vector<Core4> cores = a.cores();
    cores.insert(cores.end(), b.cores().begin(), b.cores().end());
    return TTMatrix(std::move(cores));
}

TensorTrain fuse(const TTMatrix& m) {
    std::vector<Core3> out;
    out.reserve(m.num_cores());
    for (const auto& c : m.cores()) {
        // (a, i, j, b) row-major is exactly (a, i*n + j, b) row-major.
        out.emplace_back(c.left_rank(), c.row_dim() * c.col_dim(), c.right_rank(),
                         std::vector<double>(c.data().begin(), c.data().end()));
    }
    return TensorTrain(std::move(out));
}

TTMatrix unfuse(const TensorTrain& t, std::span<const std::size_t> row_dims,
                std::span<const std::size_t> col_dims) {
    if (row_dims.size() != t.num_cores() || col_dims.size() != t.num_cores()) {
        throw DimensionError("unfuse: dimension lists do not match core count");
    }
    std::vector<Core4> out;
    out.reserve(t.num_cores());
    for (std::size_t k = 0; k < t.num_cores(); ++k) {
        const auto& c = t.core(k);
        if (row_dims[k] * col_dims[k] != c.dim()) {
            throw DimensionError("unfuse: core " + std::to_string(k) + " has dimension " +
                                 std::to_string(c.dim()) + ", not m*n");
        }
        out.emplace_back(c.left_rank(), row_dims[k], col_dims[k], c.right_rank(),
                         std::vector<double>(c.data().begin(), c.data().end()));
    }
    return TTMatrix(std::move(out));
}

TensorTrain ones(std::span<const std::size_t> dims) {
    std::vector<Core3> cores;
    for (std::size_t n : dims) cores.emplace_back(1, n, 1, std::vector<double>(n, 1.0));
    return TensorTrain(std::move(cores));
}

TensorTrain zeros(std::span<const std::size_t> dims) {
    std::vector<Core3> cores;
    for (std::size_t n : dims) cores.emplace_back(1, n, 1);
    return TensorTrain(std::move(cores));
}

TensorTrain basis(std::span<const std::size_t> dims, std::span<const std::size_t> idx) {
    if (dims.size() != idx.size()) throw DimensionError("basis: index length mismatch");
    std::vector<Core3> cores;
    for (std::size_t k = 0; k < dims.size(); ++k) {
        if (idx[k] >= dims[k]) throw BoundsError("basis: index out of range");
        Core3 c(1, dims[k], 1);
        c(0, idx[k], 0) = 1.0;
        cores.push_back(std::move(c));
    }
    return TensorTrain(std::move(cores));
}

TTMatrix identity(std::span<const std::size_t> dims) {
    std::vector<Core4> cores;
    for (std::size_t n : dims) {
        Core4 c(1, n, n, 1);
        for (std::size_t i = 0; i < n; ++i) c(0, i, i, 0) = 1.0;
        cores.push_back(std::move(c));
    }
    return TTMatrix(std::move(cores));
}

TensorTrain random_tt(std::span<const std::size_t> dims,
                      std::span<const std::size_t> interior_ranks, std::mt19937_64& rng) {
    if (dims.empty() || interior_ranks.size() + 1 != dims.size()) {
        throw DimensionError("random_tt: need dims.size() - 1 interior ranks");
    }
    std::normal_distribution<double> normal;
    std::vector<Core3> cores;
    for (std::size_t k = 0; k < dims.size(); ++k) {
        const std::size_t rl = k == 0 ? 1 : interior_ranks[k - 1];
        const std::size_t rr = k + 1 == dims.size() ? 1 : interior_ranks[k];
        Core3 c(rl, dims[k], rr);
        for (double& v : c.data()) v = normal(rng);
        cores.push_back(std::move(c));
    }
    return TensorTrain(std::move(cores));
}

TTMatrix random_ttm(std::span<const std::size_t> row_dims, std::span<const std::size_t> col_dims,
                    std::span<const std::size_t> interior_ranks, std::mt19937_64& rng) {
    if (row_dims.size() != col_dims.size()) throw DimensionError("random_ttm: dims mismatch");
    std::vector<std::size_t> fused(row_dims.size());
    for (std::size_t k = 0; k < fused.size(); ++k) fused[k] = row_dims[k] * col_dims[k];
    return unfuse(random_tt(fused, interior_ranks, rng), row_dims, col_dims);
}

std::vector<double> to_dense(const TensorTrain& tt) {
    if (tt.num_entries() > static_cast<double>(max_dense_entries)) {
        throw DimensionError("to_dense: tensor too large to materialize");
    }
    // rows: flattened prefix index, cols: current right rank
    RowMatrix acc = RowMatrix::Ones(1, 1);
    for (const auto& c : tt.cores()) {
        RowMatrix next(acc.rows() * static_cast<Eigen::Index>(c.dim()),
                       static_cast<Eigen::Index>(c.right_rank()));
        for (Eigen::Index p = 0; p < acc.rows(); ++p) {
            for (std::size_t i = 0; i < c.dim(); ++i) {
                next.row(p * static_cast<Eigen::Index>(c.dim()) + static_cast<Eigen::Index>(i)) =
                    acc.row(p) * c.slice(i);
            }
        }
        acc = std::move(next);
    }
    return std::vector<double>(acc.data(), acc.data() + acc.size());
}

RowMatrix to_dense(const TTMatrix& m) {
    const auto rows = m.row_dims();
    const auto cols = m.col_dims();
    double total = 1.0;
    for (std::size_t k = 0; k < rows.size(); ++k) total *= static_cast<double>(rows[k] * cols[k]);
    if (total > static_cast<double>(max_dense_entries)) {
        throw DimensionError("to_dense: operator too large to materialize");
    }
    const std::vector<double> flat = to_dense(fuse(m));
    // flat index interleaves (i_1 j_1 i_2 j_2 ...); regroup into (i_1 i_2 ...) x (j_1 j_2 ...).
    std::size_t nrows = 1, ncols = 1;
    for (std::size_t k = 0; k < rows.size(); ++k) {
        nrows *= rows[k];
        ncols *= cols[k];
    }
    RowMatrix out(static_cast<Eigen::Index>(nrows), static_cast<Eigen::Index>(ncols));
    const std::size_t d = rows.size();
    std::vector<std::size_t> ri(d, 0), ci(d, 0);
    for (std::size_t flat_idx = 0; flat_idx < flat.size(); ++flat_idx) {
        std::size_t rem = flat_idx;
        for (std::size_t k = d; k-- > 0;) {
            const std::size_t f = rem % (rows[k] * cols[k]);
            rem /= rows[k] * cols[k];
            ri[k] = f / cols[k];
            ci[k] = f % cols[k];
        }
        std::size_t r = 0, col = 0;
        for (std::size_t k = 0; k < d; ++k) {
            r = r * rows[k] + ri[k];
            col = col * cols[k] + ci[k];
        }
        out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(col)) = flat[flat_idx];
    }
    return out;
}

}  // namespace ttsurrogate
