#include "ndsf/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#define lapack_complex_float std::complex<float>
#define lapack_complex_double std::complex<double>
#include <lapacke.h>

#include "ndsf/errors.hpp"

namespace ndsf {

namespace {

std::size_t product(const Shape& shape) {
    return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>{});
}

void check_shape(const Shape& shape) {
    if (shape.empty()) throw DimensionError("tensor shape must have at least one axis");
    for (auto e : shape)
        if (e == 0) throw DimensionError("tensor extents must be positive");
}

std::vector<std::size_t> strides_of(const Shape& shape) {
    std::vector<std::size_t> strides(shape.size(), 1);
    for (std::size_t i = shape.size(); i-- > 1;) strides[i - 1] = strides[i] * shape[i];
    return strides;
}

}  // namespace

DenseTensor::DenseTensor(Shape shape) : shape_(std::move(shape)) {
    check_shape(shape_);
    data_.assign(product(shape_), cplx{0.0, 0.0});
}

DenseTensor::DenseTensor(Shape shape, std::vector<cplx> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
    check_shape(shape_);
    if (data_.size() != product(shape_))
        throw DimensionError("data length " + std::to_string(data_.size()) +
                             " does not match shape product " + std::to_string(product(shape_)));
}

DenseTensor DenseTensor::identity(std::size_t n) {
    DenseTensor t(Shape{n, n});
    for (std::size_t i = 0; i < n; ++i) t.data_[i * n + i] = 1.0;
    return t;
}

DenseTensor DenseTensor::from_matrix(const RowMatrix& m) {
    const auto rows = static_cast<std::size_t>(m.rows());
    const auto cols = static_cast<std::size_t>(m.cols());
    return DenseTensor(Shape{rows, cols}, std::vector<cplx>(m.data(), m.data() + m.size()));
}

std::size_t DenseTensor::offset(std::initializer_list<std::size_t> index) const {
    if (index.size() != shape_.size()) throw DimensionError("index rank does not match tensor rank");
    std::size_t off = 0;
    std::size_t axis = 0;
    for (auto i : index) {
        if (i >= shape_[axis]) throw DimensionError("index out of range");
        off = off * shape_[axis] + i;
        ++axis;
    }
    return off;
}

cplx& DenseTensor::operator()(std::initializer_list<std::size_t> index) { return data_[offset(index)]; }

const cplx& DenseTensor::operator()(std::initializer_list<std::size_t> index) const {
    return data_[offset(index)];
}

DenseTensor DenseTensor::permuted(std::span<const std::size_t> perm) const {
    const std::size_t r = rank();
    if (perm.size() != r) throw ArgumentError("permutation length does not match rank");
    std::vector<bool> seen(r, false);
    for (auto p : perm) {
        if (p >= r || seen[p]) throw ArgumentError("invalid axis permutation");
        seen[p] = true;
    }
    Shape out_shape(r);
    for (std::size_t i = 0; i < r; ++i) out_shape[i] = shape_[perm[i]];
    if (std::is_sorted(perm.begin(), perm.end())) return DenseTensor(out_shape, data_);

    const auto in_strides = strides_of(shape_);
    std::vector<std::size_t> src_strides(r);
    for (std::size_t i = 0; i < r; ++i) src_strides[i] = in_strides[perm[i]];

    std::vector<cplx> out(data_.size());
    std::vector<std::size_t> counter(r, 0);
    std::size_t src = 0;
    for (std::size_t dst = 0; dst < out.size(); ++dst) {
        out[dst] = data_[src];
        for (std::size_t ax = r; ax-- > 0;) {
            if (++counter[ax] < out_shape[ax]) {
                src += src_strides[ax];
                break;
            }
            src -= src_strides[ax] * (out_shape[ax] - 1);
            counter[ax] = 0;
        }
    }
    return DenseTensor(std::move(out_shape), std::move(out));
}

DenseTensor DenseTensor::reshaped(Shape shape) const& { return DenseTensor(std::move(shape), data_); }

DenseTensor DenseTensor::reshaped(Shape shape) && { return DenseTensor(std::move(shape), std::move(data_)); }

DenseTensor DenseTensor::conj() const {
    DenseTensor t = *this;
    for (auto& v : t.data_) v = std::conj(v);
    return t;
}

DenseTensor DenseTensor::adjoint() const {
    if (rank() != 2) throw DimensionError("adjoint requires a rank-2 tensor");
    return permuted({1, 0}).conj();
}

RowMatrix DenseTensor::to_matrix() const {
    if (rank() != 2) throw DimensionError("to_matrix requires a rank-2 tensor");
    return Eigen::Map<const RowMatrix>(data_.data(), static_cast<Eigen::Index>(shape_[0]),
                                       static_cast<Eigen::Index>(shape_[1]));
}

double DenseTensor::norm() const {
    double s = 0.0;
    for (const auto& v : data_) s += std::norm(v);
    return std::sqrt(s);
}

bool DenseTensor::all_finite() const {
    return std::all_of(data_.begin(), data_.end(),
                       [](const cplx& v) { return std::isfinite(v.real()) && std::isfinite(v.imag()); });
}

DenseTensor& DenseTensor::operator*=(cplx s) {
    for (auto& v : data_) v *= s;
    return *this;
}

DenseTensor& DenseTensor::operator+=(const DenseTensor& other) {
    if (other.shape_ != shape_) throw DimensionError("shape mismatch in tensor addition");
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
    return *this;
}

DenseTensor kron(const DenseTensor& a, const DenseTensor& b) {
    if (a.rank() != 2 || b.rank() != 2) throw DimensionError("kron requires rank-2 tensors");
    const auto ar = a.extent(0), ac = a.extent(1), br = b.extent(0), bc = b.extent(1);
    DenseTensor out(Shape{ar * br, ac * bc});
    auto od = out.data();
    auto ad = a.data();
    auto bd = b.data();
    for (std::size_t i = 0; i < ar; ++i)
        for (std::size_t j = 0; j < ac; ++j)
            for (std::size_t k = 0; k < br; ++k)
                for (std::size_t l = 0; l < bc; ++l)
                    od[(i * br + k) * (ac * bc) + j * bc + l] = ad[i * ac + j] * bd[k * bc + l];
    return out;
}

DenseTensor contract(const DenseTensor& a, const DenseTensor& b,
                     std::span<const std::pair<std::size_t, std::size_t>> pairs) {
    std::vector<bool> used_a(a.rank(), false), used_b(b.rank(), false);
    for (auto [ia, ib] : pairs) {
        if (ia >= a.rank() || ib >= b.rank()) throw ArgumentError("contraction axis out of range");
        if (used_a[ia] || used_b[ib]) throw ArgumentError("axis repeated in contraction pairs");
        used_a[ia] = used_b[ib] = true;
        if (a.extent(ia) != b.extent(ib))
            throw DimensionError("contracted extents differ: " + std::to_string(a.extent(ia)) + " vs " +
                                 std::to_string(b.extent(ib)));
    }

    std::vector<std::size_t> perm_a, perm_b;
    Shape out_shape;
    std::size_t free_a = 1, free_b = 1, inner = 1;
    for (std::size_t i = 0; i < a.rank(); ++i)
        if (!used_a[i]) {
            perm_a.push_back(i);
            out_shape.push_back(a.extent(i));
            free_a *= a.extent(i);
        }
    for (auto [ia, ib] : pairs) {
        perm_a.push_back(ia);
        perm_b.push_back(ib);
        inner *= a.extent(ia);
    }
    for (std::size_t i = 0; i < b.rank(); ++i)
        if (!used_b[i]) {
            perm_b.push_back(i);
            out_shape.push_back(b.extent(i));
            free_b *= b.extent(i);
        }
    if (out_shape.empty()) out_shape.push_back(1);

    const DenseTensor pa = a.permuted(perm_a);
    const DenseTensor pb = b.permuted(perm_b);
    Eigen::Map<const RowMatrix> ma(pa.data().data(), static_cast<Eigen::Index>(free_a),
                                   static_cast<Eigen::Index>(inner));
    Eigen::Map<const RowMatrix> mb(pb.data().data(), static_cast<Eigen::Index>(inner),
                                   static_cast<Eigen::Index>(free_b));
    std::vector<cplx> out(free_a * free_b);
    Eigen::Map<RowMatrix>(out.data(), static_cast<Eigen::Index>(free_a), static_cast<Eigen::Index>(free_b))
        .noalias() = ma * mb;
    return DenseTensor(std::move(out_shape), std::move(out));
}

void TruncationSpec::validate() const {
    if (max_bond < 1) throw ArgumentError("max_bond must be at least 1");
    if (!(rel_cutoff >= 0.0 && rel_cutoff < 1.0)) throw ArgumentError("rel_cutoff must lie in [0, 1)");
}

namespace {

// Full thin SVD of a row-major matrix. The row-major buffer is handed to
// LAPACK as the column-major transpose, which swaps the roles of the factors
// but avoids any copy.
void thin_svd(RowMatrix& m, RowMatrix& u, Eigen::VectorXd& s, RowMatrix& vh) {
    const lapack_int rows = static_cast<lapack_int>(m.rows());
    const lapack_int cols = static_cast<lapack_int>(m.cols());
    const lapack_int k = std::min(rows, cols);
    u.resize(rows, k);
    vh.resize(k, cols);
    s.resize(k);
    RowMatrix backup;
    if (rows * cols > 0) backup = m;
    // Column-major view of m is m^T (cols x rows); its SVD is conj(V) S U^T.
    lapack_int info = LAPACKE_zgesdd(LAPACK_COL_MAJOR, 'S', cols, rows, m.data(), cols, s.data(), vh.data(), cols,
                                     u.data(), k);
    if (info > 0) {
        m = backup;
        std::vector<double> superb(static_cast<std::size_t>(k));
        info = LAPACKE_zgesvd(LAPACK_COL_MAJOR, 'S', 'S', cols, rows, m.data(), cols, s.data(), vh.data(), cols,
                              u.data(), k, superb.data());
    }
    if (info != 0) throw NumericError("SVD failed to converge (info = " + std::to_string(info) + ")");
}

}  // namespace

TruncationPlan plan_truncation(std::span<const double> sq, const TruncationSpec& spec, double rank_floor) {
    const std::size_t full = sq.size();
    TruncationPlan plan;
    if (full == 0) return plan;
    const double top = std::max(sq[0], 0.0);
    std::size_t rank = 0;
    while (rank < full && sq[rank] > rank_floor * top) ++rank;

    // tail[i] = sum of weights with index >= i
    std::vector<double> tail(full + 1, 0.0);
    for (std::size_t i = full; i-- > 0;) tail[i] = tail[i + 1] + std::max(sq[i], 0.0);
    const double total = tail[0];

    std::size_t keep = rank;
    if (total > 0.0) {
        std::size_t by_cutoff = 1;
        while (by_cutoff < full && tail[by_cutoff] / total > spec.rel_cutoff) ++by_cutoff;
        keep = std::min(keep, by_cutoff);
    }
    keep = std::clamp<std::size_t>(keep, 1, std::max<std::size_t>(1, std::min(spec.max_bond, full)));
    plan.keep = keep;
    plan.discarded_sq = tail[keep];
    plan.discarded_weight = total > 0.0 ? tail[keep] / total : 0.0;
    return plan;
}

MatrixSvd truncated_svd(RowMatrix m, const TruncationSpec& spec) {
    spec.validate();
    if (!m.allFinite()) throw NumericError("non-finite entry in matrix passed to truncated_svd");

    MatrixSvd out;
    RowMatrix u, vh;
    Eigen::VectorXd s;
    thin_svd(m, u, s, vh);

    const Eigen::VectorXd sq = s.array().square();
    const TruncationPlan plan = plan_truncation(std::span<const double>(sq.data(), sq.size()), spec,
                                                kRankTolerance * kRankTolerance);
    const auto keep = static_cast<Eigen::Index>(plan.keep);
    const double total = sq.sum();

    out.discarded_weight = plan.discarded_weight;
    out.discarded_norm = std::sqrt(plan.discarded_sq);
    out.s = s.head(keep);
    if (total == 0.0) out.s.setZero();
    out.u = u.leftCols(keep);
    out.vh = vh.topRows(keep);
    return out;
}

SvdResult truncated_svd(const DenseTensor& m, const TruncationSpec& spec) {
    if (m.rank() != 2) throw DimensionError("truncated_svd requires a rank-2 tensor");
    if (!m.all_finite()) throw NumericError("non-finite entry in tensor passed to truncated_svd");
    auto svd = truncated_svd(m.to_matrix(), spec);
    SvdResult r;
    r.left_isometry = DenseTensor::from_matrix(svd.u);
    r.right_isometry = DenseTensor::from_matrix(svd.vh);
    r.singular_values.assign(svd.s.data(), svd.s.data() + svd.s.size());
    r.discarded_weight = svd.discarded_weight;
    r.discarded_norm = svd.discarded_norm;
    return r;
}

}  // namespace ndsf
