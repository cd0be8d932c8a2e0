#pragma once

#include <complex>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace ndsf {

using cplx = std::complex<double>;
using Shape = std::vector<std::size_t>;
using RowMatrix = Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Dense n-index array of complex amplitudes stored in row-major order.
///
/// The last axis varies fastest. All extents are at least one, so the number
/// of stored amplitudes is always the product of the extents.
class DenseTensor {
public:
    DenseTensor() : DenseTensor(Shape{1}) {}
    explicit DenseTensor(Shape shape);
    DenseTensor(Shape shape, std::vector<cplx> data);

    static DenseTensor identity(std::size_t n);
    static DenseTensor from_matrix(const RowMatrix& m);

    const Shape& shape() const { return shape_; }
    std::size_t rank() const { return shape_.size(); }
    std::size_t size() const { return data_.size(); }
    std::size_t extent(std::size_t axis) const { return shape_.at(axis); }

    std::span<const cplx> data() const { return data_; }
    std::span<cplx> data() { return data_; }

    cplx& operator()(std::initializer_list<std::size_t> index);
    const cplx& operator()(std::initializer_list<std::size_t> index) const;

    DenseTensor permuted(std::span<const std::size_t> perm) const;
    DenseTensor permuted(std::initializer_list<std::size_t> perm) const {
        return permuted(std::span<const std::size_t>(perm.begin(), perm.size()));
    }
    DenseTensor reshaped(Shape shape) const&;
    DenseTensor reshaped(Shape shape) &&;

    DenseTensor conj() const;
    /// Conjugate transpose of a rank-2 tensor.
    DenseTensor adjoint() const;
    RowMatrix to_matrix() const;

    double norm() const;
    bool all_finite() const;

    DenseTensor& operator*=(cplx s);
    DenseTensor& operator+=(const DenseTensor& other);
    friend DenseTensor operator*(cplx s, DenseTensor t) { return t *= s; }
    friend DenseTensor operator+(DenseTensor a, const DenseTensor& b) { return a += b; }

private:
    std::size_t offset(std::initializer_list<std::size_t> index) const;

    Shape shape_;
    std::vector<cplx> data_;
};

/// Kronecker product of two rank-2 tensors.
DenseTensor kron(const DenseTensor& a, const DenseTensor& b);

/// Contract a with b over the listed (axis-of-a, axis-of-b) pairs. The result
/// carries the free axes of a in order, followed by the free axes of b.
DenseTensor contract(const DenseTensor& a, const DenseTensor& b,
                     std::span<const std::pair<std::size_t, std::size_t>> pairs);

inline DenseTensor contract(const DenseTensor& a, const DenseTensor& b,
                            std::initializer_list<std::pair<std::size_t, std::size_t>> pairs) {
    return contract(a, b, std::span(pairs.begin(), pairs.size()));
}

struct TruncationSpec {
    std::size_t max_bond = 1024;
    double rel_cutoff = 0.0;  // relative discarded weight

    void validate() const;
};

struct SvdResult {
    DenseTensor left_isometry;
    std::vector<double> singular_values;
    DenseTensor right_isometry;
    double discarded_weight = 0.0;  // discarded / total squared singular values
    double discarded_norm = 0.0;    // sqrt of the discarded squared singular values
};

/// Matrix-level result used by the evolution kernels; avoids tensor copies.
struct MatrixSvd {
    RowMatrix u;
    Eigen::VectorXd s;
    RowMatrix vh;
    double discarded_weight = 0.0;
    double discarded_norm = 0.0;
};

struct TruncationPlan {
    std::size_t keep = 1;
    double discarded_sq = 0.0;      // sum of dropped weights
    double discarded_weight = 0.0;  // dropped / total
};

/// Kept count for descending squared singular values `sq`: the smallest of
/// the numerical rank (entries above rank_floor * sq[0]), the count meeting
/// spec.rel_cutoff, and spec.max_bond; never less than one.
TruncationPlan plan_truncation(std::span<const double> sq, const TruncationSpec& spec, double rank_floor);

/// Singular values below this fraction of the largest are counted as zero.
inline constexpr double kRankTolerance = 1e-14;

MatrixSvd truncated_svd(RowMatrix m, const TruncationSpec& spec);
SvdResult truncated_svd(const DenseTensor& m, const TruncationSpec& spec);

}  // namespace ndsf
