#pragma once

#include <complex>
#include <random>

#include <Eigen/Dense>

#include "ndsf/tensor.hpp"

namespace testutil {

using ndsf::cplx;

inline std::mt19937_64& rng() {
    static std::mt19937_64 gen(20240611);
    return gen;
}

inline cplx random_cplx() {
    std::normal_distribution<double> d;
    return {d(rng()), d(rng())};
}

inline ndsf::DenseTensor random_tensor(ndsf::Shape shape) {
    ndsf::DenseTensor t(std::move(shape));
    for (auto& v : t.data()) v = random_cplx();
    return t;
}

// dense exp(-i h t) for a Hermitian matrix
inline Eigen::MatrixXcd expm_hermitian(const Eigen::MatrixXcd& h, double t) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h);
    Eigen::VectorXcd ph(h.rows());
    for (Eigen::Index n = 0; n < h.rows(); ++n) ph(n) = std::polar(1.0, -es.eigenvalues()(n) * t);
    return es.eigenvectors() * ph.asDiagonal() * es.eigenvectors().adjoint();
}

}  // namespace testutil
