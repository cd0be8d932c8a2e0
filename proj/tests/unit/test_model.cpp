#include <doctest.h>

#include <cmath>
#include <numbers>

#include "helpers.hpp"
#include "ndsf/errors.hpp"
#include "ndsf/model.hpp"
#include "ndsf/reference.hpp"

using namespace ndsf;

namespace {

Eigen::MatrixXcd embed(const DenseTensor& op, int first_site, int length) {
    const RowMatrix m = op.to_matrix();
    const int span = static_cast<int>(std::lround(std::log2(static_cast<double>(m.rows()))));
    const Eigen::Index left = Eigen::Index{1} << (first_site - 1);
    const Eigen::Index right = Eigen::Index{1} << (length - first_site - span + 1);
    Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(left * m.rows() * right, left * m.rows() * right);
    for (Eigen::Index l = 0; l < left; ++l)
        for (Eigen::Index a = 0; a < m.rows(); ++a)
            for (Eigen::Index b = 0; b < m.cols(); ++b)
                for (Eigen::Index r = 0; r < right; ++r)
                    out((l * m.rows() + a) * right + r, (l * m.rows() + b) * right + r) = m(a, b);
    return out;
}

Eigen::MatrixXcd schedule_matrix(const GateSchedule& s, int length) {
    const Eigen::Index dim = Eigen::Index{1} << length;
    Eigen::MatrixXcd u = Eigen::MatrixXcd::Identity(dim, dim);
    for (const auto& layer : s.layers)
        for (const auto& g : layer.gates) u = embed(g.unitary, g.site, length) * u;
    return u;
}

}  // namespace

TEST_CASE("pauli matrices") {
    const RowMatrix x = pauli(Pauli::X).to_matrix(), y = pauli(Pauli::Y).to_matrix(), z = pauli(Pauli::Z).to_matrix();
    CHECK((x * y - cplx{0, 1} * z).norm() < 1e-15);
    CHECK(parse_pauli("z") == Pauli::Z);
    CHECK(to_char(Pauli::Y) == 'y');
    CHECK_THROWS_AS(parse_pauli("q"), ArgumentError);
}

TEST_CASE("model validation") {
    CHECK_NOTHROW(ModelParams{0.3, 0.1, 6}.validate());
    CHECK_THROWS_AS((ModelParams{0.3, 0.1, 5}.validate()), ArgumentError);
    CHECK_THROWS_AS((ModelParams{2.0, 0.1, 6}.validate()), ArgumentError);
}

TEST_CASE("hamiltonian terms assemble the ED Hamiltonian") {
    const ModelParams p{0.7, 0.3, 6};
    Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(64, 64);
    for (const auto& t : hamiltonian_terms(p)) h += embed(t.op, t.first_site, p.length);
    CHECK((h - ed_hamiltonian(p).cast<cplx>()).norm() < 1e-13);
}

TEST_CASE("trotter schedules approximate the exact propagator") {
    const ModelParams p{0.9, 0.2, 6};
    const Eigen::MatrixXcd h = ed_hamiltonian(p).cast<cplx>();
    auto err = [&](double dt, TrotterOrder order, Direction dir) {
        const auto s = trotter_gates(p, dt, dir, order);
        const double sign = dir == Direction::Forward ? 1.0 : -1.0;
        return (schedule_matrix(s, p.length) - testutil::expm_hermitian(h, sign * dt)).norm();
    };
    const double e2a = err(0.05, TrotterOrder::Second, Direction::Forward);
    const double e2b = err(0.025, TrotterOrder::Second, Direction::Forward);
    CHECK(e2a / e2b == doctest::Approx(8.0).epsilon(0.1));
    const double e4a = err(0.05, TrotterOrder::Fourth, Direction::Forward);
    const double e4b = err(0.025, TrotterOrder::Fourth, Direction::Forward);
    CHECK(e4a / e4b == doctest::Approx(32.0).epsilon(0.15));
    CHECK(e4a < 1e-5);  // Frobenius norm over 64 states
    CHECK(err(0.05, TrotterOrder::Fourth, Direction::Backward) == doctest::Approx(e4a).epsilon(1e-6));
    CHECK_THROWS_AS(trotter_gates(p, 0.2, Direction::Forward), ArgumentError);
}

TEST_CASE("product states") {
    for (auto kind : {StateKind::FMZ, StateKind::FMX, StateKind::NEEL}) {
        const auto v = product_state_vector(kind, 6);
        CHECK(std::abs(v.norm() - 1.0) < 1e-15);
        CHECK(parse_state_kind(to_string(kind)) == kind);
    }
    const auto fmx = product_state(StateKind::FMX, 4);
    CHECK(std::abs(site_expectation(fmx, 2, pauli(Pauli::X)) - 1.0) < 1e-15);
    const auto neel = product_state(StateKind::NEEL, 4);
    CHECK(std::abs(site_expectation(neel, 1, pauli(Pauli::Z)) - 1.0) == 0.0);
    CHECK(std::abs(site_expectation(neel, 2, pauli(Pauli::Z)) + 1.0) == 0.0);
}

TEST_CASE("local operator MPS is sigma on one site") {
    const auto op = local_operator_mps(Pauli::Y, 3, 4);
    CHECK(op.max_bond() == 1);
    const RowMatrix d = op.to_dense();
    CHECK((Eigen::MatrixXcd(d) - embed(pauli(Pauli::Y), 3, 4)).norm() < 1e-15);
}

TEST_CASE("density operator MPS") {
    const auto st = product_state(StateKind::FMX, 4);
    const auto rho = density_operator_mps(st, Pauli::Z, 2);
    const Eigen::VectorXcd v = product_state_vector(StateKind::FMX, 4);
    const Eigen::MatrixXcd expect = embed(pauli(Pauli::Z), 2, 4) * v * v.adjoint();
    CHECK((Eigen::MatrixXcd(rho.to_dense()) - expect).norm() < 1e-14);
}
