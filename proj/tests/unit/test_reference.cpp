#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "helpers.hpp"
#include "ndsf/errors.hpp"
#include "ndsf/reference.hpp"

using namespace ndsf;
using std::numbers::pi;

TEST_CASE("spinon dispersion") {
    CHECK(spinon_dispersion(pi / 4, 0.0) == doctest::Approx(0.0));
    CHECK(spinon_dispersion(0.0, 1.234) == 2.0);
    CHECK(std::abs(spinon_dispersion(pi / 4, pi) - 2.0 * std::sqrt(2.0)) < 1e-15);
    CHECK(spinon_dispersion(0.3, 0.0, DispersionForm::Cosine) == doctest::Approx(2.0 - std::sin(0.6)));
    for (double k : {0.3, 1.1, 2.9})
        CHECK(std::abs(spinon_dispersion(0.5, k) - spinon_dispersion(0.5, 2 * pi - k)) < 1e-12);
}

TEST_CASE("continuum bounds: closed-form limits") {
    const double g = 0.4, s = std::sin(2 * g);
    auto b = continuum_bounds_cosine(g, 0.0, BandKind::BowtieCreate);
    CHECK(b.lower == doctest::Approx(4 - 2 * s));
    CHECK(b.upper == doctest::Approx(4 + 2 * s));
    auto sh = continuum_bounds(g, 0.0, BandKind::Shell);
    CHECK(std::abs(sh.lower) < 1e-12);
    CHECK(std::abs(sh.upper) < 1e-12);
    auto an = continuum_bounds(g, 1.0, BandKind::BowtieAnnihilate);
    auto cr = continuum_bounds(g, 1.0, BandKind::BowtieCreate);
    CHECK(an.lower == -cr.upper);
    CHECK(an.upper == -cr.lower);
}

TEST_CASE("continuum bounds: gamma = pi/8 at k = pi") {
    // e(k1) + e(pi - k1) = 2 (sqrt(1 - c) + sqrt(1 + c)), c = sin(2g) cos k1:
    // maximal (= 4) at c = 0, minimal (= 4 cos g) at |c| = sin(2g)
    const double g = pi / 8;
    auto b = continuum_bounds(g, pi, BandKind::BowtieCreate);
    CHECK(std::abs(b.upper - 2 * spinon_dispersion(g, pi / 2)) < 1e-12);
    CHECK(std::abs(b.upper - 4.0) < 1e-12);
    CHECK(std::abs(b.lower - 4 * std::cos(g)) < 1e-12);
    CHECK(b.upper - b.lower > 0.1);
}

TEST_CASE("continuum bounds: brute-force grid oracle") {
    for (double g : {0.2, pi / 8, 1.1})
        for (double k : {0.0, 0.7, 2.0, pi, 4.5}) {
            double lo = 1e9, hi = -1e9, slo = 1e9, shi = -1e9;
            for (int i = 0; i < 20000; ++i) {
                const double k1 = 2 * pi * i / 20000.0;
                const double e1 = spinon_dispersion(g, k1), e2 = spinon_dispersion(g, k - k1);
                lo = std::min(lo, e1 + e2);
                hi = std::max(hi, e1 + e2);
                slo = std::min(slo, e1 - e2);
                shi = std::max(shi, e1 - e2);
            }
            auto b = continuum_bounds(g, k, BandKind::BowtieCreate);
            auto s = continuum_bounds(g, k, BandKind::Shell);
            CHECK(b.lower <= lo + 1e-12);
            CHECK(b.lower > lo - 1e-6);
            CHECK(b.upper >= hi - 1e-12);
            CHECK(b.upper < hi + 1e-6);
            CHECK(s.lower == doctest::Approx(slo).epsilon(1e-6));
            CHECK(s.upper == doctest::Approx(shi).epsilon(1e-6));
        }
}

TEST_CASE("continuum bounds: consistency with the dispersion range") {
    for (double g : {0.1, 0.5, 1.0, 1.4}) {
        double emin = 1e9, emax = 0.0;
        for (int i = 0; i < 1000; ++i) {
            const double e = spinon_dispersion(g, 2 * pi * i / 1000.0);
            emin = std::min(emin, e);
            emax = std::max(emax, e);
        }
        for (double k : {0.0, 1.0, 2.5, pi}) {
            auto b = continuum_bounds(g, k, BandKind::BowtieCreate);
            CHECK(b.lower >= 2 * emin - 1e-12);
            CHECK(b.upper <= 2 * emax + 1e-12);
            CHECK(b.lower >= 0.0);
        }
    }
}

TEST_CASE("continuum bounds: cosine limit near gamma = 0") {
    const double g = 0.02;
    for (double k : {0.0, 1.0, 2.0, pi})
        for (auto kind : {BandKind::BowtieCreate, BandKind::Shell}) {
            auto n = continuum_bounds(g, k, kind);
            auto c = continuum_bounds_cosine(g, k, kind);
            CHECK(std::abs(n.lower - c.lower) < 1e-3);
            CHECK(std::abs(n.upper - c.upper) < 1e-3);
        }
}

TEST_CASE("qcp bounds") {
    auto b = qcp_bounds(pi, BandKind::BowtieCreate);
    CHECK(b.lower == doctest::Approx(2 * std::sqrt(2.0)));
    CHECK(b.upper == doctest::Approx(4.0));
    auto z = qcp_bounds(0.0, BandKind::BowtieCreate);
    CHECK(z.lower == 0.0);
    CHECK(z.upper == doctest::Approx(4 * std::sqrt(2.0)));
    for (double k = 0.0; k < 2 * pi; k += 0.1) {
        CHECK(std::abs(qcp_bounds(k, BandKind::Shell).upper - qcp_bounds(k, BandKind::BowtieCreate).lower) < 1e-12);
        auto num = continuum_bounds(pi / 4, k, BandKind::BowtieCreate);
        auto cf = qcp_bounds(k, BandKind::BowtieCreate);
        CHECK(std::abs(num.lower - cf.lower) < 1e-6);
        CHECK(std::abs(num.upper - cf.upper) < 1e-6);
    }
}

TEST_CASE("bound states: exactly diagonal at k = pi and gamma = 0") {
    for (double g : {0.0, pi / 8}) {
        const auto e = bound_state_spectrum(g, 0.1, pi, 12);
        for (int n = 1; n <= 12; ++n) CHECK(std::abs(e[n - 1] - (4 * std::cos(g) + 0.2 * n)) < 1e-10);
    }
    const auto e0 = bound_state_spectrum(0.0, 0.3, 0.7, 5);
    for (int n = 1; n <= 5; ++n) CHECK(std::abs(e0[n - 1] - (4 + 0.6 * n)) < 1e-12);
    CHECK_THROWS_AS(bound_state_spectrum(0.1, 0.1, 0.0, 0), ArgumentError);
}

TEST_CASE("bound states: dense Hermitian oracle") {
    const double g = pi / 8, hz = 0.1, k = 0.0;
    const int N = 64;
    Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(N, N);
    const cplx off = -std::sin(g) * (1.0 + std::polar(1.0, -k));
    for (int n = 0; n < N; ++n) {
        h(n, n) = 4 * std::cos(g) + 2.0 * (n + 1) * hz;
        if (n + 1 < N) {
            h(n + 1, n) = off;
            h(n, n + 1) = std::conj(off);
        }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h);
    const auto e = bound_state_spectrum(g, hz, k, N);
    for (int n = 0; n < 3; ++n) CHECK(std::abs(e[n] - es.eigenvalues()(n)) < 1e-10);
    for (std::size_t n = 1; n < e.size(); ++n) CHECK(e[n] >= e[n - 1]);
}

TEST_CASE("bound states: cutoff convergence and dense limit") {
    for (double hz : {0.1, 0.2, 0.4}) {
        const auto a = bound_state_spectrum(pi / 8, hz, 0.5, 64);
        const auto b = bound_state_spectrum(pi / 8, hz, 0.5, 128);
        for (int n = 0; n < 3; ++n) CHECK(std::abs(a[n] - b[n]) < 1e-8);
    }
    // linear potential: low-lying spacing shrinks like hz^(2/3) as the ladder becomes dense
    double prev = 1e9;
    for (double hz : {1e-1, 1e-2, 1e-3}) {
        const auto e = bound_state_spectrum(pi / 8, hz, 0.5, 4000);
        const double gap = e[1] - e[0];
        CHECK(gap < prev);
        if (hz < 0.05) CHECK(prev / gap == doctest::Approx(std::pow(10.0, 2.0 / 3.0)).epsilon(0.05));
        prev = gap;
    }
}

TEST_CASE("exact diagonalization") {
    const ModelParams p{0.7, 0.2, 6};
    const auto ed = ed_solve(p);
    const Eigen::MatrixXd h = ed_hamiltonian(p);
    for (int m = 0; m < ed.dim(); ++m)
        CHECK((h * ed.vectors.col(m) - ed.energies(m) * ed.vectors.col(m)).norm() < 1e-10 * ed.hamiltonian_norm);
    for (int m = 1; m < ed.dim(); ++m) CHECK(ed.energies(m) >= ed.energies(m - 1));
    CHECK_THROWS_AS(ed_solve(ModelParams{0.7, 0.2, 14}), SizeError);
}

TEST_CASE("ED correlations: closed forms and conjugation") {
    const std::vector<double> t{0.0, 0.3, 0.9, 1.7};
    {
        const auto s = ed_correlation(ModelParams{0.4, 0.1, 6}, StateKind::FMX, Pauli::X, Pauli::X, 3, 3, {0.0});
        CHECK(s.values[0] == cplx{1.0});
    }
    {
        const auto s = ed_correlation(ModelParams{pi / 2, 0.0, 4}, StateKind::FMZ, Pauli::Z, Pauli::Z, 2, 2, t);
        for (std::size_t n = 0; n < t.size(); ++n) CHECK(std::abs(s.values[n] - std::cos(2 * t[n])) < 1e-12);
    }
    const ModelParams p{0.9, 0.3, 6};
    const auto ed = ed_solve(p);
    const std::vector<double> neg{0.0, -0.3, -0.9, -1.7};
    for (auto st : {StateKind::FMZ, StateKind::FMX}) {
        const auto a = ed_correlation(ed, st, Pauli::X, Pauli::Z, 2, 5, t);
        const auto b = ed_correlation(ed, st, Pauli::X, Pauli::Z, 2, 5, neg);
        for (std::size_t n = 0; n < t.size(); ++n) CHECK(std::abs(b.values[n] - std::conj(a.values[n])) < 1e-12);
    }
}

TEST_CASE("Lehmann spectrum: static FMZ zz") {
    const auto ed = ed_solve(ModelParams{0.0, 0.0, 6});
    const auto g = lehmann_spectrum(ed, LehmannState{}, Pauli::Z, Pauli::Z, WindowSpec{WindowFamily::Parzen, 12.0},
                                    OmegaGrid{});
    double worst = 0.0;
    for (std::size_t m = 0; m < g.num_k(); ++m)
        for (std::size_t w = 0; w < g.num_omega(); ++w) {
            const double expect = m == 0 ? 2 * pi * 6 * parzen_kernel(g.omega_grid[w], 12.0) : 0.0;
            worst = std::max(worst, std::abs(g.at(m, w) - expect));
        }
    CHECK(worst < 1e-9);
}

TEST_CASE("Lehmann spectrum: ground state has no negative frequencies") {
    const auto ed = ed_solve(ModelParams{0.6, 0.0, 6});
    LehmannState gs;
    gs.ground = true;
    const auto g = lehmann_spectrum(ed, gs, Pauli::Z, Pauli::Z, WindowSpec{WindowFamily::Parzen, 12.0}, OmegaGrid{});
    // the kernel has tails; compare against the broadened spectrum built from
    // excitation energies >= 0: everything below -6 sigma must be tiny
    double big = 0.0, below = 0.0;
    for (std::size_t m = 0; m < g.num_k(); ++m)
        for (std::size_t w = 0; w < g.num_omega(); ++w) {
            big = std::max(big, std::abs(g.at(m, w)));
            if (g.omega_grid[w] < -6 * g.resolution_sigma) below = std::max(below, std::abs(g.at(m, w)));
        }
    CHECK(below < 1e-2 * big);
    for (std::size_t m = 0; m < g.num_k(); ++m)
        for (std::size_t w = 0; w < g.num_omega(); ++w) CHECK(g.at(m, w).real() > -1e-8 * big);
}

TEST_CASE("Rydberg sign-flip identity") {
    CHECK(rydberg_identity_residual(0.8, 0.0, {0.0, 0.0, 0.0, 0.0}, 1.0, 4) < 1e-12);
    CHECK(rydberg_identity_residual(0.0, 0.9, {0.0}, 1.0, 1) < 1e-14);
    std::mt19937_64 gen(7);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<double> delta(8);
    for (auto& d : delta) d = u(gen);
    CHECK(rydberg_identity_residual(1.0, 0.7, delta, 1.3, 8) < 1e-10);
    CHECK_THROWS_AS(rydberg_identity_residual(1.0, 0.7, std::vector<double>(11), 1.0, 11), SizeError);
}
