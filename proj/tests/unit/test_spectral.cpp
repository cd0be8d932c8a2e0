#include <doctest.h>

#include <cmath>
#include <numbers>

#include "helpers.hpp"
#include "ndsf/errors.hpp"
#include "ndsf/reference.hpp"
#include "ndsf/spectral.hpp"

using namespace ndsf;
using std::numbers::pi;

namespace {

CorrelationSet synthetic_set(int L, int T, double dt) {
    std::vector<double> t(T);
    for (int n = 0; n < T; ++n) t[n] = n * dt;
    return CorrelationSet::empty(ModelParams{0.3, 0.0, L}, StateKind::FMZ, Pauli::Z, Pauli::Z, t);
}

TimeSeries sampled(int n, double dt, const std::function<cplx(double)>& f, double t0 = 0.0) {
    TimeSeries s;
    for (int i = 0; i < n; ++i) {
        const double t = t0 + i * dt;
        s.t_grid.push_back(t);
        s.values.push_back(f(t));
    }
    return s;
}

// symmetric grid on [-a, a]
TimeSeries symmetric(double a, double dt, const std::function<cplx(double)>& f) {
    const int half = static_cast<int>(std::lround(a / dt));
    TimeSeries s;
    for (int i = -half; i <= half; ++i) {
        s.t_grid.push_back(i * dt);
        s.values.push_back(f(i * dt));
    }
    return s;
}

}  // namespace

TEST_CASE("spatial_ft: on-site delta and uniform correlations") {
    const int L = 6;
    auto delta = synthetic_set(L, 3, 0.1);
    auto ones = synthetic_set(L, 3, 0.1);
    for (int i = 1; i <= L; ++i)
        for (int j = 1; j <= L; ++j)
            for (int t = 0; t < 3; ++t) {
                delta.at(i, j, t) = i == j ? 1.0 : 0.0;
                ones.at(i, j, t) = 1.0;
            }
    const auto d = spatial_ft(delta);
    const auto u = spatial_ft(ones);
    for (int m = 0; m < L; ++m)
        for (int t = 0; t < 3; ++t) {
            CHECK(std::abs(d[m].values[t] - 1.0) < 1e-14);
            CHECK(std::abs(u[m].values[t] - (m == 0 ? double(L) : 0.0)) < 1e-13);
        }
}

TEST_CASE("spatial_ft: matches the double loop") {
    const int L = 6, T = 4;
    auto cs = synthetic_set(L, T, 0.1);
    for (auto& v : cs.values) v = testutil::random_cplx();
    const auto k = momentum_grid(L);
    const auto s = spatial_ft(cs);
    double worst = 0.0;
    for (int m = 0; m < L; ++m)
        for (int t = 0; t < T; ++t) {
            cplx acc = 0.0;
            for (int i = 1; i <= L; ++i)
                for (int j = 1; j <= L; ++j) acc += std::polar(1.0, -k[m] * (i - j)) * cs.at(i, j, t);
            worst = std::max(worst, std::abs(acc / double(L) - s[m].values[t]));
        }
    CHECK(worst < 1e-12);

    SpatialWindow w{2, 4};
    const auto b = spatial_ft(cs, w);
    cplx acc = 0.0;
    for (int i = 2; i <= 4; ++i)
        for (int j = 1; j <= L; ++j) acc += std::polar(1.0, -k[1] * (i - j)) * cs.at(i, j, 2);
    CHECK(std::abs(acc / 3.0 - b[1].values[2]) < 1e-12);
}

TEST_CASE("spatial_ft: rejects non-finite data") {
    auto cs = synthetic_set(4, 2, 0.1);
    cs.at(2, 3, 1) = std::nan("");
    CHECK_THROWS_AS(spatial_ft(cs), DataError);
}

TEST_CASE("burg_extend: pure cosine") {
    const double w0 = 0.9, dt = 0.05;
    auto s = sampled(100, dt, [&](double t) { return cplx{std::cos(w0 * t)}; });
    LpSpec spec;
    spec.order = 2;
    spec.horizon = 10.0;
    const auto r = burg_extend(s, spec);
    CHECK(std::abs(r.coefficients[0] - 2.0 * std::cos(w0 * dt)) < 1e-10);
    CHECK(std::abs(r.coefficients[1] + 1.0) < 1e-10);
    double worst = 0.0;
    for (std::size_t n = 0; n < r.series.size(); ++n)
        worst = std::max(worst, std::abs(r.series.values[n] - std::cos(w0 * r.series.t_grid[n])));
    CHECK(worst < 1e-10);
    CHECK(r.series.t_grid.back() == doctest::Approx(10.0));
}

TEST_CASE("burg_extend: damped exponential") {
    const cplx z{-0.05, 1.3};
    const double dt = 0.05;
    auto s = sampled(60, dt, [&](double t) { return std::exp(z * t); });
    LpSpec spec;
    spec.order = 1;
    spec.horizon = 6.0;
    const auto r = burg_extend(s, spec);
    CHECK(std::abs(r.coefficients[0] - std::exp(z * dt)) < 1e-12);
    double worst = 0.0;
    for (std::size_t n = 0; n < r.series.size(); ++n)
        worst = std::max(worst, std::abs(r.series.values[n] - std::exp(z * r.series.t_grid[n])));
    CHECK(worst < 1e-10);
}

TEST_CASE("burg_extend: two tones from 200 to 300 samples") {
    const double dt = 1.0;
    auto f = [](double n) { return cplx{std::cos(0.7 * n) + 0.5 * std::cos(1.9 * n)}; };
    auto s = sampled(200, dt, f);
    LpSpec spec;
    spec.order = 4;
    spec.horizon = 299.0;
    const auto r = burg_extend(s, spec);
    REQUIRE(r.series.size() == 300);
    double worst = 0.0;
    for (std::size_t n = 200; n < 300; ++n) worst = std::max(worst, std::abs(r.series.values[n] - f(double(n))));
    CHECK(worst < 1e-8);
    // known part untouched
    for (std::size_t n = 0; n < 200; ++n) CHECK(r.series.values[n] == s.values[n]);
    CHECK(r.reflected_roots == 0);
}

TEST_CASE("burg_extend: stabilization keeps roots inside the unit circle") {
    auto s = sampled(80, 0.1, [](double t) { return cplx{std::exp(0.3 * t) * std::cos(2.0 * t)}; });
    LpSpec spec;
    spec.order = 2;
    spec.horizon = 30.0;
    const auto r = burg_extend(s, spec);
    CHECK(r.reflected_roots == 2);
    double big = 0.0;
    for (std::size_t n = 80; n < r.series.size(); ++n) big = std::max(big, std::abs(r.series.values[n]));
    CHECK(big < 20.0);
    spec.stabilize = false;
    const auto u = burg_extend(s, spec);
    CHECK(u.reflected_roots == 0);
    CHECK(std::abs(u.series.values.back()) > 1e3);
}

TEST_CASE("burg_extend: argument checks") {
    auto s = sampled(10, 0.1, [](double) { return cplx{1.0}; });
    LpSpec spec;
    spec.order = 5;
    CHECK_THROWS_AS(burg_extend(s, spec), ArgumentError);
    spec.order = 0;
    CHECK(spec.resolved_order(10) == 2);
    CHECK(spec.resolved_order(1000) == 32);
}

TEST_CASE("parzen weight") {
    const double a = 12.0;
    CHECK(parzen_weight(0.0, a) == 1.0);
    CHECK(parzen_weight(a, a) == 0.0);
    CHECK(parzen_weight(-a, a) == 0.0);
    CHECK(parzen_weight(a / 2, a) == 0.25);
    const double u = 0.5;
    CHECK(1.0 - 6.0 * u * u + 6.0 * u * u * u == 2.0 * (1 - u) * (1 - u) * (1 - u));
    CHECK(parzen_weight(13.0, a) == 0.0);
    CHECK_THROWS_AS(parzen_weight(0.0, 0.0), ArgumentError);
}

TEST_CASE("parzen kernel: moments") {
    const double a = 12.0;
    double area = 0.0, second = 0.0;
    const double h = 1e-3;
    for (double w = -400.0; w <= 400.0; w += h) {
        const double k = parzen_kernel(w, a);
        area += k * h;
        second += w * w * k * h;
    }
    CHECK(area == doctest::Approx(1.0).epsilon(1e-4));
    CHECK(std::sqrt(second) == doctest::Approx(parzen_resolution(a)).epsilon(1e-2));
    CHECK(parzen_kernel(0.0, a) == doctest::Approx(3.0 * a / (8.0 * pi)).epsilon(1e-15));
    CHECK(parzen_resolution(18.0) == doctest::Approx(std::sqrt(3.0) / 9.0).epsilon(1e-15));
}

TEST_CASE("temporal_ft: constant input reproduces the kernel") {
    const double a = 12.0;
    const auto omega = OmegaGrid{}.values();
    const auto s = symmetric(a, 0.05, [](double) { return cplx{1.0}; });
    const auto out = temporal_ft(s, WindowSpec{WindowFamily::Parzen, a}, omega);
    double worst = 0.0;
    for (std::size_t n = 0; n < omega.size(); ++n)
        worst = std::max(worst, std::abs(out[n] / (2.0 * pi) - parzen_kernel(omega[n], a)));
    CHECK(worst < 1e-6);
}

TEST_CASE("temporal_ft: cosine gives two equal copies") {
    const double a = 12.0, w0 = 2.0;
    const std::vector<double> omega{-w0, w0};
    const auto s = symmetric(a, 0.05, [&](double t) { return cplx{std::cos(w0 * t)}; });
    const auto out = temporal_ft(s, WindowSpec{WindowFamily::Parzen, a}, omega);
    CHECK(std::abs(out[0] - out[1]) < 1e-6);
    CHECK(out[0].real() == doctest::Approx(pi * parzen_kernel(0.0, a)).epsilon(1e-3));
}

TEST_CASE("temporal_ft: widening window converges to the exact transform") {
    // f(t) = exp(-t^2 / 2) has transform sqrt(2 pi) exp(-w^2 / 2)
    const std::vector<double> omega{0.0, 0.5, 1.0};
    double prev = 1e9;
    for (double a : {4.0, 8.0, 16.0, 32.0}) {
        const auto s = symmetric(a, 0.02, [](double t) { return cplx{std::exp(-t * t / 2)}; });
        const auto out = temporal_ft(s, WindowSpec{WindowFamily::Parzen, a}, omega);
        double err = 0.0;
        for (std::size_t n = 0; n < omega.size(); ++n)
            err = std::max(err, std::abs(out[n] - std::sqrt(2 * pi) * std::exp(-omega[n] * omega[n] / 2)));
        CHECK(err < prev);
        // window bias is 6 f''(0) / a^2 at leading order
        if (a > 8.0) CHECK(prev / err == doctest::Approx(4.0).epsilon(0.1));
        prev = err;
    }
    CHECK(prev < 0.02);
}

TEST_CASE("temporal_ft: coverage") {
    const auto s = symmetric(6.0, 0.05, [](double) { return cplx{1.0}; });
    CHECK_THROWS_AS(temporal_ft(s, WindowSpec{WindowFamily::Parzen, 8.0}, {0.0}), DataError);
}

TEST_CASE("pipeline: static FMZ zz at gamma = 0") {
    const int L = 6;
    EvolutionConfig cfg;
    cfg.t_max = 12.0;
    cfg.truncation = {16, 1e-12};
    const auto cs = correlation_series(ModelParams{0.0, 0.0, L}, StateKind::FMZ, Pauli::Z, Pauli::Z, cfg);
    LpSpec lp;
    lp.enabled = false;
    const auto g = ndsf_pipeline(cs, lp, WindowSpec{}, OmegaGrid{});
    CHECK(g.manifest.window_half_width == doctest::Approx(12.0));
    double worst0 = 0.0, worst_rest = 0.0;
    for (std::size_t w = 0; w < g.num_omega(); ++w) {
        worst0 = std::max(worst0, std::abs(g.at(0, w) - 2 * pi * L * parzen_kernel(g.omega_grid[w], 12.0)));
        for (std::size_t m = 1; m < g.num_k(); ++m) worst_rest = std::max(worst_rest, std::abs(g.at(m, w)));
    }
    CHECK(worst0 < 1e-6 * L);
    CHECK(worst_rest < 1e-8);
    CHECK(g.manifest.spatial_sum_rule == doctest::Approx(L).epsilon(1e-15));
}

TEST_CASE("pipeline: resolution after prediction to 18") {
    const int L = 4;
    EvolutionConfig cfg;
    cfg.t_max = 12.0;
    const auto cs = correlation_series(ModelParams{0.3, 0.0, L}, StateKind::FMZ, Pauli::X, Pauli::X, cfg);
    LpSpec lp;
    lp.horizon = 18.0;
    const auto g = ndsf_pipeline(cs, lp, WindowSpec{}, OmegaGrid{});
    CHECK(g.manifest.t_max_extended == doctest::Approx(18.0).epsilon(1e-12));
    CHECK(std::abs(g.resolution_sigma - std::sqrt(3.0) / 9.0) < 1e-15);
    CHECK(g.manifest.lp_order == 32);
}

TEST_CASE("pipeline: conjugate momentum symmetry, sum rule and linearity") {
    const ModelParams p{0.6, 0.0, 6};
    std::vector<double> t;
    for (int n = 0; n <= 120; ++n) t.push_back(0.05 * n);
    const auto ed = ed_solve(p);
    const auto a = ed_correlation_set(ed, StateKind::FMX, Pauli::Z, Pauli::Z, t);
    const auto b = ed_correlation_set(ed, StateKind::FMZ, Pauli::X, Pauli::X, t);
    LpSpec off;
    off.enabled = false;
    const auto ga = ndsf_pipeline(a, off, WindowSpec{}, OmegaGrid{});
    const auto gb = ndsf_pipeline(b, off, WindowSpec{}, OmegaGrid{});

    double big = 0.0, asym = 0.0;
    for (std::size_t m = 0; m < ga.num_k(); ++m)
        for (std::size_t w = 0; w < ga.num_omega(); ++w) {
            big = std::max(big, std::abs(ga.at(m, w)));
            asym = std::max(asym, std::abs(ga.at(m, w) - std::conj(ga.at((6 - m) % 6, w))));
        }
    CHECK(asym < 1e-8 * big);
    CHECK(ga.manifest.spatial_sum_rule == doctest::Approx(6.0).epsilon(1e-14));

    auto mix = a;
    // negative-time completion conjugates, so only real coefficients commute with it
    const double ca = 0.3, cb = -1.2;
    for (std::size_t n = 0; n < mix.values.size(); ++n) mix.values[n] = ca * a.values[n] + cb * b.values[n];
    const auto gm = ndsf_pipeline(mix, off, WindowSpec{}, OmegaGrid{});
    double lin = 0.0;
    for (std::size_t n = 0; n < gm.values.size(); ++n)
        lin = std::max(lin, std::abs(gm.values[n] - ca * ga.values[n] - cb * gb.values[n]));
    CHECK(lin < 1e-10);
}

TEST_CASE("extract_peaks") {
    const auto omega = OmegaGrid{}.values();
    const double a = 12.0;
    std::vector<double> row(omega.size());
    SUBCASE("single bump") {
        for (std::size_t n = 0; n < omega.size(); ++n) row[n] = parzen_kernel(omega[n] - 1.3, a);
        const auto peaks = extract_peaks(row, omega, 0.1);
        REQUIRE(peaks.size() == 1);
        CHECK(std::abs(peaks[0].omega - 1.3) < 0.005);
        CHECK(peaks[0].width > 0.0);
    }
    SUBCASE("two bumps five sigma apart") {
        const double sep = 5.0 * parzen_resolution(a);
        for (std::size_t n = 0; n < omega.size(); ++n)
            row[n] = parzen_kernel(omega[n] + 0.4, a) + parzen_kernel(omega[n] + 0.4 - sep, a);
        const auto peaks = extract_peaks(row, omega, 0.1);
        REQUIRE(peaks.size() == 2);
        CHECK(peaks[0].omega < peaks[1].omega);
    }
    SUBCASE("flat zero row") {
        CHECK(extract_peaks(row, omega, 0.1).empty());
    }
}

TEST_CASE("conjugate completion") {
    std::vector<TimeSeries> per_k(4);
    for (int m = 0; m < 4; ++m) per_k[m] = sampled(3, 0.5, [m](double t) { return cplx{double(m), t}; });
    const auto full = complete_negative_times(per_k, 1);
    REQUIRE(full[1].size() == 5);
    CHECK(full[1].t_grid[0] == -1.0);
    CHECK(full[1].values[0] == std::conj(per_k[3].values[2]));
    CHECK(full[1].values[4] == per_k[1].values[2]);
    const auto neg = complete_negative_times(per_k, -1);
    CHECK(neg[0].values[1] == -std::conj(per_k[0].values[1]));
}
