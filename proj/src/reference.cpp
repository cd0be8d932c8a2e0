#include "ndsf/reference.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>

#include <Eigen/Eigenvalues>

#define lapack_complex_float std::complex<float>
#define lapack_complex_double std::complex<double>
#include <lapacke.h>

#include "ndsf/errors.hpp"

namespace ndsf {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr int kBoundsGrid = 10000;
constexpr int kGoldenIterations = 100;

using CMat = Eigen::MatrixXcd;

// golden-section minimum of f on [a, b]
template <class F>
double golden_min(F f, double a, double b) {
    const double r = (std::sqrt(5.0) - 1.0) / 2.0;
    double c = b - r * (b - a), d = a + r * (b - a);
    double fc = f(c), fd = f(d);
    for (int it = 0; it < kGoldenIterations && b - a > 1e-15; ++it) {
        if (fc < fd) {
            b = d; d = c; fd = fc;
            c = b - r * (b - a); fc = f(c);
        } else {
            a = c; c = d; fc = fd;
            d = a + r * (b - a); fd = f(d);
        }
    }
    return std::min({f(a), f(b), fc, fd});
}

template <class F>
double grid_min(F f) {
    const double h = 2.0 * kPi / kBoundsGrid;
    int best = 0;
    double fbest = f(0.0);
    for (int i = 1; i < kBoundsGrid; ++i) {
        const double v = f(i * h);
        if (v < fbest) { fbest = v; best = i; }
    }
    return std::min(fbest, golden_min(f, (best - 1) * h, (best + 1) * h));
}

double wrap_momentum(double k) {
    double r = std::fmod(k, 2.0 * kPi);
    if (r < 0.0) r += 2.0 * kPi;
    return r;
}

Bounds negate(Bounds b) { return {-b.upper, -b.lower}; }

void check_ed_length(int length) {
    if (length < 1) throw ArgumentError("length must be positive");
    if (length > kMaxEdLength)
        throw SizeError("exact diagonalization is limited to L <= " + std::to_string(kMaxEdLength) + ", got " +
                        std::to_string(length));
}

std::size_t site_mask(int site, int length) { return std::size_t{1} << (length - site); }

// rows of `m` transformed by sigma^p on `site`
CMat apply_pauli(Pauli p, int site, int length, const CMat& m) {
    const std::size_t mask = site_mask(site, length);
    CMat out(m.rows(), m.cols());
    for (Eigen::Index s = 0; s < m.rows(); ++s) {
        const bool down = (static_cast<std::size_t>(s) & mask) != 0;
        const auto target = static_cast<Eigen::Index>(static_cast<std::size_t>(s) ^ mask);
        switch (p) {
            case Pauli::X: out.row(target) = m.row(s); break;
            case Pauli::Y: out.row(target) = m.row(s) * (down ? cplx{0.0, -1.0} : cplx{0.0, 1.0}); break;
            case Pauli::Z: out.row(s) = down ? (-m.row(s)).eval() : m.row(s); break;
        }
    }
    return out;
}

// columns exp(-i E t) * coeff for each t
CMat evolve_columns(const Eigen::VectorXd& energies, const Eigen::VectorXcd& coeff, const std::vector<double>& t) {
    CMat out(energies.size(), static_cast<Eigen::Index>(t.size()));
    for (std::size_t c = 0; c < t.size(); ++c)
        for (Eigen::Index n = 0; n < energies.size(); ++n)
            out(n, static_cast<Eigen::Index>(c)) = std::polar(1.0, -energies(n) * t[c]) * coeff(n);
    return out;
}

CMat real_times(const Eigen::MatrixXd& a, const CMat& b) {
    CMat out(a.rows(), b.cols());
    out.real() = a * b.real();
    out.imag() = a * b.imag();
    return out;
}

Eigen::VectorXcd real_times(const Eigen::MatrixXd& a, const Eigen::VectorXcd& b) {
    Eigen::VectorXcd out(a.rows());
    out.real() = a * b.real();
    out.imag() = a * b.imag();
    return out;
}

}  // namespace

double spinon_dispersion(double gamma, double k, DispersionForm form) {
    const double s = std::sin(2.0 * gamma);
    if (form == DispersionForm::Cosine) return 2.0 - s * std::cos(k);
    return 2.0 * std::sqrt(std::max(0.0, 1.0 - s * std::cos(k)));
}

DispersionCurve dispersion_curve(double gamma, const std::vector<double>& k, DispersionForm form) {
    DispersionCurve c;
    c.gamma = gamma;
    c.form = form;
    c.k = k;
    c.energy.reserve(k.size());
    for (double q : k) c.energy.push_back(spinon_dispersion(gamma, q, form));
    return c;
}

const char* to_string(BandKind kind) {
    switch (kind) {
        case BandKind::BowtieCreate: return "BOWTIE_CREATE";
        case BandKind::BowtieAnnihilate: return "BOWTIE_ANNIHILATE";
        case BandKind::Shell: return "SHELL";
    }
    return "?";
}

Bounds continuum_bounds(double gamma, double k, BandKind kind) {
    auto eps = [gamma](double q) { return spinon_dispersion(gamma, q); };
    if (kind == BandKind::BowtieAnnihilate) return negate(continuum_bounds(gamma, k, BandKind::BowtieCreate));
    std::function<double(double)> f;
    if (kind == BandKind::BowtieCreate)
        f = [&](double k1) { return eps(k1) + eps(k - k1); };
    else
        f = [&](double k1) { return eps(k1) - eps(k - k1); };
    Bounds b;
    b.lower = grid_min(f);
    b.upper = -grid_min([&](double k1) { return -f(k1); });
    return b;
}

Bounds continuum_bounds_cosine(double gamma, double k, BandKind kind) {
    const double s = std::sin(2.0 * gamma);
    switch (kind) {
        case BandKind::BowtieCreate: {
            const double w = 2.0 * s * std::abs(std::cos(k / 2.0));
            return {4.0 - w, 4.0 + w};
        }
        case BandKind::BowtieAnnihilate: return negate(continuum_bounds_cosine(gamma, k, BandKind::BowtieCreate));
        case BandKind::Shell: {
            const double w = 2.0 * s * std::abs(std::sin(k / 2.0));
            return {-w, w};
        }
    }
    return {};
}

Bounds qcp_bounds(double k, BandKind kind) {
    const double q = wrap_momentum(k);
    const double r2 = std::numbers::sqrt2;
    switch (kind) {
        case BandKind::BowtieCreate: {
            const double lower = 2.0 * r2 * std::sin(q / 2.0);
            const double upper = q < kPi ? 4.0 * r2 * std::cos(q / 4.0) : 4.0 * r2 * std::sin(q / 4.0);
            return {lower, upper};
        }
        case BandKind::BowtieAnnihilate: return negate(qcp_bounds(k, BandKind::BowtieCreate));
        case BandKind::Shell: {
            const double w = 2.0 * r2 * std::abs(std::sin(q / 2.0));
            return {-w, w};
        }
    }
    return {};
}

ContinuumBand continuum_band(double gamma, const std::vector<double>& k, BandKind kind) {
    ContinuumBand band;
    band.kind = kind;
    band.gamma = gamma;
    band.k = k;
    band.bounds.reserve(k.size());
    for (double q : k) band.bounds.push_back(continuum_bounds(gamma, q, kind));
    return band;
}

std::vector<double> bound_state_spectrum(double gamma, double hz, double k, int cutoff) {
    if (cutoff < 1) throw ArgumentError("bound-state cutoff must be >= 1");
    // the Hermitian tridiagonal matrix is diagonally similar to the real one
    // with off-diagonals |sin(gamma) (1 + e^{ik})|
    Eigen::VectorXd diag(cutoff);
    for (int n = 1; n <= cutoff; ++n) diag(n - 1) = 4.0 * std::cos(gamma) + 2.0 * n * hz;
    if (cutoff == 1) return {diag(0)};
    const double off = std::abs(std::sin(gamma) * (1.0 + std::polar(1.0, k)));
    Eigen::VectorXd sub = Eigen::VectorXd::Constant(cutoff - 1, off);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
    es.computeFromTridiagonal(diag, sub, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) throw NumericError("tridiagonal eigensolver failed");
    return {es.eigenvalues().data(), es.eigenvalues().data() + cutoff};
}

BoundStateSet bound_state_set(double gamma, double hz, const std::vector<double>& k, int cutoff) {
    BoundStateSet set;
    set.gamma = gamma;
    set.hz = hz;
    set.cutoff = cutoff;
    set.k = k;
    for (double q : k) set.levels.push_back(bound_state_spectrum(gamma, hz, q, cutoff));
    return set;
}

Eigen::MatrixXd ed_hamiltonian(const ModelParams& params) {
    const int L = params.length;
    check_ed_length(L);
    const std::size_t dim = std::size_t{1} << L;
    const double j = std::cos(params.gamma), g = std::sin(params.gamma);
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(dim, dim);
    for (std::size_t s = 0; s < dim; ++s) {
        double d = 0.0;
        for (int i = 1; i <= L; ++i) {
            const double zi = (s & site_mask(i, L)) ? -1.0 : 1.0;
            d -= params.hz * zi;
            if (i < L) d -= j * zi * ((s & site_mask(i + 1, L)) ? -1.0 : 1.0);
            h(static_cast<Eigen::Index>(s ^ site_mask(i, L)), static_cast<Eigen::Index>(s)) -= g;
        }
        h(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(s)) = d;
    }
    return h;
}

EdSolution ed_solve(const ModelParams& params) {
    EdSolution ed;
    ed.params = params;
    ed.vectors = ed_hamiltonian(params);
    ed.hamiltonian_norm = ed.vectors.norm();
    const auto n = static_cast<lapack_int>(ed.vectors.rows());
    ed.energies.resize(n);
    const lapack_int info =
        LAPACKE_dsyevd(LAPACK_COL_MAJOR, 'V', 'U', n, ed.vectors.data(), n, ed.energies.data());
    if (info != 0) throw NumericError("dsyevd failed with info " + std::to_string(info));
    return ed;
}

Eigen::VectorXcd product_state_vector(StateKind kind, int length) {
    check_ed_length(length);
    const auto st = product_state(kind, length);
    const std::size_t dim = std::size_t{1} << length;
    Eigen::VectorXcd v(dim);
    for (std::size_t s = 0; s < dim; ++s) {
        cplx a = 1.0;
        for (int i = 1; i <= length; ++i) a *= st.sites[i - 1][(s & site_mask(i, length)) ? 1 : 0];
        v(static_cast<Eigen::Index>(s)) = a;
    }
    return v;
}

TimeSeries ed_correlation(const EdSolution& ed, StateKind state, Pauli alpha, Pauli beta, int i, int j,
                          const std::vector<double>& t_grid) {
    const int L = ed.params.length;
    if (i < 1 || i > L || j < 1 || j > L) throw ArgumentError("site out of range");
    const Eigen::VectorXcd phi = product_state_vector(state, L);
    const Eigen::VectorXcd chi = apply_pauli(beta, j, L, phi);
    const Eigen::MatrixXd vt = ed.vectors.transpose();
    const CMat phi_t = real_times(ed.vectors, evolve_columns(ed.energies, real_times(vt, phi), t_grid));
    const CMat chi_t = real_times(ed.vectors, evolve_columns(ed.energies, real_times(vt, chi), t_grid));
    const CMat a_phi = apply_pauli(alpha, i, L, phi_t);

    TimeSeries out;
    out.t_grid = t_grid;
    out.values.resize(t_grid.size());
    for (std::size_t c = 0; c < t_grid.size(); ++c)
        out.values[c] = a_phi.col(static_cast<Eigen::Index>(c)).dot(chi_t.col(static_cast<Eigen::Index>(c)));
    return out;
}

TimeSeries ed_correlation(const ModelParams& params, StateKind state, Pauli alpha, Pauli beta, int i, int j,
                          const std::vector<double>& t_grid) {
    return ed_correlation(ed_solve(params), state, alpha, beta, i, j, t_grid);
}

CorrelationSet ed_correlation_set(const EdSolution& ed, StateKind state, Pauli alpha, Pauli beta,
                                  const std::vector<double>& t_grid) {
    const int L = ed.params.length;
    auto cs = CorrelationSet::empty(ed.params, state, alpha, beta, t_grid);
    const Eigen::VectorXcd phi = product_state_vector(state, L);
    const Eigen::MatrixXd vt = ed.vectors.transpose();
    const CMat phi_t = real_times(ed.vectors, evolve_columns(ed.energies, real_times(vt, phi), t_grid));

    std::vector<CMat> a_phi;
    a_phi.reserve(L);
    for (int i = 1; i <= L; ++i) a_phi.push_back(apply_pauli(alpha, i, L, phi_t));

    const int T = static_cast<int>(t_grid.size());
    for (int j = 1; j <= L; ++j) {
        const Eigen::VectorXcd chi = apply_pauli(beta, j, L, phi);
        const CMat chi_t = real_times(ed.vectors, evolve_columns(ed.energies, real_times(vt, chi), t_grid));
        for (int i = 1; i <= L; ++i)
            for (int c = 0; c < T; ++c) cs.at(i, j, c) = a_phi[i - 1].col(c).dot(chi_t.col(c));
    }
    return cs;
}

SpectralGrid lehmann_spectrum(const EdSolution& ed, const LehmannState& state, Pauli alpha, Pauli beta,
                              const WindowSpec& window, const OmegaGrid& omega) {
    window.validate();
    const double a = window.half_width;
    if (!(a > 0.0)) throw ArgumentError("the Lehmann spectrum needs an explicit window half width");
    const int L = ed.params.length;
    const Eigen::Index dim = ed.dim();
    const auto w = omega.values();
    const auto k = momentum_grid(L);
    const Eigen::MatrixXd vt = ed.vectors.transpose();

    Eigen::VectorXcd psi, c;
    if (state.ground) {
        psi = ed.vectors.col(0).cast<cplx>();
        c = Eigen::VectorXcd::Zero(dim);
        c(0) = 1.0;
    } else {
        psi = product_state_vector(state.kind, L);
        c = real_times(vt, psi);
    }

    // sigma_j^alpha V and sigma_j^beta psi, shared by all momenta
    std::vector<CMat> sa_v;
    std::vector<Eigen::VectorXcd> sb_psi;
    const CMat vc = ed.vectors.cast<cplx>();
    for (int j = 1; j <= L; ++j) {
        sa_v.push_back(apply_pauli(alpha, j, L, vc));
        sb_psi.push_back(apply_pauli(beta, j, L, psi));
    }

    SpectralGrid grid;
    grid.k_grid = k;
    grid.omega_grid = w;
    grid.values.assign(k.size() * w.size(), cplx{});
    grid.resolution_sigma = parzen_resolution(a);
    auto& man = grid.manifest;
    man.length = L;
    man.gamma = ed.params.gamma;
    man.hz = ed.params.hz;
    man.state = state.ground ? "GROUND" : to_string(state.kind);
    man.op_pair = std::string{to_char(alpha)} + to_char(beta);
    man.window_half_width = a;
    man.resolution_sigma = grid.resolution_sigma;
    man.spatial_mode = "lehmann";

    const double step = w.size() > 1 ? w[1] - w[0] : 0.0;
    const double du = a * step / 4.0;
    const double sd = std::sin(du), cd = std::cos(du);
    const double amp = 3.0 * a / 4.0;  // 2 pi * K(0)
    const double norm = 1.0 / std::sqrt(static_cast<double>(L));
    std::vector<cplx> row(w.size());

    for (std::size_t m = 0; m < k.size(); ++m) {
        // s_k = L^{-1/2} sum_j e^{-ikj} sigma_j
        CMat sk_v = CMat::Zero(dim, dim);
        Eigen::VectorXcd smk_psi = Eigen::VectorXcd::Zero(dim);
        for (int j = 1; j <= L; ++j) {
            sk_v += std::polar(norm, -k[m] * j) * sa_v[j - 1];
            smk_psi += std::polar(norm, k[m] * j) * sb_psi[j - 1];
        }
        const CMat mel = real_times(vt, sk_v);  // <m| s_k |n>
        const Eigen::VectorXcd d = real_times(vt, smk_psi);

        std::fill(row.begin(), row.end(), cplx{});
        for (Eigen::Index p = 0; p < dim; ++p) {
            if (c(p) == cplx{}) continue;
            for (Eigen::Index n = 0; n < dim; ++n) {
                const cplx weight = std::conj(c(p)) * mel(p, n) * d(n) * amp;
                if (weight == cplx{}) continue;
                const double freq = ed.energies(n) - ed.energies(p);
                double s = 0.0, co = 1.0;
                for (std::size_t q = 0; q < w.size(); ++q) {
                    const double u = a * (w[q] - freq) / 4.0;
                    if (q % 32 == 0) {
                        s = std::sin(u);
                        co = std::cos(u);
                    }
                    double sinc;
                    if (std::abs(u) < 1e-3) {
                        const double u2 = u * u;
                        sinc = 1.0 - u2 / 6.0 + u2 * u2 / 120.0;
                    } else {
                        sinc = s / u;
                    }
                    const double s2 = sinc * sinc;
                    row[q] += weight * (s2 * s2);
                    const double ns = s * cd + co * sd;
                    co = co * cd - s * sd;
                    s = ns;
                }
            }
        }
        for (std::size_t q = 0; q < w.size(); ++q) grid.at(m, q) = row[q];
    }
    return grid;
}

double rydberg_identity_residual(double V, double omega, const std::vector<double>& delta, double t, int length) {
    if (length < 1) throw ArgumentError("length must be positive");
    if (length > 10) throw SizeError("the Rydberg identity check is limited to L <= 10");
    if (static_cast<int>(delta.size()) != length) throw ArgumentError("need one detuning per site");
    const std::size_t dim = std::size_t{1} << length;

    auto build = [&](double v, double om, bool flip) {
        Eigen::MatrixXd h = Eigen::MatrixXd::Zero(dim, dim);
        for (std::size_t s = 0; s < dim; ++s) {
            double d = 0.0;
            for (int i = 1; i <= length; ++i) {
                const double zi = (s & site_mask(i, length)) ? -1.0 : 1.0;
                double di = delta[i - 1];
                if (flip) di = (i % 2 == 1) ? di : -di;
                d += di * zi;
                if (i < length) d += v * zi * ((s & site_mask(i + 1, length)) ? -1.0 : 1.0);
                h(static_cast<Eigen::Index>(s ^ site_mask(i, length)), static_cast<Eigen::Index>(s)) += om;
            }
            h(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(s)) = d;
        }
        return h;
    };
    auto expi = [](const Eigen::MatrixXd& h, double tau) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h);
        const Eigen::MatrixXd& v = es.eigenvectors();
        Eigen::VectorXcd ph(v.rows());
        for (Eigen::Index n = 0; n < v.rows(); ++n) ph(n) = std::polar(1.0, es.eigenvalues()(n) * tau);
        return CMat(v.cast<cplx>() * ph.asDiagonal() * v.transpose().cast<cplx>());
    };

    const CMat lhs = expi(build(V, omega, false), t);
    const CMat inner = expi(build(V, -omega, true), -t);
    std::size_t odd = 0;
    for (int i = 1; i <= length; i += 2) odd |= site_mask(i, length);

    double worst = 0.0;
    for (std::size_t r = 0; r < dim; ++r)
        for (std::size_t c = 0; c < dim; ++c) {
            const cplx rhs = inner(static_cast<Eigen::Index>(r ^ odd), static_cast<Eigen::Index>(c ^ odd));
            worst = std::max(worst, std::abs(lhs(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) - rhs));
        }
    return worst;
}

}  // namespace ndsf
