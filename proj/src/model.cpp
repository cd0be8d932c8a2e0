#include "ndsf/model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/Eigenvalues>

#include "ndsf/errors.hpp"

namespace ndsf {

DenseTensor pauli(Pauli p) {
    const cplx i{0.0, 1.0};
    switch (p) {
        case Pauli::X: return DenseTensor({2, 2}, {0.0, 1.0, 1.0, 0.0});
        case Pauli::Y: return DenseTensor({2, 2}, {0.0, -i, i, 0.0});
        case Pauli::Z: return DenseTensor({2, 2}, {1.0, 0.0, 0.0, -1.0});
    }
    throw ArgumentError("unknown Pauli label");
}

char to_char(Pauli p) {
    switch (p) {
        case Pauli::X: return 'x';
        case Pauli::Y: return 'y';
        case Pauli::Z: return 'z';
    }
    return '?';
}

Pauli parse_pauli(std::string_view s) {
    if (s == "x" || s == "X") return Pauli::X;
    if (s == "y" || s == "Y") return Pauli::Y;
    if (s == "z" || s == "Z") return Pauli::Z;
    throw ArgumentError("unknown Pauli label '" + std::string(s) + "'");
}

void ModelParams::validate() const {
    if (!(gamma >= 0.0 && gamma <= std::numbers::pi / 2 + 1e-12))
        throw ArgumentError("gamma must lie in [0, pi/2]");
    if (!(hz >= 0.0) || !std::isfinite(hz)) throw ArgumentError("hz must be a finite non-negative number");
    if (length < 2 || length % 2 != 0) throw ArgumentError("chain length must be even and at least 2");
}

namespace {

DenseTensor site_field(const ModelParams& p) {
    return -std::sin(p.gamma) * pauli(Pauli::X) + (-p.hz) * pauli(Pauli::Z);
}

DenseTensor bond_coupling(const ModelParams& p) {
    return -std::cos(p.gamma) * kron(pauli(Pauli::Z), pauli(Pauli::Z));
}

// exp(-i h tau) for a Hermitian h.
DenseTensor unitary_exp(const DenseTensor& h, double tau) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(Eigen::MatrixXcd(h.to_matrix()));
    const Eigen::VectorXcd phases =
        (es.eigenvalues().cast<cplx>() * cplx{0.0, -tau}).array().exp().matrix();
    const RowMatrix u = es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
    return DenseTensor::from_matrix(u);
}

// Bond (site, site+1) with odd 1-based `site` carries both single-site fields.
DenseTensor bond_hamiltonian(const ModelParams& p, int site) {
    DenseTensor h = bond_coupling(p);
    if (site % 2 == 1) {
        const DenseTensor f = site_field(p);
        const DenseTensor id = DenseTensor::identity(2);
        h += kron(f, id);
        h += kron(id, f);
    }
    return h;
}

GateLayer make_layer(const ModelParams& p, bool covering, double tau) {
    GateLayer layer;
    for (int s = covering ? 1 : 2; s < p.length; s += 2) layer.gates.push_back({s, unitary_exp(bond_hamiltonian(p, s), tau)});
    return layer;
}

}  // namespace

std::vector<LocalTerm> hamiltonian_terms(const ModelParams& params) {
    params.validate();
    std::vector<LocalTerm> terms;
    terms.reserve(static_cast<std::size_t>(2 * params.length - 1));
    for (int s = 1; s < params.length; ++s) terms.push_back({s, bond_coupling(params)});
    for (int s = 1; s <= params.length; ++s) terms.push_back({s, site_field(params)});
    return terms;
}

GateSchedule trotter_gates(const ModelParams& params, double dt, Direction direction, TrotterOrder order,
                           double max_dt) {
    params.validate();
    if (!(dt > 0.0)) throw ArgumentError("Trotter step must be positive");
    if (dt > max_dt + 1e-15) throw ArgumentError("Trotter step exceeds the configured bound");

    const double sign = direction == Direction::Forward ? 1.0 : -1.0;
    GateSchedule sched;
    sched.trotter_step = dt;
    sched.order = order;
    sched.direction = direction;

    // (covering?, fraction of dt) for each layer
    std::vector<std::pair<bool, double>> plan;
    if (order == TrotterOrder::Second) {
        plan = {{false, 0.5}, {true, 1.0}, {false, 0.5}};
    } else {
        const double theta = 1.0 / (2.0 - std::cbrt(2.0));
        const double mid = 1.0 - 2.0 * theta;
        plan = {{false, theta / 2},         {true, theta}, {false, (theta + mid) / 2}, {true, mid},
                {false, (theta + mid) / 2}, {true, theta}, {false, theta / 2}};
    }
    for (auto [covering, frac] : plan) {
        GateLayer layer = make_layer(params, covering, sign * frac * dt);
        if (!layer.gates.empty()) sched.layers.push_back(std::move(layer));
    }
    return sched;
}

std::string to_string(StateKind kind) {
    switch (kind) {
        case StateKind::FMZ: return "FMZ";
        case StateKind::FMX: return "FMX";
        case StateKind::NEEL: return "NEEL";
    }
    return "?";
}

StateKind parse_state_kind(std::string_view s) {
    std::string u(s);
    std::transform(u.begin(), u.end(), u.begin(), [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
    if (u == "FMZ") return StateKind::FMZ;
    if (u == "FMX") return StateKind::FMX;
    if (u == "NEEL") return StateKind::NEEL;
    throw ArgumentError("unknown product state '" + std::string(s) + "'");
}

ProductState product_state(StateKind kind, int length) {
    if (length < 1 || length % 2 != 0) throw ArgumentError("product state length must be even and positive");
    ProductState st;
    st.kind = kind;
    st.length = length;
    st.sites.resize(static_cast<std::size_t>(length));
    // The two x-polarized amplitudes are the neighbouring doubles around
    // 1/sqrt(2) whose squares sum to exactly 1.0.
    const double a = 1.0 / std::numbers::sqrt2;
    const double b = std::sqrt(1.0 - a * a);
    for (int i = 0; i < length; ++i) {
        auto& v = st.sites[static_cast<std::size_t>(i)];
        switch (kind) {
            case StateKind::FMZ: v = {1.0, 0.0}; break;
            case StateKind::FMX: v = {a, b}; break;
            case StateKind::NEEL: v = (i % 2 == 0) ? std::array<cplx, 2>{1.0, 0.0} : std::array<cplx, 2>{0.0, 1.0}; break;
        }
    }
    return st;
}

cplx site_expectation(const ProductState& state, int site, const DenseTensor& op) {
    if (site < 1 || site > state.length) throw ArgumentError("site out of range");
    const auto& v = state.sites[static_cast<std::size_t>(site - 1)];
    cplx r = 0.0;
    for (std::size_t o = 0; o < 2; ++o)
        for (std::size_t i = 0; i < 2; ++i) r += std::conj(v[o]) * op({o, i}) * v[i];
    return r;
}

std::vector<std::size_t> OperatorMps::bond_extents() const {
    std::vector<std::size_t> b;
    for (std::size_t s = 0; s + 1 < cores.size(); ++s) b.push_back(cores[s].extent(3));
    return b;
}

std::size_t OperatorMps::max_bond() const {
    std::size_t m = 1;
    for (auto e : bond_extents()) m = std::max(m, e);
    return m;
}

RowMatrix OperatorMps::to_dense() const {
    // acc has shape (2^n out, 2^n in, right bond), flattened row-major
    const int L = length();
    if (L > 12) throw SizeError("dense reconstruction limited to 12 sites");
    std::size_t dim = 1, bond = 1;
    std::vector<cplx> acc{1.0};
    for (int s = 0; s < L; ++s) {
        const auto& c = cores[static_cast<std::size_t>(s)];
        const std::size_t r = c.extent(3);
        std::vector<cplx> next(dim * 2 * dim * 2 * r, 0.0);
        const std::size_t nd = dim * 2;
        for (std::size_t o = 0; o < dim; ++o)
            for (std::size_t i = 0; i < dim; ++i)
                for (std::size_t b = 0; b < bond; ++b) {
                    const cplx a = acc[(o * dim + i) * bond + b];
                    if (a == 0.0) continue;
                    for (std::size_t po = 0; po < 2; ++po)
                        for (std::size_t pi = 0; pi < 2; ++pi)
                            for (std::size_t rr = 0; rr < r; ++rr)
                                next[((o * 2 + po) * nd + (i * 2 + pi)) * r + rr] += a * c({b, po, pi, rr});
                }
        acc = std::move(next);
        dim = nd;
        bond = r;
    }
    return Eigen::Map<RowMatrix>(acc.data(), static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
}

namespace {

OperatorMps product_operator(std::vector<DenseTensor> site_ops) {
    OperatorMps mps;
    for (auto& op : site_ops) mps.cores.push_back(std::move(op).reshaped({1, 2, 2, 1}));
    return mps;
}

}  // namespace

OperatorMps local_operator_mps(Pauli alpha, int site, int length) {
    if (length < 1) throw ArgumentError("chain length must be positive");
    if (site < 1 || site > length) throw ArgumentError("operator site out of range");
    std::vector<DenseTensor> ops;
    for (int s = 1; s <= length; ++s) ops.push_back(s == site ? pauli(alpha) : DenseTensor::identity(2));
    return product_operator(std::move(ops));
}

OperatorMps density_operator_mps(const ProductState& state, Pauli beta, int site) {
    if (site < 1 || site > state.length) throw ArgumentError("operator site out of range");
    std::vector<DenseTensor> ops;
    const DenseTensor b = pauli(beta);
    for (int s = 1; s <= state.length; ++s) {
        const auto& v = state.sites[static_cast<std::size_t>(s - 1)];
        std::array<cplx, 2> ket = v;
        if (s == site) ket = {b({0, 0}) * v[0] + b({0, 1}) * v[1], b({1, 0}) * v[0] + b({1, 1}) * v[1]};
        DenseTensor rho({2, 2});
        for (std::size_t o = 0; o < 2; ++o)
            for (std::size_t i = 0; i < 2; ++i) rho({o, i}) = ket[o] * std::conj(v[i]);
        ops.push_back(std::move(rho));
    }
    return product_operator(std::move(ops));
}

}  // namespace ndsf
