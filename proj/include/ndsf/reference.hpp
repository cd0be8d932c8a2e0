#pragma once

#include <vector>

#include <Eigen/Dense>

#include "ndsf/evolution.hpp"
#include "ndsf/model.hpp"
#include "ndsf/spectral.hpp"

namespace ndsf {

enum class DispersionForm { Exact, Cosine };

/// exact: 2 sqrt(1 - sin(2 gamma) cos k); cosine: 2 - sin(2 gamma) cos k.
double spinon_dispersion(double gamma, double k, DispersionForm form = DispersionForm::Exact);

struct DispersionCurve {
    double gamma = 0.0;
    DispersionForm form = DispersionForm::Exact;
    std::vector<double> k;
    std::vector<double> energy;
};

DispersionCurve dispersion_curve(double gamma, const std::vector<double>& k, DispersionForm form = DispersionForm::Exact);

// BOWTIE_CREATE: e(k1) + e(k2); BOWTIE_ANNIHILATE: -e(k1) - e(k2); SHELL: e(k1) - e(k2); k1 + k2 = k
enum class BandKind { BowtieCreate, BowtieAnnihilate, Shell };

const char* to_string(BandKind kind);

struct Bounds {
    double lower = 0.0;
    double upper = 0.0;
};

/// Extremes of the two-spinon energy over k1 + k2 = k with the exact
/// dispersion (grid search then golden-section refinement).
Bounds continuum_bounds(double gamma, double k, BandKind kind);

/// Same boundaries for the cosine dispersion in closed form.
Bounds continuum_bounds_cosine(double gamma, double k, BandKind kind);

/// Closed-form boundaries at gamma = pi/4.
Bounds qcp_bounds(double k, BandKind kind);

struct ContinuumBand {
    BandKind kind = BandKind::BowtieCreate;
    double gamma = 0.0;
    std::vector<double> k;
    std::vector<Bounds> bounds;
};

ContinuumBand continuum_band(double gamma, const std::vector<double>& k, BandKind kind);

/// Ascending eigenvalues of the N x N two-spinon effective Hamiltonian at
/// momentum k, energies measured from the fully polarized state.
std::vector<double> bound_state_spectrum(double gamma, double hz, double k, int cutoff);

struct BoundStateSet {
    double gamma = 0.0;
    double hz = 0.0;
    int cutoff = 0;
    std::vector<double> k;
    std::vector<std::vector<double>> levels;
};

BoundStateSet bound_state_set(double gamma, double hz, const std::vector<double>& k, int cutoff);

constexpr int kMaxEdLength = 12;

/// Full diagonalization of the chain Hamiltonian in the computational basis
/// (site 1 is the most significant bit, bit 0 = spin up along z).
struct EdSolution {
    ModelParams params;
    Eigen::VectorXd energies;  // ascending
    Eigen::MatrixXd vectors;   // columns are eigenvectors
    double hamiltonian_norm = 0.0;  // Frobenius

    int dim() const { return static_cast<int>(energies.size()); }
};

Eigen::MatrixXd ed_hamiltonian(const ModelParams& params);
EdSolution ed_solve(const ModelParams& params);

/// Dense product state vector in the ED basis.
Eigen::VectorXcd product_state_vector(StateKind kind, int length);

/// <phi| e^{iHt} sigma^alpha_i e^{-iHt} sigma^beta_j |phi> for every t.
TimeSeries ed_correlation(const EdSolution& ed, StateKind state, Pauli alpha, Pauli beta, int i, int j,
                          const std::vector<double>& t_grid);
TimeSeries ed_correlation(const ModelParams& params, StateKind state, Pauli alpha, Pauli beta, int i, int j,
                          const std::vector<double>& t_grid);

/// All (i, j) pairs at once; nothing is mirrored.
CorrelationSet ed_correlation_set(const EdSolution& ed, StateKind state, Pauli alpha, Pauli beta,
                                  const std::vector<double>& t_grid);

struct LehmannState {
    bool ground = false;               // use the ED ground state instead of a product state
    StateKind kind = StateKind::FMZ;
};

/// 2 pi sum_{m,n} <psi|m><m|s_k|n><n|s_-k|psi> K(w - (E_n - E_m)) with K the
/// Parzen kernel of half width `window.half_width` (must be > 0).
SpectralGrid lehmann_spectrum(const EdSolution& ed, const LehmannState& state, Pauli alpha, Pauli beta,
                              const WindowSpec& window, const OmegaGrid& omega);

/// max-norm of e^{i H_I t} - X_odd e^{-i H' t} X_odd for the Rydberg Ising
/// Hamiltonian H_I = V sum ZZ + Omega sum X + sum Delta_i Z and its partner H'.
double rydberg_identity_residual(double V, double omega, const std::vector<double>& delta, double t, int length);

}  // namespace ndsf
