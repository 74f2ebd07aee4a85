#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "annealnqs/lattice.hpp"

namespace annealnqs {

enum class ReferenceMethod { free_fermion, dense_ed, lanczos };

const char* to_string(ReferenceMethod method);
ReferenceMethod reference_method_from_string(const std::string& name);

struct ReferenceResult {
    double energy = 0.0;  // total ground-state energy
    double energy_per_spin = 0.0;
    ReferenceMethod method = ReferenceMethod::free_fermion;
    LatticeKind kind = LatticeKind::chain;
    std::vector<int> dims;
    double h = 0.0;
};

inline constexpr int kDenseMaxSites = 14;
inline constexpr int kLanczosMaxSites = 20;

/// Periodic chain with even N >= 4: E0 = -Σ_k sqrt(1 + h² - 2h cos k) over the
/// antiperiodic momenta k = π(2m + 1)/N.
ReferenceResult exact_energy_1d(int n, double h);

/// Ground-state energy per spin of the infinite chain, -(1/2π) ∫ sqrt(1 + h² - 2h cos k) dk.
double exact_energy_1d_thermo(double h);

/// Lowest eigenvalue of the dense Hamiltonian, restricted to states invariant
/// under lattice translations and the global spin flip. H has nonpositive
/// off-diagonal elements, so its lowest eigenvalue has a symmetric eigenvector
/// for every h >= 0.
ReferenceResult dense_ground_energy(const TfimLattice& lattice);

/// H|ψ⟩ in the full z basis without materializing H.
void apply_hamiltonian(const TfimLattice& lattice, const Eigen::VectorXd& in, Eigen::VectorXd& out);

struct LanczosOptions {
    double tol = 1e-10;
    int krylov_dim = 40;
    int max_restarts = 500;
};

/// Restarted Lanczos with full reorthogonalization inside each cycle.
ReferenceResult lanczos_ground_energy(const TfimLattice& lattice, const LanczosOptions& options = {});

/// Free-fermion for even chains, dense ED up to 12 sites, Lanczos beyond.
ReferenceResult reference_energy(const TfimLattice& lattice);

}  // namespace annealnqs
