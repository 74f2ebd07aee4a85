#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace annealnqs {

/// Ordered configuration of ±1 spins. Used for the visible layer, the hidden
/// layer and the decoded annealer output alike.
class SpinConfig {
   public:
    using value_type = std::int8_t;

    SpinConfig() = default;
    /// Throws Errc::invalid_argument if any entry is not exactly ±1.
    explicit SpinConfig(std::vector<value_type> spins);

    static SpinConfig constant(std::size_t n, value_type value);
    /// Bit i of `bits` set means spin i is +1. Enumeration order of the
    /// exact sampler.
    static SpinConfig from_bits(std::uint64_t bits, std::size_t n);

    std::size_t size() const noexcept { return spins_.size(); }
    value_type operator[](std::size_t i) const noexcept { return spins_[i]; }
    std::span<const value_type> spins() const noexcept { return spins_; }

    /// Negates spin i in place. Unchecked; use annealnqs::flip for validation.
    void flip_in_place(std::size_t i) noexcept { spins_[i] = static_cast<value_type>(-spins_[i]); }

    Eigen::VectorXd to_vector() const;
    std::uint64_t to_bits() const;
    std::string to_string() const;

    friend bool operator==(const SpinConfig&, const SpinConfig&) = default;

   private:
    std::vector<value_type> spins_;
};

enum class LatticeKind { chain, torus };

const char* to_string(LatticeKind kind);

struct Bond {
    int i = 0;
    int j = 0;
    friend bool operator==(const Bond&, const Bond&) = default;
};

/// Periodic transverse-field Ising geometry, H = -h Σ τx_i - Σ_<ij> τz_i τz_j.
struct TfimLattice {
    LatticeKind kind = LatticeKind::chain;
    std::vector<int> dims;  // {N} or {Lx, Ly}
    double field = 0.0;
    std::vector<Bond> bonds;

    int n_sites() const noexcept;
};

/// Sites of a torus are row-major: site = y * Lx + x.
TfimLattice build_lattice(LatticeKind kind, std::span<const int> dims, double h);
TfimLattice chain_lattice(int n, double h);
TfimLattice torus_lattice(int lx, int ly, double h);

/// -Σ_bonds v_i v_j.
double diagonal_energy(const TfimLattice& lattice, const SpinConfig& v);

SpinConfig flip(const SpinConfig& v, std::size_t i);

}  // namespace annealnqs
