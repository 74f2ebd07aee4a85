#include "annealnqs/lattice.hpp"

#include <cmath>

#include "annealnqs/error.hpp"

namespace annealnqs {

SpinConfig::SpinConfig(std::vector<value_type> spins) : spins_(std::move(spins)) {
    for (std::size_t i = 0; i < spins_.size(); ++i) {
        if (spins_[i] != 1 && spins_[i] != -1) {
            throw Error(Errc::invalid_argument,
                        "spin " + std::to_string(i) + " is " + std::to_string(spins_[i]) +
                            ", expected +1 or -1");
        }
    }
}

SpinConfig SpinConfig::constant(std::size_t n, value_type value) {
    return SpinConfig(std::vector<value_type>(n, value));
}

SpinConfig SpinConfig::from_bits(std::uint64_t bits, std::size_t n) {
    std::vector<value_type> s(n);
    for (std::size_t i = 0; i < n; ++i) s[i] = ((bits >> i) & 1U) ? 1 : -1;
    SpinConfig out;
    out.spins_ = std::move(s);
    return out;
}

Eigen::VectorXd SpinConfig::to_vector() const {
    Eigen::VectorXd out(static_cast<Eigen::Index>(spins_.size()));
    for (std::size_t i = 0; i < spins_.size(); ++i) out[static_cast<Eigen::Index>(i)] = spins_[i];
    return out;
}

std::uint64_t SpinConfig::to_bits() const {
    std::uint64_t bits = 0;
    for (std::size_t i = 0; i < spins_.size() && i < 64; ++i) {
        if (spins_[i] > 0) bits |= (std::uint64_t{1} << i);
    }
    return bits;
}

std::string SpinConfig::to_string() const {
    std::string s;
    s.reserve(spins_.size());
    for (auto x : spins_) s.push_back(x > 0 ? '+' : '-');
    return s;
}

const char* to_string(LatticeKind kind) {
    return kind == LatticeKind::chain ? "chain" : "torus";
}

int TfimLattice::n_sites() const noexcept {
    int n = 1;
    for (int d : dims) n *= d;
    return n;
}

TfimLattice build_lattice(LatticeKind kind, std::span<const int> dims, double h) {
    if (!(h >= 0.0) || !std::isfinite(h)) {
        throw Error(Errc::negative_field, "transverse field must be finite and >= 0");
    }
    TfimLattice lat;
    lat.kind = kind;
    lat.field = h;
    lat.dims.assign(dims.begin(), dims.end());
    if (kind == LatticeKind::chain) {
        if (dims.size() != 1) throw Error(Errc::invalid_argument, "chain lattice takes one dimension");
        const int n = dims[0];
        if (n < 3) throw Error(Errc::dimension_too_small, "periodic chain needs N >= 3");
        lat.bonds.reserve(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) lat.bonds.push_back({i, (i + 1) % n});
    } else {
        if (dims.size() != 2) throw Error(Errc::invalid_argument, "torus lattice takes two dimensions");
        const int lx = dims[0];
        const int ly = dims[1];
        if (lx < 3 || ly < 3) throw Error(Errc::dimension_too_small, "periodic torus needs Lx, Ly >= 3");
        lat.bonds.reserve(static_cast<std::size_t>(2 * lx * ly));
        for (int y = 0; y < ly; ++y) {
            for (int x = 0; x < lx; ++x) {
                const int s = y * lx + x;
                lat.bonds.push_back({s, y * lx + (x + 1) % lx});
                lat.bonds.push_back({s, ((y + 1) % ly) * lx + x});
            }
        }
    }
    return lat;
}

TfimLattice chain_lattice(int n, double h) {
    const int dims[] = {n};
    return build_lattice(LatticeKind::chain, dims, h);
}

TfimLattice torus_lattice(int lx, int ly, double h) {
    const int dims[] = {lx, ly};
    return build_lattice(LatticeKind::torus, dims, h);
}

double diagonal_energy(const TfimLattice& lattice, const SpinConfig& v) {
    if (static_cast<int>(v.size()) != lattice.n_sites()) {
        throw Error(Errc::length_mismatch, "configuration length " + std::to_string(v.size()) +
                                               " does not match " + std::to_string(lattice.n_sites()) +
                                               " sites");
    }
    int sum = 0;
    for (const auto& b : lattice.bonds) sum += v[static_cast<std::size_t>(b.i)] * v[static_cast<std::size_t>(b.j)];
    return -static_cast<double>(sum);
}

SpinConfig flip(const SpinConfig& v, std::size_t i) {
    if (i >= v.size()) {
        throw Error(Errc::index_out_of_range,
                    "flip index " + std::to_string(i) + " out of range for " + std::to_string(v.size()) + " spins");
    }
    SpinConfig out = v;
    out.flip_in_place(i);
    return out;
}

}  // namespace annealnqs
