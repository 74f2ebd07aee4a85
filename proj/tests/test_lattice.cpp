#include <algorithm>
#include <set>

#include <gtest/gtest.h>

#include "annealnqs/error.hpp"
#include "annealnqs/lattice.hpp"
#include "annealnqs/rng.hpp"

using namespace annealnqs;

namespace {

SpinConfig spins(std::initializer_list<int> v) {
    std::vector<SpinConfig::value_type> s(v.begin(), v.end());
    return SpinConfig(s);
}

Errc error_code_of(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "no annealnqs::Error thrown";
    return Errc::invalid_argument;
}

}  // namespace

TEST(SpinConfig, RejectsValuesOtherThanPlusMinusOne) {
    EXPECT_EQ(error_code_of([] { SpinConfig({1, 0, -1}); }), Errc::invalid_argument);
    EXPECT_EQ(error_code_of([] { SpinConfig({2}); }), Errc::invalid_argument);
}

TEST(SpinConfig, BitsRoundTrip) {
    for (std::uint64_t b = 0; b < 32; ++b) {
        const SpinConfig s = SpinConfig::from_bits(b, 5);
        EXPECT_EQ(s.to_bits(), b);
        EXPECT_EQ(s[0], (b & 1) ? 1 : -1);
    }
}

TEST(BuildLattice, FourSiteRing) {
    const TfimLattice lat = chain_lattice(4, 0.5);
    std::set<std::pair<std::size_t, std::size_t>> got;
    for (const auto& b : lat.bonds) got.insert({std::min(b.i, b.j), std::max(b.i, b.j)});
    const std::set<std::pair<std::size_t, std::size_t>> want{{0, 1}, {1, 2}, {2, 3}, {0, 3}};
    EXPECT_EQ(got, want);
    EXPECT_EQ(lat.n_sites(), 4u);
    EXPECT_DOUBLE_EQ(lat.field, 0.5);
}

TEST(BuildLattice, ThreeByThreeTorusHasDegreeFour) {
    const TfimLattice lat = torus_lattice(3, 3, 1.0);
    EXPECT_EQ(lat.bonds.size(), 18u);
    std::vector<int> degree(9, 0);
    for (const auto& b : lat.bonds) {
        ++degree[b.i];
        ++degree[b.j];
    }
    for (int d : degree) EXPECT_EQ(d, 4);
}

TEST(BuildLattice, TorusIsRowMajor) {
    const TfimLattice lat = torus_lattice(4, 3, 1.0);
    std::set<std::pair<std::size_t, std::size_t>> got;
    for (const auto& b : lat.bonds) got.insert({std::min(b.i, b.j), std::max(b.i, b.j)});
    // site (x, y) = y * lx + x: (0,0)-(1,0), (0,0)-(0,1), (3,0)-(0,0) wrap, (0,2)-(0,0) wrap
    EXPECT_TRUE(got.count({0, 1}));
    EXPECT_TRUE(got.count({0, 4}));
    EXPECT_TRUE(got.count({0, 3}));
    EXPECT_TRUE(got.count({0, 8}));
    EXPECT_FALSE(got.count({0, 5}));
}

TEST(BuildLattice, Errors) {
    EXPECT_EQ(error_code_of([] { chain_lattice(2, 1.0); }), Errc::dimension_too_small);
    EXPECT_EQ(error_code_of([] { torus_lattice(3, 2, 1.0); }), Errc::dimension_too_small);
    EXPECT_EQ(error_code_of([] { chain_lattice(5, -0.1); }), Errc::negative_field);
    const std::vector<int> dims{3, 3};
    EXPECT_EQ(error_code_of([&] { build_lattice(LatticeKind::chain, dims, 1.0); }), Errc::invalid_argument);
}

TEST(BuildLattice, BondCountsAndNoDuplicates) {
    auto check = [](const TfimLattice& lat, std::size_t want) {
        ASSERT_EQ(lat.bonds.size(), want);
        std::set<std::pair<std::size_t, std::size_t>> seen;
        for (const auto& b : lat.bonds) {
            EXPECT_NE(b.i, b.j);
            EXPECT_TRUE(seen.insert({std::min(b.i, b.j), std::max(b.i, b.j)}).second);
        }
    };
    for (int n = 3; n <= 32; ++n) check(chain_lattice(n, 1.0), static_cast<std::size_t>(n));
    for (int lx = 3; lx <= 8; ++lx)
        for (int ly = 3; ly <= 8; ++ly) check(torus_lattice(lx, ly, 1.0), static_cast<std::size_t>(2 * lx * ly));
}

TEST(DiagonalEnergy, Examples) {
    const TfimLattice ring = chain_lattice(4, 0.5);
    EXPECT_DOUBLE_EQ(diagonal_energy(ring, spins({1, 1, 1, 1})), -4.0);
    EXPECT_DOUBLE_EQ(diagonal_energy(ring, spins({1, -1, 1, -1})), 4.0);
    EXPECT_DOUBLE_EQ(diagonal_energy(torus_lattice(3, 3, 1.0), SpinConfig::constant(9, 1)), -18.0);
    EXPECT_EQ(error_code_of([&] { diagonal_energy(ring, spins({1, 1, 1})); }), Errc::length_mismatch);
}

TEST(DiagonalEnergy, GlobalFlipSymmetryAndBounds) {
    Rng rng(7);
    const TfimLattice lat = torus_lattice(4, 3, 1.0);
    const double nb = static_cast<double>(lat.bonds.size());
    for (int t = 0; t < 200; ++t) {
        const SpinConfig v = SpinConfig::from_bits(uniform_index(rng, 1ULL << 12), 12);
        SpinConfig w = v;
        for (std::size_t i = 0; i < w.size(); ++i) w.flip_in_place(i);
        const double e = diagonal_energy(lat, v);
        EXPECT_DOUBLE_EQ(e, diagonal_energy(lat, w));
        EXPECT_GE(e, -nb);
        EXPECT_LE(e, nb);
    }
}

TEST(Flip, Examples) {
    EXPECT_EQ(flip(spins({1, 1}), 0), spins({-1, 1}));
    EXPECT_EQ(flip(spins({-1, -1, -1}), 2), spins({-1, -1, 1}));
    const SpinConfig v = spins({1, -1, 1});
    const SpinConfig w = flip(v, 1);
    EXPECT_EQ(v, spins({1, -1, 1}));
    EXPECT_EQ(w, spins({1, 1, 1}));
    EXPECT_EQ(error_code_of([&] { flip(v, 3); }), Errc::index_out_of_range);
}

TEST(Flip, IsAnInvolution) {
    Rng rng(11);
    for (int t = 0; t < 100; ++t) {
        const SpinConfig v = SpinConfig::from_bits(uniform_index(rng, 1ULL << 10), 10);
        const std::size_t i = uniform_index(rng, 10);
        EXPECT_EQ(flip(flip(v, i), i), v);
    }
}
