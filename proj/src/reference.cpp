#include "annealnqs/reference.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <sstream>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "annealnqs/error.hpp"
#include "annealnqs/parallel.hpp"

namespace annealnqs {

namespace {

double dispersion(double k, double h) { return 2.0 * std::sqrt(1.0 + h * h - 2.0 * h * std::cos(k)); }

void check_field(double h) {
    if (!(h >= 0.0) || !std::isfinite(h)) throw Error(Errc::negative_field, "transverse field must be finite and >= 0");
}

ReferenceResult make_result(double energy, ReferenceMethod method, const TfimLattice& lat) {
    ReferenceResult r;
    r.energy = energy;
    r.energy_per_spin = energy / lat.n_sites();
    r.method = method;
    r.kind = lat.kind;
    r.dims = lat.dims;
    r.h = lat.field;
    return r;
}

Eigen::VectorXd diagonal_elements(const TfimLattice& lat) {
    const int n = lat.n_sites();
    const std::size_t dim = std::size_t{1} << n;
    Eigen::VectorXd diag(static_cast<Eigen::Index>(dim));
    for (std::size_t s = 0; s < dim; ++s) {
        int sum = 0;
        for (const auto& b : lat.bonds) sum += (((s >> b.i) ^ (s >> b.j)) & 1U) ? -1 : 1;
        diag[static_cast<Eigen::Index>(s)] = -sum;
    }
    return diag;
}

// Site permutations of every lattice translation.
std::vector<std::vector<int>> translations(const TfimLattice& lat) {
    std::vector<std::vector<int>> out;
    const int n = lat.n_sites();
    if (lat.kind == LatticeKind::chain) {
        for (int t = 0; t < n; ++t) {
            std::vector<int> p(static_cast<std::size_t>(n));
            for (int i = 0; i < n; ++i) p[static_cast<std::size_t>(i)] = (i + t) % n;
            out.push_back(std::move(p));
        }
        return out;
    }
    const int lx = lat.dims[0], ly = lat.dims[1];
    for (int ty = 0; ty < ly; ++ty) {
        for (int tx = 0; tx < lx; ++tx) {
            std::vector<int> p(static_cast<std::size_t>(n));
            for (int y = 0; y < ly; ++y)
                for (int x = 0; x < lx; ++x) p[static_cast<std::size_t>(y * lx + x)] = ((y + ty) % ly) * lx + (x + tx) % lx;
            out.push_back(std::move(p));
        }
    }
    return out;
}

std::size_t permute_bits(std::size_t s, const std::vector<int>& p) {
    std::size_t out = 0;
    for (std::size_t i = 0; i < p.size(); ++i) out |= ((s >> i) & 1U) << p[i];
    return out;
}

}  // namespace

const char* to_string(ReferenceMethod method) {
    switch (method) {
        case ReferenceMethod::free_fermion: return "free-fermion";
        case ReferenceMethod::dense_ed: return "dense-ed";
        case ReferenceMethod::lanczos: return "lanczos";
    }
    return "unknown";
}

ReferenceMethod reference_method_from_string(const std::string& name) {
    if (name == "free-fermion") return ReferenceMethod::free_fermion;
    if (name == "dense-ed" || name == "dense") return ReferenceMethod::dense_ed;
    if (name == "lanczos") return ReferenceMethod::lanczos;
    throw Error(Errc::invalid_argument, "unknown reference method '" + name + "'");
}

ReferenceResult exact_energy_1d(int n, double h) {
    check_field(h);
    if (n < 4) throw Error(Errc::dimension_too_small, "free-fermion reference needs N >= 4");
    if (n % 2 != 0) throw Error(Errc::invalid_argument, "free-fermion reference needs even N; use exact diagonalization");
    double sum = 0.0;
    for (int m = 0; m < n; ++m) sum += dispersion(std::numbers::pi * (2.0 * m + 1.0) / n, h);
    ReferenceResult r;
    r.energy = -0.5 * sum;
    r.energy_per_spin = r.energy / n;
    r.method = ReferenceMethod::free_fermion;
    r.kind = LatticeKind::chain;
    r.dims = {n};
    r.h = h;
    return r;
}

double exact_energy_1d_thermo(double h) {
    check_field(h);
    using boost::math::quadrature::gauss_kronrod;
    auto f = [h](double k) { return 0.5 * dispersion(k, h); };
    // Split at π so the integrand is smooth on each piece except at k = 0, 2π.
    const double pi = std::numbers::pi;
    const double left = gauss_kronrod<double, 61>::integrate(f, 0.0, pi, 20, 1e-14);
    const double right = gauss_kronrod<double, 61>::integrate(f, pi, 2.0 * pi, 20, 1e-14);
    return -(left + right) / (2.0 * pi);
}

ReferenceResult dense_ground_energy(const TfimLattice& lat) {
    const int n = lat.n_sites();
    if (n > kDenseMaxSites) {
        throw Error(Errc::too_large, "dense diagonalization is capped at " + std::to_string(kDenseMaxSites) + " sites");
    }
    const std::size_t dim = std::size_t{1} << n;
    const std::size_t mask = dim - 1;
    const auto perms = translations(lat);

    // Orbit representative (smallest member) of every basis state.
    std::vector<std::uint32_t> rep(dim);
    std::vector<std::size_t> reps;
    for (std::size_t s = 0; s < dim; ++s) {
        std::size_t best = s;
        for (const auto& p : perms) {
            const std::size_t t = permute_bits(s, p);
            best = std::min({best, t, t ^ mask});
        }
        rep[s] = static_cast<std::uint32_t>(best);
        if (best == s) reps.push_back(s);
    }
    std::vector<std::int32_t> index(dim, -1);
    for (std::size_t k = 0; k < reps.size(); ++k) index[reps[k]] = static_cast<std::int32_t>(k);
    std::vector<double> orbit(reps.size(), 0.0);
    for (std::size_t s = 0; s < dim; ++s) orbit[static_cast<std::size_t>(index[rep[s]])] += 1.0;

    const Eigen::VectorXd diag = diagonal_elements(lat);
    const auto m = static_cast<Eigen::Index>(reps.size());
    Eigen::MatrixXd H = Eigen::MatrixXd::Zero(m, m);
    for (Eigen::Index c = 0; c < m; ++c) {
        const std::size_t r = reps[static_cast<std::size_t>(c)];
        H(c, c) = diag[static_cast<Eigen::Index>(r)];
        for (int i = 0; i < n; ++i) {
            const auto row = static_cast<Eigen::Index>(index[rep[r ^ (std::size_t{1} << i)]]);
            H(row, c) -= lat.field * std::sqrt(orbit[static_cast<std::size_t>(c)] / orbit[static_cast<std::size_t>(row)]);
        }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) throw Error(Errc::solver_failure, "dense eigensolver failed");
    return make_result(es.eigenvalues()[0], ReferenceMethod::dense_ed, lat);
}

void apply_hamiltonian(const TfimLattice& lat, const Eigen::VectorXd& in, Eigen::VectorXd& out) {
    const int n = lat.n_sites();
    const std::size_t dim = std::size_t{1} << n;
    if (static_cast<std::size_t>(in.size()) != dim) throw Error(Errc::length_mismatch, "state vector has the wrong dimension");
    out.resize(in.size());
    const double h = lat.field;
    parallel_for_chunks(dim, 1 << 14, [&](std::size_t, std::size_t begin, std::size_t end) {
        for (std::size_t s = begin; s < end; ++s) {
            int sum = 0;
            for (const auto& b : lat.bonds) sum += (((s >> b.i) ^ (s >> b.j)) & 1U) ? -1 : 1;
            double acc = -sum * in[static_cast<Eigen::Index>(s)];
            double flips = 0.0;
            for (int i = 0; i < n; ++i) flips += in[static_cast<Eigen::Index>(s ^ (std::size_t{1} << i))];
            out[static_cast<Eigen::Index>(s)] = acc - h * flips;
        }
    });
}

ReferenceResult lanczos_ground_energy(const TfimLattice& lat, const LanczosOptions& opt) {
    const int n = lat.n_sites();
    if (n > kLanczosMaxSites) {
        throw Error(Errc::too_large, "Lanczos reference is capped at " + std::to_string(kLanczosMaxSites) + " sites");
    }
    const auto dim = static_cast<Eigen::Index>(std::size_t{1} << n);
    const int m = static_cast<int>(std::min<Eigen::Index>(opt.krylov_dim, dim));
    // The ground state has strictly positive amplitudes; a mildly non-uniform
    // positive start keeps overlap with it and with the h = 0 ground states.
    Eigen::VectorXd start(dim);
    for (Eigen::Index s = 0; s < dim; ++s) start[s] = 1.0 + 0.1 * std::sin(0.7 * static_cast<double>(s) + 0.3);
    start.normalize();

    Eigen::MatrixXd basis(dim, m + 1);
    Eigen::VectorXd w(dim);
    double theta = 0.0;
    double residual = 0.0;
    for (int restart = 0; restart < opt.max_restarts; ++restart) {
        basis.col(0) = start;
        std::vector<double> alpha;
        std::vector<double> beta;
        int steps = 0;
        for (int j = 0; j < m; ++j) {
            apply_hamiltonian(lat, basis.col(j), w);
            alpha.push_back(basis.col(j).dot(w));
            for (int pass = 0; pass < 2; ++pass) {
                const Eigen::VectorXd coeff = basis.leftCols(j + 1).transpose() * w;
                w.noalias() -= basis.leftCols(j + 1) * coeff;
            }
            const double b = w.norm();
            steps = j + 1;
            beta.push_back(b);
            if (b < 1e-13) break;
            basis.col(j + 1) = w / b;
        }
        Eigen::MatrixXd T = Eigen::MatrixXd::Zero(steps, steps);
        for (int j = 0; j < steps; ++j) {
            T(j, j) = alpha[static_cast<std::size_t>(j)];
            if (j + 1 < steps) T(j, j + 1) = T(j + 1, j) = beta[static_cast<std::size_t>(j)];
        }
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T);
        theta = es.eigenvalues()[0];
        const Eigen::VectorXd y = es.eigenvectors().col(0);
        residual = std::abs(beta.back() * y[steps - 1]);
        if (residual <= opt.tol * std::max(1.0, std::abs(theta))) {
            return make_result(theta, ReferenceMethod::lanczos, lat);
        }
        start = basis.leftCols(steps) * y;
        start.normalize();
    }
    std::ostringstream os;
    os << "Lanczos did not converge after " << opt.max_restarts << " restarts; residual " << residual
       << ", eigenvalue estimate " << theta;
    throw Error(Errc::not_converged, os.str());
}

ReferenceResult reference_energy(const TfimLattice& lat) {
    const int n = lat.n_sites();
    if (lat.kind == LatticeKind::chain && n % 2 == 0 && n >= 4) return exact_energy_1d(n, lat.field);
    if (n <= 12) return dense_ground_energy(lat);
    return lanczos_ground_energy(lat);
}

}  // namespace annealnqs
